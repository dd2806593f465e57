#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "quanta/engine.hpp"
#include "quanta/error.hpp"
#include "quanta/parser.hpp"
#include "quanta/printer.hpp"
#include "quanta/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitEval = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw quanta::QuantaError(quanta::ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int error_exit(const quanta::QuantaError& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
        case quanta::ErrorCode::Lex:
        case quanta::ErrorCode::Parse:
            return kExitParse;
        case quanta::ErrorCode::Usage:
        case quanta::ErrorCode::Io:
            return kExitUsage;
        default:
            return kExitEval;
    }
}

void print_outcome(const quanta::Outcome& o, bool trace) {
    if (trace)
        for (const auto& e : o.trace) std::cerr << quanta::trace_line(e) << "\n";
    if (!o.effects.console.empty()) {
        std::cout << o.effects.console;
        if (o.effects.console.back() != '\n') std::cout << "\n";
    }
    std::cout << o.handle << "\n";
    if (o.value) std::cout << quanta::serialize(o.value) << "\n";
}

void load_preludes(quanta::Session& session, const std::vector<std::string>& preludes) {
    for (const auto& p : preludes) session.eval_line(slurp(p));
}

int run_file(const std::string& path, const std::vector<std::string>& preludes, bool trace,
             uint64_t budget) {
    quanta::EngineOptions opt;
    opt.trace = trace;
    opt.step_budget = budget;
    quanta::Engine eng(opt);
    quanta::Session session(eng);
    try {
        load_preludes(session, preludes);
        quanta::Outcome o = session.eval_line(slurp(path));
        print_outcome(o, trace);
        return kExitOk;
    } catch (const quanta::QuantaError& e) {
        return error_exit(e);
    }
}

int parse_file(const std::string& path) {
    try {
        quanta::ParseResult pr = quanta::parse_program(slurp(path));
        std::cout << quanta::serialize(pr.root) << "\n";
        return kExitOk;
    } catch (const quanta::QuantaError& e) {
        return error_exit(e);
    }
}

int repl(const std::vector<std::string>& preludes, bool trace, uint64_t budget) {
    quanta::EngineOptions opt;
    opt.trace = trace;
    opt.step_budget = budget;
    quanta::Engine eng(opt);
    quanta::Session session(eng);
    try {
        load_preludes(session, preludes);
    } catch (const quanta::QuantaError& e) {
        return error_exit(e);
    }
    std::string line;
    std::cout << "> " << std::flush;
    while (std::getline(std::cin, line)) {
        if (line == ":quit") break;
        if (line.rfind(":trace", 0) == 0) {
            eng.options().trace = line.find("on") != std::string::npos;
            trace = eng.options().trace;
        } else if (line.rfind(":load ", 0) == 0) {
            try {
                quanta::Outcome o = session.eval_line(slurp(line.substr(6)));
                print_outcome(o, trace);
            } catch (const quanta::QuantaError& e) {
                std::cerr << e.what() << "\n";
            }
        } else if (line.rfind(":show ", 0) == 0) {
            if (const quanta::Outcome* o = eng.find_handle(line.substr(6)))
                std::cout << quanta::serialize(o->value) << "\n";
            else
                std::cerr << "unknown handle\n";
        } else if (line.rfind(":delete ", 0) == 0) {
            if (!eng.delete_handle(line.substr(8))) std::cerr << "unknown handle\n";
        } else if (!line.empty() && line[0] == ':') {
            std::cerr << "directives: :load FILE | :trace on|off | :show H | :delete H | :quit\n";
        } else if (!line.empty()) {
            try {
                quanta::Outcome o = session.eval_line(line);
                print_outcome(o, trace);
            } catch (const quanta::QuantaError& e) {
                std::cerr << e.what() << "\n";
            }
        }
        std::cout << "> " << std::flush;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quanta - an infon normalization engine"};
    app.require_subcommand(1);

    std::string file;
    std::vector<std::string> preludes;
    bool trace = false;
    uint64_t budget = 1000000;

    CLI::App* run = app.add_subcommand("run", "evaluate a source file");
    run->add_option("file", file, "source file")->required();
    run->add_flag("--trace", trace, "print rewrite trace to stderr");
    run->add_option("--budget", budget, "rewrite step budget");
    run->add_option("--prelude", preludes, "file evaluated before the program");

    CLI::App* rp = app.add_subcommand("repl", "interactive session");
    rp->add_flag("--trace", trace, "print rewrite trace to stderr");
    rp->add_option("--budget", budget, "rewrite step budget");
    rp->add_option("--prelude", preludes, "file evaluated before the session");

    CLI::App* ps = app.add_subcommand("parse", "parse a file and print its canonical form");
    ps->add_option("file", file, "source file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed()) return run_file(file, preludes, trace, budget);
    if (ps->parsed()) return parse_file(file);
    return repl(preludes, trace, budget);
}
