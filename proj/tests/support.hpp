#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "quanta/engine.hpp"
#include "quanta/error.hpp"
#include "quanta/normalize.hpp"
#include "quanta/parser.hpp"
#include "quanta/printer.hpp"

namespace testsup {

using namespace quanta;

// Evaluates a whole program in a fresh engine; returns the outcome.
inline Outcome run_program(const std::string& src, EngineOptions opt = {}) {
    Engine eng(opt);
    Context* c = eng.world().make_child("test");
    return eng.eval_source(*c, src);
}

// Normal form of a program, canonically serialized.
inline std::string norm(const std::string& src, EngineOptions opt = {}) {
    return serialize(run_program(src, opt).value);
}

// Error code thrown by a program, or nullopt when it succeeds.
inline std::optional<ErrorCode> fails_with(const std::string& src, EngineOptions opt = {}) {
    try {
        run_program(src, opt);
        return std::nullopt;
    } catch (const QuantaError& e) {
        return e.code();
    }
}

// What the CLI prints to stdout for one program: console effects, the
// handle line, then the canonical form.
inline std::string batch_stdout(const Outcome& o) {
    std::string s = o.effects.console;
    if (!s.empty() && s.back() != '\n') s += '\n';
    s += o.handle + "\n";
    s += serialize(o.value) + "\n";
    return s;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testsup
