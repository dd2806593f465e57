// Acceptance gate: eight numbered checks, one PASS/FAIL line each on stdout,
// details on stderr, exit status = number of failing checks.
#include <gmp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "quanta/engine.hpp"
#include "quanta/format_model.hpp"
#include "quanta/measure.hpp"
#include "quanta/normalize.hpp"
#include "quanta/parser.hpp"
#include "quanta/printer.hpp"
#include "quanta/trace.hpp"
#include "support.hpp"

using namespace quanta;

namespace {

constexpr double kGoldenTimeLimit = 1.0;  // seconds per corpus program
constexpr int kArithCases = 10000;
constexpr int kFormatCases = 1000;
constexpr int kQueryCases = 1000;
constexpr int kCommandCases = 200;

int g_failures = 0;

void report(int n, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << n << " " << what << "\n";
    if (!ok) ++g_failures;
}

void detail(const std::string& line) { std::cerr << "  - " << line << "\n"; }

std::vector<std::filesystem::path> corpus_programs() {
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(QUANTA_CORPUS_DIR))
        if (e.path().extension() == ".qta") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// --- big-integer oracle -------------------------------------------------------

struct Z {
    mpz_t v;
    Z() { mpz_init(v); }
    explicit Z(long n) { mpz_init_set_si(v, n); }
    Z(const Z& o) { mpz_init_set(v, o.v); }
    Z& operator=(const Z& o) {
        mpz_set(v, o.v);
        return *this;
    }
    ~Z() { mpz_clear(v); }
    std::string str() const {
        char* s = mpz_get_str(nullptr, 10, v);
        std::string r(s);
        free(s);
        return r;
    }
};

struct GenExpr {
    std::string text;
    Z val;
};

GenExpr gen_leaf(std::mt19937_64& rng, long lo, long hi) {
    std::uniform_int_distribution<long> d(lo, hi);
    long n = d(rng);
    return {std::to_string(n), Z(n)};
}

GenExpr gen_arith(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> branch(0, 9);
    if (depth <= 0 || branch(rng) < 2) return gen_leaf(rng, 0, 1000000);
    GenExpr l = gen_arith(rng, depth - 1);
    GenExpr r = gen_arith(rng, depth - 1);
    std::uniform_int_distribution<int> pick(0, 3);
    int op = pick(rng);
    if (op == 3 && mpz_sgn(r.val.v) == 0) r = gen_leaf(rng, 1, 1000000);
    GenExpr out;
    switch (op) {
        case 0:
            mpz_add(out.val.v, l.val.v, r.val.v);
            out.text = "(" + l.text + " + " + r.text + ")";
            break;
        case 1:
            mpz_sub(out.val.v, l.val.v, r.val.v);
            out.text = "(" + l.text + " - " + r.text + ")";
            break;
        case 2:
            mpz_mul(out.val.v, l.val.v, r.val.v);
            out.text = "(" + l.text + " * " + r.text + ")";
            break;
        default:
            mpz_tdiv_q(out.val.v, l.val.v, r.val.v);
            out.text = "(" + l.text + " / " + r.text + ")";
            break;
    }
    return out;
}

// --- 1: corpus goldens --------------------------------------------------------

bool spot_checks(std::string& why) {
    // The zero shortcut decides 7*0 without arithmetic.
    {
        EngineOptions opt;
        opt.use_autonames = false;
        opt.trace = true;
        Outcome o = testsup::run_program("7 * 0;", opt);
        if (serialize(o.value) != "0") {
            why = "7*0 with operations disabled gave " + serialize(o.value);
            return false;
        }
        bool via_shortcut = false;
        for (const auto& t : o.trace)
            if (t.rule == "zero-product") via_shortcut = true;
        if (!via_shortcut) {
            why = "7*0 did not use the zero-product shortcut";
            return false;
        }
    }
    // 3+2 reorders once, sums once, and never loops.
    {
        EngineOptions opt;
        opt.trace = true;
        Outcome o = testsup::run_program("3 + 2;", opt);
        std::vector<std::string> rules;
        for (const auto& t : o.trace)
            if (!t.is_note()) rules.push_back(t.rule);
        if (serialize(o.value) != "5" || rules != std::vector<std::string>{"operand-order", "sum"}) {
            why = "3+2 rewrote as " + serialize(o.value) + " through " +
                  std::to_string(rules.size()) + " rule firings";
            return false;
        }
    }
    // The conditional stream model reads the fourth stream item as b.
    {
        Engine eng;
        Context* c = eng.world().make_child("accept");
        eng.eval_source(*c, testsup::slurp(std::string(QUANTA_CORPUS_DIR) + "/format_models.qta"));
        InfonPtr m = eng.eval_source(*c, "<SeqFormat>;").value;
        Evaluator ev(eng, eng.options());
        FormatModel fm(ev, *c, m->children[0]);
        size_t off = 0;
        ParsedRecord rec = fm.parse("HEADA5abcde", off);
        if (rec.elements.size() != 7 || render_text(rec.elements[3]) != "b" ||
            fm.serialize(rec) != "HEADA5abcde") {
            why = "HEADA5abcde did not parse to the expected stream";
            return false;
        }
    }
    return true;
}

void criterion_goldens() {
    auto files = corpus_programs();
    int bad = 0;
    for (const auto& f : files) {
        std::string golden_path = f.string();
        golden_path.replace(golden_path.size() - 4, 4, ".golden");
        std::string want = testsup::slurp(golden_path);
        auto t0 = std::chrono::steady_clock::now();
        std::string got;
        try {
            got = testsup::batch_stdout(testsup::run_program(testsup::slurp(f.string())));
        } catch (const QuantaError& e) {
            got = std::string("error: ") + e.what();
        }
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (got != want) {
            ++bad;
            detail(f.filename().string() + " diverged from its golden output");
        } else if (dt >= kGoldenTimeLimit) {
            ++bad;
            detail(f.filename().string() + " took " + std::to_string(dt) + "s");
        }
    }
    std::string why;
    if (!spot_checks(why)) {
        ++bad;
        detail(why);
    }
    report(1, bad == 0 && !files.empty(),
           "corpus programs replay byte-exact under " + std::to_string(kGoldenTimeLimit) +
               "s (" + std::to_string(files.size()) + " programs)");
}

// --- 2: arithmetic vs oracle --------------------------------------------------

void criterion_arith() {
    std::mt19937_64 rng(20260815);
    Engine eng;
    Context* c = eng.world().make_child("arith");
    int divergences = 0;
    for (int i = 0; i < kArithCases; ++i) {
        GenExpr g = gen_arith(rng, 6);
        std::string got;
        try {
            got = serialize(eng.eval_infon(*c, parse_expression(g.text).root).value);
        } catch (const QuantaError& e) {
            got = std::string("error: ") + e.what();
        }
        if (got != g.val.str()) {
            if (++divergences <= 3) detail(g.text + " = " + got + ", oracle " + g.val.str());
        }
    }
    report(2, divergences == 0,
           "random closed arithmetic agrees with the big-integer oracle (" +
               std::to_string(kArithCases) + " cases, depth <= 6)");
}

// --- 3: idempotence and seed independence -------------------------------------

void criterion_idempotent() {
    int bad = 0;
    for (const auto& f : corpus_programs()) {
        std::string src = testsup::slurp(f.string());
        Engine eng;
        Context* c = eng.world().make_child("norm");
        Outcome o1;
        try {
            o1 = eng.eval_source(*c, src);
            Outcome o2 = eng.eval_infon(*c, o1.value);
            if (!structural_equal(o1.value, o2.value)) {
                ++bad;
                detail(f.filename().string() + " is not a normalization fixed point");
                continue;
            }
        } catch (const QuantaError& e) {
            ++bad;
            detail(f.filename().string() + " re-normalization failed: " + e.what());
            continue;
        }
        std::string base_form = serialize(o1.value);
        std::string base_console = o1.effects.console;
        for (uint64_t seed = 1; seed <= 5; ++seed) {
            EngineOptions opt;
            opt.random_seed = seed;
            Outcome os = testsup::run_program(src, opt);
            if (serialize(os.value) != base_form || os.effects.console != base_console) {
                ++bad;
                detail(f.filename().string() + " differs under rewrite-site seed " +
                       std::to_string(seed));
                break;
            }
        }
    }
    report(3, bad == 0,
           "normalization is a fixed point and independent of rewrite-site order "
           "(every corpus program, 5 seeds)");
}

// --- 4: sequence properties ----------------------------------------------------

std::string join_ints(const std::vector<long>& vs) {
    std::string s;
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(vs[i]);
    }
    return s;
}

void criterion_sequences() {
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> len(1, 100);
    std::uniform_int_distribution<long> val(-1000, 1000);
    int bad = 0;

    for (int trial = 0; trial < 30 && bad == 0; ++trial) {
        int n = len(rng);
        std::vector<long> vs;
        std::string src = "<ints> $: <S>;";
        for (int i = 0; i < n; ++i) {
            vs.push_back(val(rng));
            src += " <S> == " + std::to_string(vs.back()) + ";";
        }
        Engine eng;
        Context* c = eng.world().make_child("seq");
        eng.eval_source(*c, src);

        auto ask = [&](const std::string& q) { return serialize(eng.eval_source(*c, q).value); };
        if (ask("<S$.size>;") != std::to_string(n)) {
            ++bad;
            detail("size disagreed on a " + std::to_string(n) + "-element sequence");
        }
        if (ask("<S$.first>;") != std::to_string(vs.front()) ||
            ask("<S$.last>;") != std::to_string(vs.back())) {
            ++bad;
            detail("first/last disagreed");
        }
        for (int k = 0; k < 3; ++k) {
            size_t i = std::uniform_int_distribution<size_t>(0, vs.size() - 1)(rng);
            if (ask("<S." + std::to_string(i) + ">;") != std::to_string(vs[i])) {
                ++bad;
                detail("indexed read " + std::to_string(i) + " disagreed");
                break;
            }
        }

        // The linked store itself: bidirectional adjacency and index order.
        Binding* b = c->find("S");
        if (!b || !b->is_sequence()) {
            ++bad;
            detail("sequence binding missing");
            continue;
        }
        SequenceStore& st = *b->seq;
        if (st.size() != static_cast<size_t>(n) || !st.first() || !st.last() ||
            st.at(n) != nullptr) {
            ++bad;
            detail("store size or bounds disagreed");
            continue;
        }
        size_t walked = 0;
        for (SeqNode* p = st.first(); p; p = p->next) {
            if (p->index != walked || render_text(p->value) != std::to_string(vs[walked]) ||
                (p->next && p->next->prev != p) || (!p->next && p != st.last())) {
                ++bad;
                detail("linkage broke at node " + std::to_string(walked));
                break;
            }
            ++walked;
        }
        if (bad == 0 && walked != static_cast<size_t>(n)) {
            ++bad;
            detail("forward walk visited " + std::to_string(walked) + " of " + std::to_string(n));
        }
    }

    // Interleaving appends to unrelated sequences never changes either view.
    std::uniform_int_distribution<int> small(1, 20);
    for (int trial = 0; trial < 20 && bad == 0; ++trial) {
        std::vector<long> as, bs;
        int na = small(rng), nb = small(rng);
        for (int i = 0; i < na; ++i) as.push_back(val(rng));
        for (int i = 0; i < nb; ++i) bs.push_back(val(rng));

        std::string mixed = "<ints> $: <A>; <ints> $: <B>;";
        size_t ia = 0, ib = 0;
        while (ia < as.size() || ib < bs.size()) {
            bool take_a = ib >= bs.size() ||
                          (ia < as.size() && std::uniform_int_distribution<int>(0, 1)(rng) == 0);
            if (take_a)
                mixed += " <A> == " + std::to_string(as[ia++]) + ";";
            else
                mixed += " <B> == " + std::to_string(bs[ib++]) + ";";
        }
        std::string split = "<ints> $: <A>; <ints> $: <B>;";
        for (long v : as) split += " <A> == " + std::to_string(v) + ";";
        for (long v : bs) split += " <B> == " + std::to_string(v) + ";";

        for (const std::string* prog : {&mixed, &split}) {
            Engine eng;
            Context* c = eng.world().make_child("mix");
            eng.eval_source(*c, *prog);
            std::string va = serialize(eng.eval_source(*c, "<A$>;").value);
            std::string vb = serialize(eng.eval_source(*c, "<B$>;").value);
            std::string wa = "${" + join_ints(as) + "}";
            std::string wb = "${" + join_ints(bs) + "}";
            if (va != wa || vb != wb) {
                ++bad;
                detail("interleaving changed a sequence view");
                break;
            }
        }
    }

    // Both declaration spellings mean the same sequence.
    if (bad == 0) {
        std::string a = testsup::norm("$<ints> : <i> == 4; <i> == 5; <i$>;");
        std::string b = testsup::norm("<ints> $: <i> == 4; <i> == 5; <i$>;");
        if (a != b) {
            ++bad;
            detail("the two declaration spellings disagreed");
        }
    }

    report(4, bad == 0,
           "sequence linkage, views, and interleaving invariants hold "
           "(sequences up to 100 elements)");
}

// --- 5: format round trips ------------------------------------------------------

void criterion_formats() {
    Engine eng;
    Context* c = eng.world().make_child("fmt");
    eng.eval_source(*c, testsup::slurp(std::string(QUANTA_CORPUS_DIR) + "/format_models.qta"));
    Evaluator ev(eng, eng.options());
    FormatModel plain(ev, *c, eng.eval_source(*c, "<charArrays>;").value->children[0]);
    FormatModel tagged(ev, *c, eng.eval_source(*c, "<SeqFormat>;").value->children[0]);

    std::mt19937_64 rng(555);
    std::uniform_int_distribution<int> len(0, 20);
    std::uniform_int_distribution<int> letter(0, 25);
    std::uniform_int_distribution<int> tag(0, 3);
    int bad = 0;
    for (int i = 0; i < kFormatCases && bad == 0; ++i) {
        bool use_tagged = (i % 2) == 0;
        std::string bytes;
        if (use_tagged) {
            bytes = "HEAD";
            if (tag(rng) == 0) {
                int n = len(rng);
                bytes += 'A';
                bytes += std::to_string(n);
                for (int k = 0; k < n; ++k) bytes += static_cast<char>('a' + letter(rng));
            } else {
                bytes += static_cast<char>('B' + letter(rng) % 25);
            }
        } else {
            int n = len(rng);
            bytes = std::to_string(n);
            for (int k = 0; k < n; ++k) bytes += static_cast<char>('a' + letter(rng));
        }
        FormatModel& fm = use_tagged ? tagged : plain;

        size_t off = 0;
        ParsedRecord rec;
        try {
            rec = fm.parse(bytes, off);
        } catch (const QuantaError& e) {
            ++bad;
            detail("'" + bytes + "' failed to parse: " + e.what());
            break;
        }
        if (off != bytes.size() || fm.serialize(rec) != bytes) {
            ++bad;
            detail("'" + bytes + "' did not re-serialize to itself");
            break;
        }
        size_t off2 = 0;
        ParsedRecord back = fm.parse(fm.serialize(rec), off2);
        bool same = back.elements.size() == rec.elements.size() &&
                    back.field_order == rec.field_order;
        for (size_t k = 0; same && k < rec.elements.size(); ++k)
            same = structural_equal(back.elements[k], rec.elements[k]);
        for (const auto& [k, v] : rec.fields)
            same = same && back.fields.count(k) && structural_equal(back.fields.at(k), v);
        if (!same) {
            ++bad;
            detail("'" + bytes + "' lost structure across the round trip");
        }
    }
    report(5, bad == 0,
           "format-model instances round-trip bit-exactly both ways (" +
               std::to_string(kFormatCases) + " cases)");
}

// --- 6: command coherence --------------------------------------------------------

void criterion_commands() {
    std::mt19937_64 rng(606);
    std::uniform_int_distribution<long> val(-100000, 100000);
    int bad = 0;

    for (int i = 0; i < kCommandCases && bad == 0; ++i) {
        long v = val(rng);
        const bool alloc = (i % 2) == 0;
        std::string src =
            alloc ? "<ints> : <N> == " + std::to_string(v) + "; (<N> == " + std::to_string(v) +
                        ")?;"
                  : "<ints> $: <N>; (<N> == " + std::to_string(v) + ")!; (<N> == " +
                        std::to_string(v) + ")?;";
        Outcome o = testsup::run_program(src);
        InfonPtr last = o.value->children.back();
        if (!is_bool(last) || !last->bval) {
            ++bad;
            detail("a realized value did not answer its own query: " + src);
        }
    }

    // The multiplication table command reproduces the oracle table exactly.
    if (bad == 0) {
        std::string table;
        for (int x = 0; x <= 10; ++x) {
            for (int y = 0; y <= 10; ++y) table += std::to_string(x * y) + " ";
            table += "\n";
        }
        Outcome o = testsup::run_program(
            testsup::slurp(std::string(QUANTA_CORPUS_DIR) + "/mult_table.qta"));
        if (o.effects.console != table) {
            ++bad;
            detail("the multiplication table diverged from the oracle");
        }
    }

    // Calling a stored counting action twice appends the run twice.
    if (bad == 0) {
        Engine eng;
        Context* c = eng.world().make_child("count");
        eng.eval_source(*c,
                        "<ints> $: <B>;"
                        "<CountB> == @$for $v : 1..10 :: (<B> == %v)!;"
                        "<CountB>; <CountB>;");
        std::vector<long> twice;
        for (int r = 0; r < 2; ++r)
            for (long v = 1; v <= 10; ++v) twice.push_back(v);
        if (serialize(eng.eval_source(*c, "<B$>;").value) != "${" + join_ints(twice) + "}" ||
            serialize(eng.eval_source(*c, "<B$.size>;").value) != "20") {
            ++bad;
            detail("two counting runs did not append 1..10 twice");
        }
    }

    // A bound adapter serves the written value back and surfaces refusals.
    if (bad == 0) {
        Engine eng;
        Context* c = eng.world().make_child("svc");
        InfonPtr cell;
        bool refuse = false;
        ExternalAdapter ad;
        ad.read = [&](const std::vector<InfonPtr>&) -> std::optional<InfonPtr> {
            if (!cell) return std::nullopt;
            return cell;
        };
        ad.write = [&](const std::vector<InfonPtr>& vs) {
            if (refuse) return false;
            cell = vs.at(0);
            return true;
        };
        eng.add_adapter("Store", ad);
        eng.bind_adapter(*c, "Val", "Store");
        eng.eval_source(*c, "(<Val> == 7)!;");
        bool ok = cell && render_text(cell) == "7" &&
                  serialize(eng.eval_source(*c, "(<Val> == 7)?;").value) == "true" &&
                  !eng.eval_source(*c, "(<Val> == 7)!;").effects.external.empty();
        refuse = true;
        bool refused = false;
        try {
            eng.eval_source(*c, "(<Val> == 8)!;");
        } catch (const QuantaError& e) {
            refused = e.code() == ErrorCode::Effect;
        }
        if (!ok || !refused) {
            ++bad;
            detail("adapter-backed commands did not cohere with queries");
        }
    }

    report(6, bad == 0,
           "realized commands cohere with queries, tables, counts, and adapters (" +
               std::to_string(kCommandCases) + " random realizations)");
}

// --- 7: closed queries decide -----------------------------------------------------

void criterion_queries() {
    std::mt19937_64 rng(707);
    std::uniform_int_distribution<int> shape(0, 4);
    std::uniform_int_distribution<long> small(0, 150);
    int bad = 0;
    for (int i = 0; i < kQueryCases; ++i) {
        std::string q;
        switch (shape(rng)) {
            case 0: {
                GenExpr a = gen_arith(rng, 3), b = gen_arith(rng, 3);
                q = "(" + a.text + " == " + b.text + ")?;";
                break;
            }
            case 1: {
                long lo = small(rng), hi = lo + small(rng);
                q = "(" + std::to_string(lo) + ".." + std::to_string(hi) + " : " +
                    std::to_string(small(rng)) + ")?;";
                break;
            }
            case 2: {
                q = "({" + std::to_string(small(rng)) + ", " + std::to_string(small(rng)) +
                    ", " + std::to_string(small(rng)) + "} : " + std::to_string(small(rng)) +
                    ")?;";
                break;
            }
            case 3: {
                const char* ops[] = {"gt", "lt", "ge", "le", "eq"};
                q = std::string(ops[small(rng) % 5]) + "(" + std::to_string(small(rng)) + ", " +
                    std::to_string(small(rng)) + ")?;";
                break;
            }
            default: {
                GenExpr a = gen_arith(rng, 2);
                q = "(" + a.text + " == " + a.val.str() + ")?;";
                break;
            }
        }
        try {
            Outcome o = testsup::run_program(q);
            if (!is_bool(o.value)) {
                ++bad;
                if (bad <= 3) detail(q + " decided to " + serialize(o.value));
            }
        } catch (const QuantaError& e) {
            ++bad;
            if (bad <= 3) detail(q + " raised: " + e.what());
        }
    }
    report(7, bad == 0,
           "closed queries always decide to a boolean (" + std::to_string(kQueryCases) +
               " cases)");
}

// --- 8: information measure --------------------------------------------------------

void criterion_measure() {
    Engine eng;
    Context* c = eng.world().make_child("bits");
    Evaluator ev(eng, eng.options());
    int bad = 0;

    if (info_bits(ev, *c, empty_collection()) != BigInt(0)) {
        ++bad;
        detail("the empty collection is not zero bits");
    }
    eng.eval_source(*c, "<bools> : <W1>; 0..255 : <W8>; 0..65535 : <W16>;");
    struct {
        const char* name;
        long bits;
    } widths[] = {{"W1", 1}, {"W8", 8}, {"W16", 16}};
    for (const auto& w : widths)
        if (info_bits(ev, *c, mk_name1(w.name)) != BigInt(w.bits)) {
            ++bad;
            detail(std::string(w.name) + " did not measure " + std::to_string(w.bits) + " bits");
        }

    std::mt19937_64 rng(808);
    std::uniform_int_distribution<int> width(0, 6);
    std::vector<std::string> names;
    for (int i = 0; i < 16; ++i) {
        std::string nm = "R" + std::to_string(i);
        eng.eval_source(*c, "0.." + std::to_string((1L << width(rng)) - 1) + " : <" + nm + ">;");
        names.push_back(nm);
    }
    for (int trial = 0; trial < 20 && bad == 0; ++trial) {
        std::shuffle(names.begin(), names.end(), rng);
        size_t cut = std::uniform_int_distribution<size_t>(0, names.size())(rng);
        InfonList left, right, all;
        for (size_t i = 0; i < names.size(); ++i) {
            (i < cut ? left : right).push_back(mk_name1(names[i]));
            all.push_back(mk_name1(names[i]));
        }
        auto bl = info_bits(ev, *c, mk_collection(std::move(left)));
        auto br = info_bits(ev, *c, mk_collection(std::move(right)));
        auto ba = info_bits(ev, *c, mk_collection(std::move(all)));
        if (!bl || !br || !ba || *ba != *bl + *br) {
            ++bad;
            detail("bits failed to add across a disjoint partition");
        }
    }
    report(8, bad == 0,
           "information measures are exact for 2^b-state systems and additive "
           "(b in {1, 8, 16}, 20 partitions)");
}

}  // namespace

int main() {
    criterion_goldens();
    criterion_arith();
    criterion_idempotent();
    criterion_sequences();
    criterion_formats();
    criterion_commands();
    criterion_queries();
    criterion_measure();
    return g_failures;
}
