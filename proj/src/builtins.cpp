#include <string>

#include "quanta/engine.hpp"
#include "quanta/error.hpp"
#include "quanta/normalize.hpp"
#include "quanta/printer.hpp"

namespace quanta {

namespace {

// Arguments reach handlers in written form; resolve bound words and names
// before deciding whether the operation is specific enough to fire.
InfonPtr arg_value(Evaluator& ev, Context& ctx, const InfonPtr& a, Mode mode) {
    Mode m = mode == Mode::Command ? Mode::Command : Mode::Query;
    return ev.normalize_value(ctx, a, m);
}

void add_arith(Engine& eng, const std::string& name,
               BigInt (*op)(const BigInt&, const BigInt&)) {
    Autoname a;
    a.name = name;
    a.effect = Autoname::Effect::Pure;
    a.handler = [op, name](Evaluator& ev, Context& ctx, const std::vector<InfonPtr>& args,
                           Mode mode, bool) -> std::optional<InfonPtr> {
        if (args.size() != 2) return std::nullopt;
        InfonPtr x = arg_value(ev, ctx, args[0], mode);
        InfonPtr y = arg_value(ev, ctx, args[1], mode);
        if (!is_int(x) || !is_int(y)) return std::nullopt;
        if (name == "quotient" && y->ival == BigInt(0))
            throw QuantaError(ErrorCode::DivisionByZero, "quotient by zero");
        return mk_int(op(x->ival, y->ival));
    };
    eng.add_autoname(std::move(a));
}

void add_compare(Engine& eng, const std::string& name, bool (*op)(int)) {
    Autoname a;
    a.name = name;
    a.effect = Autoname::Effect::Pure;
    a.handler = [op](Evaluator& ev, Context& ctx, const std::vector<InfonPtr>& args, Mode mode,
                     bool) -> std::optional<InfonPtr> {
        if (args.size() != 2) return std::nullopt;
        InfonPtr x = arg_value(ev, ctx, args[0], mode);
        InfonPtr y = arg_value(ev, ctx, args[1], mode);
        if (!is_int(x) || !is_int(y)) return std::nullopt;
        int c = x->ival < y->ival ? -1 : x->ival == y->ival ? 0 : 1;
        return mk_bool(op(c));
    };
    eng.add_autoname(std::move(a));
}

void add_console(Engine& eng, const std::string& name, bool newline) {
    Autoname a;
    a.name = name;
    a.effect = Autoname::Effect::Console;
    a.handler = [newline](Evaluator& ev, Context& ctx, const std::vector<InfonPtr>& args,
                          Mode mode, bool effects_ok) -> std::optional<InfonPtr> {
        if (mode != Mode::Command && !effects_ok) return std::nullopt;
        std::string text;
        for (const auto& arg : args) text += render_text(arg_value(ev, ctx, arg, mode));
        if (newline) text += "\n";
        ev.effects.console += text;
        return empty_collection();
    };
    eng.add_autoname(std::move(a));
}

}  // namespace

void install_builtins(Engine& eng) {
    for (const char* cls : {"ints", "numbers", "strings", "chars", "bools"}) {
        Binding& b = eng.world().ensure_local(segment_key(mk_string(cls)));
        b.declared = true;
        b.value = mk_builtin_class(cls);
    }

    add_arith(eng, "sum", [](const BigInt& a, const BigInt& b) { return a + b; });
    add_arith(eng, "difference", [](const BigInt& a, const BigInt& b) { return a - b; });
    add_arith(eng, "product", [](const BigInt& a, const BigInt& b) { return a * b; });
    add_arith(eng, "quotient", [](const BigInt& a, const BigInt& b) { return a / b; });

    add_compare(eng, "gt", [](int c) { return c > 0; });
    add_compare(eng, "lt", [](int c) { return c < 0; });
    add_compare(eng, "ge", [](int c) { return c >= 0; });
    add_compare(eng, "le", [](int c) { return c <= 0; });

    Autoname eq;
    eq.name = "eq";
    eq.effect = Autoname::Effect::Pure;
    eq.handler = [](Evaluator& ev, Context& ctx, const std::vector<InfonPtr>& args, Mode mode,
                    bool) -> std::optional<InfonPtr> {
        if (args.size() != 2) return std::nullopt;
        InfonPtr x = arg_value(ev, ctx, args[0], mode);
        InfonPtr y = arg_value(ev, ctx, args[1], mode);
        if (!is_closed(x) || !is_closed(y)) return std::nullopt;
        return mk_bool(structural_equal(x, y));
    };
    eng.add_autoname(std::move(eq));

    add_console(eng, "write", false);
    add_console(eng, "print", false);
    add_console(eng, "writeln", true);

    eng.register_prelude_rule("for x : <numbers> :: %x * 0 == 0;", "zero-product",
                              Rule::Lane::Shortcut);
    eng.register_prelude_rule("for x : <numbers>, y : <numbers> :: %x + %y == %y + %x;",
                              "operand-order", Rule::Lane::Canonical);
}

}  // namespace quanta
