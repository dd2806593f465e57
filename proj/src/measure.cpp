#include "quanta/measure.hpp"

#include <set>

#include "quanta/context.hpp"
#include "quanta/printer.hpp"

namespace quanta {

namespace {

InfonPtr as_name_form(const InfonPtr& v) {
    if (v->kind == Kind::Name) return v;
    if (v->kind == Kind::String && bare_word_ok(v->text)) return mk_name1(v->text);
    return nullptr;
}

// The class a declared name ranges over: its binding's declaration if any,
// otherwise the most recent containment fact naming it.
InfonPtr declared_class_of(Context& ctx, const InfonPtr& name) {
    std::string key = path_key(name->children, name->children.size());
    if (Binding* b = ctx.find(key)) {
        if (b->declared_class) return b->declared_class;
        if (b->is_sequence()) return b->seq->element_class();
    }
    std::vector<const Fact*> facts;
    ctx.visible_facts(facts);
    for (const Fact* f : facts)
        if ((f->rel == Fact::Rel::Contain || f->rel == Fact::Rel::SeqContain) &&
            structural_equal(f->rhs, name))
            return f->lhs;
    return nullptr;
}

// Asserting <X> == <Y> leaves X bound to the name Y; follow such chains so
// both spellings count as one source.
InfonPtr chase_binding(Context& ctx, InfonPtr v) {
    for (int hop = 0; hop < 32; ++hop) {
        InfonPtr n = as_name_form(v);
        if (!n) return v;
        std::string key = path_key(n->children, n->children.size());
        Binding* b = ctx.find(key);
        if (!b || !b->value || !as_name_form(b->value)) return v;
        v = b->value;
    }
    return v;
}

// Two members are one information source when an identity chain links them.
bool identity_linked(Context& ctx, const InfonPtr& a, const InfonPtr& b) {
    if (structural_equal(chase_binding(ctx, a), chase_binding(ctx, b))) return true;
    std::vector<const Fact*> facts;
    ctx.visible_facts(facts);
    InfonList reach{a};
    for (size_t i = 0; i < reach.size() && i < 32; ++i) {
        if (structural_equal(reach[i], b)) return true;
        for (const Fact* f : facts) {
            if (f->rel != Fact::Rel::Identity) continue;
            InfonPtr other;
            if (structural_equal(f->lhs, reach[i]))
                other = f->rhs;
            else if (structural_equal(f->rhs, reach[i]))
                other = f->lhs;
            if (!other) continue;
            bool seen = false;
            for (const auto& r : reach)
                if (structural_equal(r, other)) seen = true;
            if (!seen && reach.size() < 32) reach.push_back(other);
        }
    }
    return false;
}

}  // namespace

std::optional<BigInt> log2_exact(const BigInt& states) {
    if (states <= BigInt(0)) return std::nullopt;
    BigInt s = states;
    BigInt bits(0);
    while (s % BigInt(2) == BigInt(0)) {
        s = s / BigInt(2);
        bits = bits + BigInt(1);
    }
    if (s == BigInt(1)) return bits;
    return std::nullopt;
}

std::optional<BigInt> info_bits(Evaluator& ev, Context& ctx, const InfonPtr& v) {
    if (is_empty_collection(v)) return BigInt(0);
    if (is_bool(v)) return BigInt(1);

    if (InfonPtr name = as_name_form(v)) {
        InfonPtr cls = declared_class_of(ctx, name);
        if (!cls) return std::nullopt;
        auto states = ev.class_state_count(ctx, cls);
        if (!states) return std::nullopt;
        return log2_exact(*states);
    }

    if (v->kind == Kind::Collection) {
        // Identity-linked members describe one source; count each source once.
        InfonList reps;
        for (const auto& m : v->children) {
            bool dup = false;
            for (const auto& r : reps)
                if (identity_linked(ctx, r, m)) dup = true;
            if (!dup) reps.push_back(m);
        }
        BigInt total(0);
        for (const auto& r : reps) {
            auto b = info_bits(ev, ctx, r);
            if (!b) return std::nullopt;
            total = total + *b;
        }
        return total;
    }

    return std::nullopt;
}

}  // namespace quanta
