#include "quanta/normalize.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "quanta/error.hpp"
#include "quanta/parser.hpp"
#include "quanta/printer.hpp"

namespace quanta {

namespace {

struct PathGuard {
    std::vector<int>& p;
    PathGuard(std::vector<int>& path, int i) : p(path) { p.push_back(i); }
    ~PathGuard() { p.pop_back(); }
};

bool is_word_seg(const InfonPtr& s) { return s && s->kind == Kind::String; }

bool has_free_vars(const InfonPtr& n) {
    std::vector<std::string> vs;
    collect_free_vars(n, vs);
    return !vs.empty();
}

// Bare words act as one-segment names wherever a name would be legal.
InfonPtr as_name(const InfonPtr& x) {
    if (!x) return nullptr;
    if (x->kind == Kind::Name) return x;
    if (x->kind == Kind::String && bare_word_ok(x->text)) return mk_name1(x->text);
    return nullptr;
}

bool stmt_like(const InfonPtr& m) {
    switch (m->kind) {
        case Kind::Identity:
        case Kind::PartialId:
        case Kind::Contain:
        case Kind::SeqContain:
        case Kind::For:
        case Kind::Command:
        case Kind::Conditional:
            return true;
        default:
            return false;
    }
}

bool contains_command(const InfonPtr& n) {
    if (n->kind == Kind::Command) return true;
    for (const auto& c : n->children)
        if (contains_command(c)) return true;
    return false;
}

// A match pattern with declaration members describes object structure.
bool has_declarations(const InfonPtr& pattern) {
    if (pattern->kind == Kind::Contain || pattern->kind == Kind::SeqContain) return true;
    if (pattern->kind != Kind::Collection) return false;
    for (const auto& m : pattern->children)
        if (m->kind == Kind::Contain || m->kind == Kind::SeqContain) return true;
    return false;
}

bool reserved_seq_word(const std::string& w) {
    return w == "first" || w == "last" || w == "size" || w == "next" || w == "prev" ||
           w == "value";
}

std::string name_text(const InfonPtr& name) { return serialize(name); }

}  // namespace

// --- rules -------------------------------------------------------------------

bool rule_is_order_sensitive(const Rule& r) {
    auto lh = call_head(r.lhs);
    auto rh = call_head(r.rhs);
    if (!lh || !rh || *lh != *rh) return false;
    InfonList la = call_args(r.lhs), ra = call_args(r.rhs);
    if (la.size() != ra.size() || la.size() < 2) return false;
    if (structural_equal(r.lhs, r.rhs)) return false;
    InfonList ls = la, rs = ra;
    std::sort(ls.begin(), ls.end(), canonical_less);
    std::sort(rs.begin(), rs.end(), canonical_less);
    for (size_t i = 0; i < ls.size(); ++i)
        if (!structural_equal(ls[i], rs[i])) return false;
    return true;
}

std::vector<Rule> rules_from_for(const InfonPtr& f, Rule::Lane lane) {
    if (f->kind != Kind::For) throw QuantaError(ErrorCode::Type, "expected a 'for' rule");
    std::vector<RuleVar> vars;
    size_t nv = f->for_vars.size();
    for (size_t i = 0; i < nv; ++i)
        vars.push_back(RuleVar{f->for_vars[i].token, f->for_vars[i].ordered, f->children[i]});
    InfonPtr body = f->children.back();
    InfonList parts = body->kind == Kind::Collection ? body->children : InfonList{body};
    std::vector<Rule> out;
    for (const auto& part : parts) {
        if (part->kind == Kind::Identity) {
            for (size_t i = 0; i + 1 < part->children.size(); ++i) {
                Rule r;
                r.display = serialize(part->children[i]);
                r.vars = vars;
                r.lhs = part->children[i];
                r.rhs = part->children[i + 1];
                r.lane = lane;
                out.push_back(std::move(r));
            }
        } else if (part->kind == Kind::PartialId) {
            Rule r;
            r.display = serialize(part->children[0]);
            r.vars = vars;
            r.lhs = part->children[0];
            r.rhs = part->children[1];
            r.lane = lane;
            out.push_back(std::move(r));
        } else {
            throw QuantaError(ErrorCode::Type, "rule body must be an identity");
        }
    }
    return out;
}

// --- evaluator basics --------------------------------------------------------

Evaluator::Evaluator(Engine& eng, const EngineOptions& opt) : eng_(eng), opt_(opt) {
    if (opt_.random_seed) {
        rng_.seed(*opt_.random_seed);
        random_mode_ = true;
    }
}

void Evaluator::bump(const std::string& rule) {
    if (probing_) return;
    if (++steps_ > opt_.step_budget) {
        std::string tail;
        size_t n = recent_rules_.size();
        for (size_t i = n > 3 ? n - 3 : 0; i < n; ++i) {
            if (!tail.empty()) tail += ", ";
            tail += recent_rules_[i];
        }
        throw QuantaError(ErrorCode::Divergence,
                          "no normal form within " + std::to_string(opt_.step_budget) +
                              " steps; last rules applied: " + (tail.empty() ? rule : tail));
    }
    recent_rules_.push_back(rule);
    if (recent_rules_.size() > 8) recent_rules_.erase(recent_rules_.begin());
}

void Evaluator::note(const std::string& text) {
    if (probing_ || trace_mute_ || !opt_.trace) return;
    TraceEntry e;
    e.rule = "note";
    e.path = path_;
    e.text = text;
    trace.push_back(std::move(e));
}

void Evaluator::record(const std::string& rule, const InfonPtr& before, const InfonPtr& after) {
    if (probing_ || trace_mute_ || !opt_.trace) return;
    TraceEntry e;
    e.rule = rule;
    e.path = path_;
    e.before = before;
    e.after = after;
    trace.push_back(std::move(e));
}

// --- membership / enumeration ------------------------------------------------

std::optional<std::vector<InfonPtr>> Evaluator::members_of(Context& ctx, const InfonPtr& v) {
    switch (v->kind) {
        case Kind::Collection: {
            std::vector<InfonPtr> out;
            for (const auto& m : v->children) {
                if (m->flatten) {
                    auto inner = members_of(ctx, m);
                    if (!inner) return std::nullopt;
                    out.insert(out.end(), inner->begin(), inner->end());
                } else {
                    out.push_back(m);
                }
            }
            return out;
        }
        case Kind::Array:
            return v->children;
        case Kind::String: {
            std::vector<InfonPtr> out;
            for (char c : v->text) out.push_back(mk_string(std::string(1, c)));
            return out;
        }
        case Kind::IntRange: {
            if (!is_int(v->children[0]) || !is_int(v->children[1])) return std::nullopt;
            BigInt lo = v->children[0]->ival, hi = v->children[1]->ival;
            bool descending = v->seq_flag && lo > hi;
            BigInt a = lo <= hi ? lo : hi, b = lo <= hi ? hi : lo;
            BigInt count = b - a + BigInt(1);
            if (!count.fits_int64() || count.to_int64() > 100000) return std::nullopt;
            std::vector<InfonPtr> out;
            for (BigInt x = a; x <= b; x = x + BigInt(1)) out.push_back(mk_int(x));
            if (descending) std::reverse(out.begin(), out.end());
            return out;
        }
        default:
            return std::nullopt;
    }
}

bool Evaluator::class_subset(Context& ctx, const InfonPtr& sub, const InfonPtr& super,
                             int depth) {
    if (depth > 4) return false;
    if (structural_equal(sub, super)) return true;
    auto resolve_cls = [&](const InfonPtr& c) -> InfonPtr {
        InfonPtr n = as_name(c);
        if (!n) return c;
        if (auto r = resolve_name(ctx, n, Mode::Query)) return *r;
        return c;
    };
    InfonPtr a = resolve_cls(sub), b = resolve_cls(super);
    if (structural_equal(a, b)) return true;
    if (b->kind == Kind::BuiltinClass) {
        const std::string& bn = b->text;
        if (a->kind == Kind::BuiltinClass) {
            if (a->text == "ints" && bn == "numbers") return true;
            if (a->text == "chars" && bn == "strings") return true;
            return a->text == bn;
        }
        if (a->kind == Kind::IntRange && (bn == "ints" || bn == "numbers"))
            return is_int(a->children[0]) && is_int(a->children[1]);
        return false;
    }
    if (a->kind == Kind::Collection && !a->open_ended) {
        for (const auto& m : a->children)
            if (is_member(ctx, super, m) != Tri::True) return false;
        return !a->children.empty();
    }
    return false;
}

Tri Evaluator::is_member(Context& ctx, const InfonPtr& cls, const InfonPtr& item) {
    if (!cls) return Tri::True;

    // Closure over asserted identities of the item.
    std::vector<const Fact*> facts;
    ctx.visible_facts(facts);
    InfonList items{item};
    for (size_t pass = 0; pass < 4; ++pass) {
        bool grew = false;
        for (const Fact* f : facts) {
            if (f->rel != Fact::Rel::Identity) continue;
            for (const auto& it : InfonList(items)) {
                auto push = [&](const InfonPtr& v) {
                    for (const auto& e : items)
                        if (structural_equal(e, v)) return;
                    if (items.size() < 16) {
                        items.push_back(v);
                        grew = true;
                    }
                };
                if (structural_equal(f->lhs, it)) push(f->rhs);
                if (structural_equal(f->rhs, it)) push(f->lhs);
            }
        }
        if (!grew) break;
    }

    // Containment facts, expanding through partial identities of the class.
    InfonList classes{cls};
    std::set<std::string> seen{serialize(cls)};
    for (size_t qi = 0; qi < classes.size() && qi < 16; ++qi) {
        InfonPtr c = classes[qi];
        for (const Fact* f : facts) {
            if (f->rel == Fact::Rel::Contain || f->rel == Fact::Rel::SeqContain) {
                bool item_hit = false;
                for (const auto& it : items)
                    if (structural_equal(f->rhs, it)) item_hit = true;
                if (item_hit && (structural_equal(f->lhs, c) || class_subset(ctx, f->lhs, c)))
                    return Tri::True;
            }
            if (f->rel == Fact::Rel::Partial && structural_equal(f->lhs, c)) {
                std::string key = serialize(f->rhs);
                if (seen.insert(key).second) classes.push_back(f->rhs);
            }
        }
    }

    // Resolved class logic.
    InfonPtr clsv = cls;
    if (InfonPtr n = as_name(cls)) {
        auto r = resolve_name(ctx, n, Mode::Query);
        if (!r) return Tri::Unknown;
        clsv = *r;
    }
    switch (clsv->kind) {
        case Kind::BuiltinClass: {
            const std::string& bn = clsv->text;
            bool closed = is_closed(item);
            if (bn == "ints" || bn == "numbers")
                return is_int(item) ? Tri::True : closed ? Tri::False : Tri::Unknown;
            if (bn == "strings")
                return is_string(item) ? Tri::True : closed ? Tri::False : Tri::Unknown;
            if (bn == "chars") {
                if (is_string(item)) return item->text.size() == 1 ? Tri::True : Tri::False;
                return closed ? Tri::False : Tri::Unknown;
            }
            if (bn == "bools")
                return is_bool(item) ? Tri::True : closed ? Tri::False : Tri::Unknown;
            return Tri::Unknown;
        }
        case Kind::IntRange: {
            InfonPtr lo = normalize_value(ctx, clsv->children[0], Mode::Query);
            InfonPtr hi = normalize_value(ctx, clsv->children[1], Mode::Query);
            if (!is_int(lo) || !is_int(hi)) return Tri::Unknown;
            if (!is_int(item)) return is_closed(item) ? Tri::False : Tri::Unknown;
            BigInt a = lo->ival, b = hi->ival;
            if (b < a) std::swap(a, b);
            return item->ival >= a && item->ival <= b ? Tri::True : Tri::False;
        }
        case Kind::Collection: {
            for (const auto& m : clsv->children)
                for (const auto& it : items)
                    if (structural_equal(m, it)) return Tri::True;
            return clsv->open_ended ? Tri::Unknown
                                    : is_closed(item) ? Tri::False : Tri::Unknown;
        }
        case Kind::SeqClass: {
            if (item->kind != Kind::Collection)
                return is_closed(item) ? Tri::False : Tri::Unknown;
            Tri acc = Tri::True;
            for (const auto& e : item->children) {
                Tri t = is_member(ctx, clsv->children[0], e);
                if (t == Tri::False) return Tri::False;
                if (t == Tri::Unknown) acc = Tri::Unknown;
            }
            return acc;
        }
        case Kind::Match: {
            if (!is_closed(item) && item->kind != Kind::Collection) return Tri::Unknown;
            return describes(ctx, clsv->children[0], item) ? Tri::True : Tri::Unknown;
        }
        case Kind::Difference: {
            Tri a = is_member(ctx, clsv->children[0], item);
            Tri b = is_member(ctx, clsv->children[1], item);
            if (a == Tri::False || b == Tri::True) return Tri::False;
            if (a == Tri::True && b == Tri::False) return Tri::True;
            return Tri::Unknown;
        }
        case Kind::Intersection: {
            auto ms = members_of(ctx, normalize_value(ctx, clsv->children[0], Mode::Query));
            if (!ms) return Tri::Unknown;
            Tri acc = Tri::True;
            for (const auto& c : *ms) {
                Tri t = is_member(ctx, c, item);
                if (t == Tri::False) return Tri::False;
                if (t == Tri::Unknown) acc = Tri::Unknown;
            }
            return acc;
        }
        case Kind::Complement: {
            Tri t = is_member(ctx, clsv->children[0], item);
            if (t == Tri::True) return Tri::False;
            if (t == Tri::False) return Tri::True;
            return Tri::Unknown;
        }
        default:
            return Tri::Unknown;
    }
}

bool Evaluator::describes(Context& ctx, const InfonPtr& pattern, const InfonPtr& item) {
    auto field_of = [&](const std::string& w) -> InfonPtr {
        if (item->kind != Kind::Collection) return nullptr;
        if (item->ctx_id) {
            if (Context* oc = eng_.context_by_id(item->ctx_id)) {
                if (Binding* b = oc->find_local(segment_key(mk_string(w)))) {
                    if (b->value) return b->value;
                    if (b->seq && !b->seq->empty()) return b->seq->cursor()->value;
                }
            }
        }
        for (const auto& m : item->children) {
            if (m->kind != Kind::Identity) continue;
            auto nm = as_name(m->children[0]);
            if (!nm) continue;
            auto word = simple_name_word(nm);
            if (word && *word == w) return m->children[1];
        }
        return nullptr;
    };

    InfonList reqs = pattern->kind == Kind::Collection ? pattern->children : InfonList{pattern};
    for (const auto& req : reqs) {
        if (req->kind == Kind::Identity) {
            auto nm = as_name(req->children[0]);
            auto word = nm ? simple_name_word(nm) : std::nullopt;
            if (!word) return false;
            InfonPtr fv = field_of(*word);
            if (!fv || !structural_equal(fv, req->children[1])) return false;
            continue;
        }
        if (req->kind == Kind::Contain || req->kind == Kind::SeqContain) {
            if (req->children.size() < 2) return false;
            const InfonPtr& cls = req->children[0];
            const InfonPtr& it = req->children[1];
            if (it->kind == Kind::Identity) {
                auto nm = as_name(it->children[0]);
                auto word = nm ? simple_name_word(nm) : std::nullopt;
                if (!word) return false;
                InfonPtr fv = field_of(*word);
                if (!fv || !structural_equal(fv, it->children[1])) return false;
                if (is_member(ctx, cls, fv) == Tri::False) return false;
                continue;
            }
            auto nm = as_name(it);
            auto word = nm ? simple_name_word(nm) : std::nullopt;
            if (!word) return false;
            InfonPtr fv = field_of(*word);
            if (!fv) return false;
            if (is_member(ctx, cls, fv) == Tri::False) return false;
            continue;
        }
        return false;
    }
    return true;
}

std::optional<BigInt> Evaluator::class_state_count(Context& ctx, const InfonPtr& cls) {
    InfonPtr clsv = cls;
    if (InfonPtr n = as_name(cls)) {
        auto r = resolve_name(ctx, n, Mode::Query);
        if (!r) return std::nullopt;
        clsv = *r;
    }
    switch (clsv->kind) {
        case Kind::BuiltinClass:
            if (clsv->text == "bools") return BigInt(2);
            return std::nullopt;
        case Kind::IntRange: {
            InfonPtr lo = normalize_value(ctx, clsv->children[0], Mode::Query);
            InfonPtr hi = normalize_value(ctx, clsv->children[1], Mode::Query);
            if (!is_int(lo) || !is_int(hi)) return std::nullopt;
            BigInt a = lo->ival, b = hi->ival;
            if (b < a) std::swap(a, b);
            return b - a + BigInt(1);
        }
        case Kind::Collection: {
            if (clsv->open_ended) return std::nullopt;
            std::set<std::string> distinct;
            for (const auto& m : clsv->children) distinct.insert(serialize(m));
            return BigInt(static_cast<long long>(distinct.size()));
        }
        default:
            return std::nullopt;
    }
}

// --- pattern matching --------------------------------------------------------

bool Evaluator::match_pattern(Context& ctx, const InfonPtr& pat, const InfonPtr& subj,
                              std::map<std::string, InfonPtr>& binds,
                              const std::map<std::string, InfonPtr>& guards) {
    if (pat->kind == Kind::Var) {
        auto it = binds.find(pat->text);
        if (it != binds.end()) return structural_equal(it->second, subj);
        auto g = guards.find(pat->text);
        if (g != guards.end() && g->second) {
            Tri t = is_member(ctx, g->second, subj);
            if (t == Tri::Unknown)
                note("guard pending: " + pat->text + " in " + serialize(g->second));
            if (t != Tri::True) return false;
        }
        binds[pat->text] = subj;
        return true;
    }
    if (pat->kind != subj->kind) return false;
    if (pat->seq_flag != subj->seq_flag || pat->flatten != subj->flatten ||
        pat->open_ended != subj->open_ended)
        return false;
    switch (pat->kind) {
        case Kind::Int:
            if (pat->ival != subj->ival) return false;
            break;
        case Kind::Bool:
            if (pat->bval != subj->bval) return false;
            break;
        case Kind::String:
        case Kind::BuiltinClass:
            if (pat->text != subj->text) return false;
            break;
        case Kind::Template:
            if (pat->tpl_text != subj->tpl_text) return false;
            break;
        case Kind::For: {
            if (pat->for_vars.size() != subj->for_vars.size()) return false;
            for (size_t i = 0; i < pat->for_vars.size(); ++i)
                if (pat->for_vars[i].token != subj->for_vars[i].token ||
                    pat->for_vars[i].ordered != subj->for_vars[i].ordered)
                    return false;
            break;
        }
        default:
            break;
    }
    if (pat->children.size() != subj->children.size()) return false;
    for (size_t i = 0; i < pat->children.size(); ++i)
        if (!match_pattern(ctx, pat->children[i], subj->children[i], binds, guards))
            return false;
    return true;
}

InfonPtr Evaluator::substitute(const InfonPtr& body, const std::map<std::string, InfonPtr>& binds) {
    if (binds.empty()) return body;
    if (body->kind == Kind::Var) {
        auto it = binds.find(body->text);
        if (it == binds.end()) return body;
        InfonPtr v = it->second;
        if (body->seq_flag || body->flatten)
            v = with_flags(v, v->seq_flag || body->seq_flag, v->flatten || body->flatten);
        return v;
    }
    if (body->kind == Kind::For) {
        // Loop variables shadow outer bindings inside the loop body.
        std::map<std::string, InfonPtr> inner = binds;
        for (const auto& fv : body->for_vars) inner.erase(fv.token);
        InfonList kids = body->children;
        bool changed = false;
        size_t nv = body->for_vars.size();
        for (size_t i = 0; i < kids.size(); ++i) {
            InfonPtr r = substitute(kids[i], i < nv ? binds : inner);
            if (r != kids[i]) changed = true;
            kids[i] = r;
        }
        return changed ? with_children(body, std::move(kids)) : body;
    }
    InfonList kids = body->children;
    bool changed = false;
    for (auto& k : kids) {
        InfonPtr r = substitute(k, binds);
        if (r != k) changed = true;
        k = r;
    }
    return changed ? with_children(body, std::move(kids)) : body;
}

// --- rule driver -------------------------------------------------------------

std::optional<InfonPtr> Evaluator::try_autoname(Context& ctx, const InfonPtr& site, Mode mode,
                                                bool effects_ok) {
    if (!opt_.use_autonames) return std::nullopt;
    auto head = call_head(site);
    if (!head) return std::nullopt;
    const Autoname* a = eng_.find_autoname(*head);
    if (!a) return std::nullopt;
    auto r = a->handler(*this, ctx, call_args(site), mode, effects_ok);
    if (!r) return std::nullopt;
    bump(*head);
    record(*head, site, *r);
    return r;
}

std::optional<InfonPtr> Evaluator::try_rules(Context& ctx, const InfonPtr& site, Mode mode,
                                             bool effects_ok) {
    std::vector<const Rule*> rules;
    ctx.visible_rules(rules);

    InfonList args = call_args(site);
    bool sorted =
        args.size() < 2 || std::is_sorted(args.begin(), args.end(), canonical_less);

    auto apply = [&](const Rule& r, bool reversed) -> std::optional<InfonPtr> {
        const InfonPtr& pl = reversed ? r.rhs : r.lhs;
        const InfonPtr& pr = reversed ? r.lhs : r.rhs;
        std::map<std::string, InfonPtr> binds;
        std::map<std::string, InfonPtr> guards;
        for (const auto& v : r.vars) guards[v.token] = v.range;
        if (!match_pattern(ctx, pl, site, binds, guards)) return std::nullopt;
        InfonPtr out = substitute(pr, binds);
        bump(r.display);
        record(r.display, site, out);
        return out;
    };

    if (!sorted)
        for (const Rule* r : rules)
            if (rule_is_order_sensitive(*r))
                if (auto res = apply(*r, false)) return res;

    if (auto res = try_autoname(ctx, site, mode, effects_ok)) return res;

    for (const Rule* r : rules)
        if ((r->lane == Rule::Lane::Shortcut || r->lane == Rule::Lane::Canonical) &&
            !rule_is_order_sensitive(*r))
            if (auto res = apply(*r, false)) return res;

    for (const Rule* r : rules)
        if (r->lane == Rule::Lane::Axiom && !rule_is_order_sensitive(*r))
            if (auto res = apply(*r, opt_.reverse_axioms)) return res;

    return std::nullopt;
}

// --- name resolution ---------------------------------------------------------

struct Evaluator::SeqView {
    SequenceStore* store = nullptr;
    std::vector<InfonPtr> items;  // snapshot for value sequences / strings
    InfonPtr whole;
    bool text = false;  // whole is a string (slices re-join to strings)

    size_t size() const { return store ? store->size() : items.size(); }
    InfonPtr at(size_t i) const { return store ? store->at(i)->value : items[i]; }
};

InfonPtr Evaluator::normalize_name_segments(Context& ctx, const InfonPtr& name, Mode mode) {
    InfonList segs = name->children;
    bool changed = false;
    for (size_t i = 0; i < segs.size(); ++i) {
        const InfonPtr& s = segs[i];
        if (s->kind == Kind::String || s->kind == Kind::Var || s->kind == Kind::Int) continue;
        PathGuard g(path_, static_cast<int>(i));
        InfonPtr ns = normalize_value(ctx, s, mode);
        if (ns == s) continue;
        if (s->seq_flag && !ns->seq_flag) ns = with_flags(ns, true, ns->flatten);
        segs[i] = ns;
        changed = true;
    }
    return changed ? with_children(name, std::move(segs)) : name;
}

std::optional<InfonPtr> Evaluator::resolve_name(Context& ctx, const InfonPtr& name, Mode mode,
                                                Context** owner) {
    const InfonList& segs = name->children;
    if (segs.empty()) return std::nullopt;
    for (const auto& s : segs)
        if (s->kind == Kind::Var || has_free_vars(s)) return std::nullopt;

    // Innermost scope wins; within a scope the longest bound prefix wins.
    Binding* b = nullptr;
    Context* own = nullptr;
    size_t plen = 0;
    for (Context* c = &ctx; c && !b; c = c->parent()) {
        for (size_t len = segs.size(); len >= 1; --len) {
            if (Binding* cand = c->find_local(path_key(segs, len))) {
                b = cand;
                own = c;
                plen = len;
                break;
            }
        }
    }
    if (!b) return std::nullopt;
    if (owner) *owner = own;

    // Walk state: exactly one of val / view / node-position is active.
    enum class Tag { Value, Whole, Node };
    Tag tag;
    InfonPtr val;
    SeqView view;
    SeqNode* node = nullptr;
    long long vidx = -1;

    size_t next_seg = plen;
    bool flagged = segs[plen - 1]->seq_flag;
    if (b->is_sequence()) {
        view.store = b->seq.get();
        if (flagged || next_seg < segs.size()) {
            tag = Tag::Whole;
        } else {
            if (b->seq->empty()) {
                last_resolve_uninit_ = true;
                return std::nullopt;
            }
            tag = Tag::Value;
            val = b->seq->cursor()->value;
        }
    } else if (!b->adapter.empty()) {
        if (mode == Mode::Assert) return std::nullopt;  // deferred until queried
        ExternalAdapter* ad = eng_.find_adapter(b->adapter);
        if (!ad || !ad->read)
            throw QuantaError(ErrorCode::Effect, "no adapter behind " + name_text(name));
        effects.external.push_back("read " + path_key(segs, plen));
        auto rv = ad->read({});
        if (!rv) return std::nullopt;
        tag = Tag::Value;
        val = *rv;
    } else if (b->value) {
        tag = Tag::Value;
        val = b->value;
    } else {
        return std::nullopt;  // declared, not yet bound
    }

    auto make_view = [&](const InfonPtr& v) -> bool {
        view = SeqView{};
        if (v->kind == Kind::Collection) {
            view.items = v->children;
            view.whole = v;
            return true;
        }
        if (v->kind == Kind::String) {
            for (char ch : v->text) view.items.push_back(mk_string(std::string(1, ch)));
            view.whole = v;
            view.text = true;
            return true;
        }
        if (v->kind == Kind::Array) {
            view.items = v->children;
            view.whole = v;
            return true;
        }
        return false;
    };

    auto node_count = [&]() -> long long {
        return static_cast<long long>(view.size());
    };
    auto deref_node = [&]() -> InfonPtr {
        return view.store ? node->value : view.items[static_cast<size_t>(vidx)];
    };

    // Returns false when the reference stays symbolic (no error).
    std::function<bool(const InfonPtr&)> walk = [&](const InfonPtr& seg) -> bool {
        if (tag == Tag::Node) {
            if (is_word_seg(seg)) {
                const std::string& w = seg->text;
                if (w == "next" || w == "prev") {
                    bool fwd = w == "next";
                    if (view.store) {
                        SeqNode* n2 = fwd ? node->next : node->prev;
                        if (!n2) {
                            tag = Tag::Value;
                            val = empty_collection();
                            return true;
                        }
                        node = n2;
                        return true;
                    }
                    long long n2 = vidx + (fwd ? 1 : -1);
                    if (n2 < 0 || n2 >= node_count()) {
                        tag = Tag::Value;
                        val = empty_collection();
                        return true;
                    }
                    vidx = n2;
                    return true;
                }
                if (w == "value") {
                    tag = Tag::Value;
                    val = deref_node();
                    return true;
                }
            }
            // Any other selector applies to the node's value.
            tag = Tag::Value;
            val = deref_node();
            // fall through to value handling below
        }
        if (tag == Tag::Whole) {
            if (is_word_seg(seg)) {
                const std::string& w = seg->text;
                if (w == "size") {
                    tag = Tag::Value;
                    val = mk_int(static_cast<long long>(view.size()));
                    return true;
                }
                if (w == "first" || w == "last") {
                    if (view.size() == 0) {
                        tag = Tag::Value;
                        val = empty_collection();
                        return true;
                    }
                    tag = Tag::Node;
                    if (view.store)
                        node = w == "first" ? view.store->first() : view.store->last();
                    else
                        vidx = w == "first" ? 0 : node_count() - 1;
                    return true;
                }
                if (view.store) {
                    if (const InfonPtr* fv = view.store->field(w)) {
                        tag = Tag::Value;
                        val = *fv;
                        return true;
                    }
                    throw QuantaError(ErrorCode::MissingField,
                                      "sequence has no field '" + w + "'");
                }
                return false;
            }
            if (is_int(seg)) {
                if (!seg->ival.fits_int64())
                    throw QuantaError(ErrorCode::OutOfBounds, "index out of range");
                long long n = seg->ival.to_int64();
                if (n < 0 || n >= node_count())
                    throw QuantaError(ErrorCode::OutOfBounds,
                                      "index " + seg->ival.str() + " outside sequence of " +
                                          std::to_string(view.size()));
                tag = Tag::Node;
                if (view.store)
                    node = view.store->at(static_cast<size_t>(n));
                else
                    vidx = n;
                return true;
            }
            if (seg->kind == Kind::Array && seg->children.size() == 2 &&
                is_int(seg->children[0]) && is_int(seg->children[1])) {
                long long start = seg->children[0]->ival.fits_int64()
                                      ? seg->children[0]->ival.to_int64()
                                      : -1;
                long long cnt = seg->children[1]->ival.fits_int64()
                                    ? seg->children[1]->ival.to_int64()
                                    : -1;
                if (start < 0 || cnt < 0 || start + cnt > node_count())
                    throw QuantaError(ErrorCode::OutOfBounds, "subrange outside sequence");
                tag = Tag::Value;
                if (view.store) {
                    val = view.store->slice(static_cast<size_t>(start),
                                            static_cast<size_t>(cnt));
                } else if (view.text) {
                    val = mk_string(view.whole->text.substr(static_cast<size_t>(start),
                                                            static_cast<size_t>(cnt)));
                } else {
                    InfonList part(view.items.begin() + start,
                                   view.items.begin() + start + cnt);
                    val = mk_collection(std::move(part), true);
                }
                return true;
            }
            return false;
        }
        // Tag::Value
        if (val->kind == Kind::Collection && val->ctx_id) {
            if (Context* oc = eng_.context_by_id(val->ctx_id)) {
                if (is_word_seg(seg) && !reserved_seq_word(seg->text)) {
                    if (Binding* ob = oc->find_local(segment_key(seg))) {
                        if (owner) *owner = oc;
                        if (ob->is_sequence()) {
                            view = SeqView{};
                            view.store = ob->seq.get();
                            if (seg->seq_flag) {
                                tag = Tag::Whole;
                                return true;
                            }
                            if (ob->seq->empty()) {
                                last_resolve_uninit_ = true;
                                return false;
                            }
                            val = ob->seq->cursor()->value;
                            return true;
                        }
                        if (ob->value) {
                            val = ob->value;
                            return true;
                        }
                        return false;
                    }
                }
            }
        }
        if (is_word_seg(seg) &&
            (seg->text == "first" || seg->text == "last" || seg->text == "size")) {
            if (make_view(val)) {
                tag = Tag::Whole;
                return walk(seg);
            }
            return false;
        }
        if (is_int(seg) || (seg->kind == Kind::Array && seg->children.size() == 2)) {
            if (make_view(val)) {
                tag = Tag::Whole;
                return walk(seg);
            }
            return false;
        }
        if (is_word_seg(seg) && val->kind == Kind::Collection) {
            for (const auto& m : val->children) {
                if (m->kind != Kind::Identity) continue;
                auto nm = as_name(m->children[0]);
                auto word = nm ? simple_name_word(nm) : std::nullopt;
                if (word && *word == seg->text) {
                    val = m->children[1];
                    return true;
                }
            }
            return false;
        }
        return false;
    };

    for (; next_seg < segs.size(); ++next_seg) {
        if (tag == Tag::Value && (!val)) return std::nullopt;
        if (!walk(segs[next_seg])) return std::nullopt;
    }

    switch (tag) {
        case Tag::Value:
            return val;
        case Tag::Node:
            return deref_node();
        case Tag::Whole:
            if (view.store) return view.store->snapshot();
            return view.whole;
    }
    return std::nullopt;
}

std::optional<InfonPtr> Evaluator::resolve_bare_word(Context& ctx, const InfonPtr& s, Mode mode) {
    if (!bare_word_ok(s->text)) return std::nullopt;
    InfonPtr name = mk_name1(s->text);
    Context* owner = nullptr;
    auto r = resolve_name(ctx, name, mode, &owner);
    if (!r) return std::nullopt;
    bump(s->text);
    record(serialize(name), s, *r);
    return normalize_value(ctx, *r, mode);
}

// --- normalization -----------------------------------------------------------

InfonPtr Evaluator::normalize_children(Context& ctx, const InfonPtr& v, Mode mode) {
    InfonList kids = v->children;
    bool changed = false;
    for (size_t i = 0; i < kids.size(); ++i) {
        PathGuard g(path_, static_cast<int>(i));
        InfonPtr r = normalize_value(ctx, kids[i], mode);
        if (r != kids[i]) changed = true;
        kids[i] = r;
    }
    return changed ? with_children(v, std::move(kids)) : v;
}

InfonPtr Evaluator::normalize_value(Context& ctx, const InfonPtr& v, Mode mode) {
    switch (v->kind) {
        case Kind::Int:
        case Kind::Bool:
        case Kind::BuiltinClass:
        case Kind::Var:
        case Kind::Match:
            return v;
        case Kind::String: {
            if (auto r = resolve_bare_word(ctx, v, mode)) return *r;
            if (auto rr = try_rules(ctx, v, mode, false))
                return normalize_value(ctx, *rr, mode);
            return v;
        }
        case Kind::Name:
            if (random_mode_) return normalize_expr_random(ctx, v, mode);
            return normalize_name(ctx, v, mode, false);
        case Kind::Array:
        case Kind::IntRange:
        case Kind::SeqClass: {
            InfonPtr r = normalize_children(ctx, v, mode);
            if (auto rr = try_rules(ctx, r, mode, false))
                return normalize_value(ctx, *rr, mode);
            return r;
        }
        case Kind::Collection:
            return eval_block(ctx, v, mode, false);
        case Kind::Identity:
        case Kind::PartialId:
        case Kind::Contain:
        case Kind::SeqContain:
            return eval_statement(ctx, v, mode);
        case Kind::For: {
            if (auto r = expand_for_value(ctx, v, mode)) return *r;
            return v;
        }
        case Kind::Conditional:
            return eval_conditional(ctx, v, mode, false);
        case Kind::BoolQuery:
            return eval_bool_query(ctx, v->children[0]);
        case Kind::Command:
            return execute_command(ctx, v);
        case Kind::Template:
            return expand_template(ctx, v, mode);
        case Kind::Difference:
        case Kind::Intersection:
        case Kind::Complement:
            return eval_set_op(ctx, v, mode);
    }
    return v;
}

InfonPtr Evaluator::normalize_name(Context& ctx, const InfonPtr& name, Mode mode, bool effects_ok,
                                   bool stmt_pos) {
    InfonPtr name2 = normalize_name_segments(ctx, name, mode);
    for (const auto& s : name2->children)
        if (s->kind == Kind::Var || has_free_vars(s)) return name2;

    Context* owner = nullptr;
    last_resolve_uninit_ = false;
    if (auto r = resolve_name(ctx, name2, mode, &owner)) {
        if (stmt_pos && (*r)->kind == Kind::Match && contains_command((*r)->children[0])) {
            bump(name_text(name2));
            note("instantiating " + name_text(name2));
            run_action(*owner, *r);
            return *r;
        }
        bump(name_text(name2));
        record(name_text(name2), name2, *r);
        return normalize_value(ctx, *r, mode);
    }
    bool uninit = last_resolve_uninit_;
    if (auto rr = try_rules(ctx, name2, mode, effects_ok)) return normalize_value(ctx, *rr, mode);
    if (uninit)
        throw QuantaError(ErrorCode::UninitializedSequence,
                          "reading " + name_text(name2) + " before any element was written");
    return name2;
}

InfonPtr Evaluator::expand_template(Context& ctx, const InfonPtr& t, Mode mode, int depth) {
    if (depth > 16)
        throw QuantaError(ErrorCode::Divergence, "template expansion exceeds depth limit");
    InfonList spans = t->children;
    bool changed = false;
    std::string out = t->tpl_text.empty() ? "" : t->tpl_text[0];
    for (size_t i = 0; i < spans.size(); ++i) {
        PathGuard g(path_, static_cast<int>(i));
        InfonPtr sv = normalize_value(ctx, spans[i], mode);
        if (sv != spans[i]) changed = true;
        spans[i] = sv;
        out += render_text(sv);
        out += t->tpl_text[i + 1];
    }
    InfonPtr t2 = changed ? with_children(t, InfonList(spans)) : t;

    // A produced string that itself contains well-formed spans expands again.
    std::string final_text = out;
    if (out.find('%') != std::string::npos) {
        std::vector<std::string> texts;
        InfonList codes;
        std::string cur;
        bool ok = true;
        for (size_t i = 0; i < out.size();) {
            if (out[i] != '%') {
                cur.push_back(out[i++]);
                continue;
            }
            size_t j = out.find('%', i + 1);
            if (j == std::string::npos) {
                ok = false;
                break;
            }
            std::string code = out.substr(i + 1, j - i - 1);
            try {
                ParseResult pr = parse_expression(code);
                texts.push_back(cur);
                cur.clear();
                codes.push_back(pr.root);
            } catch (const QuantaError&) {
                ok = false;
                break;
            }
            i = j + 1;
        }
        if (ok && !codes.empty()) {
            texts.push_back(cur);
            InfonPtr t3 = mk_template(std::move(texts), std::move(codes));
            ++trace_mute_;
            InfonPtr r = expand_template(ctx, t3, mode, depth + 1);
            --trace_mute_;
            final_text = is_string(r) ? r->text : render_text(r);
        }
    }
    bump("template");
    record("template", t2, mk_string(final_text));
    return mk_string(final_text);
}

InfonPtr Evaluator::eval_set_op(Context& ctx, const InfonPtr& v, Mode mode) {
    InfonPtr r = normalize_children(ctx, v, mode);
    switch (v->kind) {
        case Kind::Difference: {
            auto a = members_of(ctx, r->children[0]);
            auto b = members_of(ctx, r->children[1]);
            if (!a || !b || r->children[0]->open_ended) return r;
            InfonList out;
            for (const auto& m : *a) {
                bool drop = false;
                for (const auto& n : *b)
                    if (structural_equal(m, n)) drop = true;
                if (!drop) out.push_back(m);
            }
            InfonPtr res = mk_collection(std::move(out));
            bump("difference");
            record("difference", r, res);
            return res;
        }
        case Kind::Intersection: {
            auto cc = members_of(ctx, r->children[0]);
            if (!cc) return r;
            std::vector<std::vector<InfonPtr>> sets;
            for (const auto& c : *cc) {
                auto ms = members_of(ctx, c);
                if (!ms || c->open_ended) return r;
                sets.push_back(*ms);
            }
            InfonList out;
            if (!sets.empty()) {
                for (const auto& m : sets[0]) {
                    bool in_all = true;
                    for (size_t i = 1; i < sets.size() && in_all; ++i) {
                        bool found = false;
                        for (const auto& n : sets[i])
                            if (structural_equal(m, n)) found = true;
                        in_all = found;
                    }
                    bool dup = false;
                    for (const auto& o : out)
                        if (structural_equal(o, m)) dup = true;
                    if (in_all && !dup) out.push_back(m);
                }
            }
            InfonPtr res = mk_collection(std::move(out));
            bump("intersection");
            record("intersection", r, res);
            return res;
        }
        default:
            return r;  // complement stays intensional
    }
}

std::optional<InfonPtr> Evaluator::expand_for_value(Context& ctx, const InfonPtr& f, Mode mode) {
    size_t nv = f->for_vars.size();
    std::vector<std::vector<InfonPtr>> lists;
    for (size_t i = 0; i < nv; ++i) {
        InfonPtr range = normalize_value(ctx, f->children[i], mode);
        auto ms = members_of(ctx, range);
        if (!ms) return std::nullopt;
        lists.push_back(*ms);
    }
    size_t total = 1;
    for (const auto& l : lists) {
        total *= l.size();
        if (total > 100000)
            throw QuantaError(ErrorCode::Budget, "loop expansion above safety cap");
    }
    InfonList out;
    std::map<std::string, InfonPtr> binds;
    std::function<void(size_t)> rec = [&](size_t d) {
        if (d == nv) {
            bump("for");
            InfonPtr inst = substitute(f->children.back(), binds);
            out.push_back(normalize_value(ctx, inst, mode));
            return;
        }
        for (const auto& m : lists[d]) {
            binds[f->for_vars[d].token] = m;
            rec(d + 1);
        }
        binds.erase(f->for_vars[d].token);
    };
    rec(0);
    return mk_collection(std::move(out), f->seq_flag);
}

// --- randomized site selection -----------------------------------------------

void Evaluator::collect_sites(Context& ctx, const InfonPtr& v, Mode mode, std::vector<int>& path,
                              std::vector<std::vector<int>>& out) {
    switch (v->kind) {
        case Kind::Name:
        case Kind::Array:
        case Kind::IntRange:
            break;
        case Kind::Collection: {
            for (const auto& m : v->children)
                if (stmt_like(m)) return;  // statement blocks keep fixed order
            break;
        }
        default:
            return;
    }
    for (size_t i = 0; i < v->children.size(); ++i) {
        path.push_back(static_cast<int>(i));
        collect_sites(ctx, v->children[i], mode, path, out);
        path.pop_back();
    }
    if (v->kind == Kind::Name) {
        for (const auto& s : v->children)
            if (s->kind == Kind::Var || has_free_vars(s)) return;
        probing_ = true;
        bool fires = false;
        try {
            if (resolve_name(ctx, v, mode)) fires = true;
            if (!fires && try_rules(ctx, v, mode, false)) fires = true;
        } catch (const QuantaError&) {
            fires = false;
        }
        probing_ = false;
        if (fires) out.push_back(path);
    }
}

std::optional<InfonPtr> Evaluator::one_step(Context& ctx, const InfonPtr& site, Mode mode) {
    if (site->kind == Kind::Name) {
        if (auto r = resolve_name(ctx, site, mode)) {
            bump(name_text(site));
            record(name_text(site), site, *r);
            return r;
        }
    }
    return try_rules(ctx, site, mode, false);
}

InfonPtr Evaluator::normalize_expr_random(Context& ctx, const InfonPtr& input, Mode mode) {
    InfonPtr v = input;
    for (;;) {
        std::vector<std::vector<int>> sites;
        std::vector<int> p;
        collect_sites(ctx, v, mode, p, sites);
        if (sites.empty()) break;
        const auto& pick = sites[rng_() % sites.size()];
        InfonPtr site = subtree_at(v, pick);
        std::vector<int> saved = path_;
        path_ = pick;
        auto r = one_step(ctx, site, mode);
        path_ = saved;
        if (!r) break;
        v = replace_at(v, pick, *r);
    }
    // Finish leftovers (symbolic cleanup) with the deterministic strategy.
    random_mode_ = false;
    InfonPtr out = normalize_value(ctx, v, mode);
    random_mode_ = true;
    return out;
}

// --- queries -----------------------------------------------------------------

bool Evaluator::query_equal(Context& ctx, const InfonPtr& a, const InfonPtr& b) {
    if (structural_equal(a, b)) return true;
    std::vector<const Fact*> facts;
    ctx.visible_facts(facts);
    for (const Fact* f : facts) {
        if (f->rel != Fact::Rel::Identity && f->rel != Fact::Rel::Partial) continue;
        if ((structural_equal(f->lhs, a) && structural_equal(f->rhs, b)) ||
            (structural_equal(f->lhs, b) && structural_equal(f->rhs, a)))
            return true;
    }
    return false;
}

bool Evaluator::query_truth(Context& ctx, const InfonPtr& q) {
    switch (q->kind) {
        case Kind::Bool:
            return q->bval;
        case Kind::BoolQuery:
            return query_truth(ctx, q->children[0]);
        case Kind::Command:
            return query_truth(ctx, q->children[0]);
        case Kind::Identity: {
            InfonList terms;
            for (const auto& t : q->children) terms.push_back(normalize_value(ctx, t, Mode::Query));
            for (size_t i = 0; i + 1 < terms.size(); ++i)
                if (!query_equal(ctx, terms[i], terms[i + 1])) return false;
            return true;
        }
        case Kind::PartialId: {
            std::vector<const Fact*> facts;
            ctx.visible_facts(facts);
            for (const Fact* f : facts)
                if (f->rel == Fact::Rel::Partial && structural_equal(f->lhs, q->children[0]) &&
                    structural_equal(f->rhs, q->children[1]))
                    return true;
            return false;
        }
        case Kind::Contain: {
            if (q->children.size() == 1) {
                InfonPtr v = normalize_value(ctx, q->children[0], Mode::Query);
                return is_bool(v) ? v->bval : is_closed(v);
            }
            InfonPtr item = q->children[1];
            if (item->kind != Kind::Name)
                item = normalize_value(ctx, item, Mode::Query);
            return is_member(ctx, q->children[0], item) == Tri::True;
        }
        case Kind::SeqContain: {
            std::vector<const Fact*> facts;
            ctx.visible_facts(facts);
            for (const Fact* f : facts)
                if (f->rel == Fact::Rel::SeqContain && structural_equal(f->lhs, q->children[0]) &&
                    structural_equal(f->rhs, q->children[1]))
                    return true;
            return false;
        }
        case Kind::Collection: {
            for (const auto& m : q->children)
                if (!query_truth(ctx, m)) return false;
            return true;
        }
        case Kind::Conditional: {
            InfonPtr v = eval_conditional(ctx, q, Mode::Query, false);
            return query_truth(ctx, v);
        }
        case Kind::For: {
            auto r = expand_for_value(ctx, q, Mode::Query);
            if (!r) return false;
            for (const auto& m : (*r)->children)
                if (is_bool(m) && !m->bval) return false;
            return true;
        }
        case Kind::Var:
            return false;
        default: {
            InfonPtr v = normalize_value(ctx, q, Mode::Query);
            if (is_bool(v)) return v->bval;
            return is_closed(v);
        }
    }
}

InfonPtr Evaluator::eval_bool_query(Context& ctx, const InfonPtr& q) {
    try {
        return mk_bool(query_truth(ctx, q));
    } catch (const QuantaError&) {
        return mk_bool(false);  // closed world: unverifiable is false
    }
}

InfonPtr Evaluator::eval_conditional(Context& ctx, const InfonPtr& c, Mode mode, bool stmt_pos) {
    const InfonPtr& cond = c->children[0];
    bool b;
    switch (cond->kind) {
        case Kind::Identity:
        case Kind::PartialId:
        case Kind::Contain:
        case Kind::SeqContain:
        case Kind::BoolQuery:
        case Kind::For:
        case Kind::Collection:
        case Kind::Command: {
            InfonPtr r = eval_bool_query(ctx, cond);
            b = r->bval;
            break;
        }
        default: {
            InfonPtr v = normalize_value(ctx, cond, Mode::Query);
            if (is_bool(v)) {
                b = v->bval;
            } else if (!is_closed(v)) {
                b = false;
            } else {
                throw QuantaError(ErrorCode::Type,
                                  "conditional condition is not a boolean: " + serialize(v));
            }
        }
    }
    InfonPtr branch;
    if (b)
        branch = c->children[1];
    else if (c->children.size() > 2)
        branch = c->children[2];
    if (!branch) return mk_collection({}, c->seq_flag);
    InfonPtr r = stmt_pos ? eval_statement(ctx, branch, mode) : normalize_value(ctx, branch, mode);
    if (branch->flatten && !r->flatten) r = with_flags(r, r->seq_flag, true);
    return r;
}

// --- statements ---------------------------------------------------------------

InfonPtr Evaluator::eval_statement(Context& ctx, const InfonPtr& stmt, Mode mode) {
    switch (stmt->kind) {
        case Kind::Identity:
            return assert_identity(ctx, stmt, mode);
        case Kind::PartialId:
            return partial_identity(ctx, stmt, mode);
        case Kind::Contain:
            return handle_contain(ctx, stmt, mode);
        case Kind::SeqContain:
            return handle_seq_contain(ctx, stmt, mode, false);
        case Kind::For:
            return eval_for_statement(ctx, stmt, mode);
        case Kind::Command:
            return execute_command(ctx, stmt);
        case Kind::Conditional:
            return eval_conditional(ctx, stmt, mode, true);
        case Kind::BoolQuery:
            return eval_bool_query(ctx, stmt->children[0]);
        case Kind::Collection:
            return eval_block(ctx, stmt, mode, true);
        case Kind::Name:
            return normalize_name(ctx, stmt, mode, true, true);
        case Kind::String: {
            if (InfonPtr n = as_name(stmt)) {
                InfonPtr r = normalize_name(ctx, n, mode, true, true);
                // An unresolved bare word stays a word, not a name form.
                if (r->kind == Kind::Name && structural_equal(r, n)) return stmt;
                return r;
            }
            return stmt;
        }
        default:
            return normalize_value(ctx, stmt, mode);
    }
}

InfonPtr Evaluator::assert_identity(Context& ctx, const InfonPtr& stmt, Mode mode) {
    const InfonList& terms = stmt->children;
    InfonPtr last;
    for (size_t i = 0; i + 1 < terms.size(); ++i)
        last = assert_pair(ctx, terms[i], terms[i + 1], mode);
    InfonList shown(terms.begin(), terms.end() - 1);
    shown.push_back(last);
    return with_children(stmt, std::move(shown));
}

InfonPtr Evaluator::assert_pair(Context& ctx, const InfonPtr& lhs, const InfonPtr& rhs,
                                Mode mode) {
    InfonPtr L = as_name(lhs);
    if (L && !has_free_vars(L)) {
        const InfonPtr& head = L->children[0];
        bool head_word = is_word_seg(head);
        bool is_auto = head_word && eng_.find_autoname(head->text) != nullptr;
        if (head_word && !is_auto) return assign_name(ctx, L, rhs, mode, false);
    }
    return assert_fact_identity(ctx, lhs, rhs, mode);
}

InfonPtr Evaluator::assert_fact_identity(Context& ctx, const InfonPtr& lhs, const InfonPtr& rhs,
                                         Mode mode) {
    InfonPtr rv = normalize_value(ctx, rhs, mode);
    if (!has_free_vars(lhs)) {
        InfonPtr lv = normalize_value(ctx, lhs, Mode::Query);
        if (is_closed(lv) && is_closed(rv)) {
            if (structural_equal(lv, rv)) return rv;
            throw QuantaError(ErrorCode::Contradiction,
                              serialize(lhs) + " normalizes to " + serialize(lv) +
                                  ", contradicting " + serialize(rv));
        }
    }
    ctx.check_mutable();
    Rule r;
    r.display = serialize(lhs);
    r.lhs = lhs;
    r.rhs = rv;
    r.lane = Rule::Lane::Axiom;
    std::vector<std::string> vs;
    collect_free_vars(lhs, vs);
    for (const auto& t : vs) r.vars.push_back(RuleVar{t, false, nullptr});
    for (const Rule& ex : ctx.rules())
        if (structural_equal(ex.lhs, r.lhs) && structural_equal(ex.rhs, r.rhs)) return rv;
    ctx.add_rule(r);
    ctx.add_fact(Fact{Fact::Rel::Identity, lhs, rv});
    return rv;
}

InfonPtr Evaluator::partial_identity(Context& ctx, const InfonPtr& stmt, Mode mode) {
    ctx.check_mutable();
    const InfonPtr& lhs = stmt->children[0];
    const InfonPtr& rhs = stmt->children[1];
    Rule r;
    r.display = serialize(lhs) + " ::=";
    r.lhs = lhs;
    r.rhs = rhs;
    r.lane = Rule::Lane::Axiom;
    std::vector<std::string> vs;
    collect_free_vars(lhs, vs);
    for (const auto& t : vs) r.vars.push_back(RuleVar{t, false, nullptr});
    bool dup = false;
    for (const Rule& ex : ctx.rules())
        if (structural_equal(ex.lhs, r.lhs) && structural_equal(ex.rhs, r.rhs)) dup = true;
    if (!dup) ctx.add_rule(r);
    ctx.add_fact(Fact{Fact::Rel::Partial, lhs, rhs});
    (void)mode;
    return stmt;
}

InfonPtr Evaluator::assign_name(Context& ctx, const InfonPtr& name, const InfonPtr& rhs,
                                Mode mode, bool via_command) {
    InfonPtr name2 = normalize_name_segments(ctx, name, mode);
    if (has_free_vars(name2)) return assert_fact_identity(ctx, name2, rhs, mode);
    const InfonList& segs = name2->children;

    for (Context* c = &ctx; c; c = c->parent()) {
        for (size_t len = segs.size(); len >= 1; --len) {
            Binding* b = c->find_local(path_key(segs, len));
            if (!b) continue;
            size_t rest = segs.size() - len;

            if (b->is_sequence()) {
                if (rest == 0) {
                    InfonPtr rv = normalize_value(ctx, rhs, mode);
                    bool flagged = segs[len - 1]->seq_flag;
                    c->check_mutable();
                    auto append1 = [&](const InfonPtr& v) {
                        if (is_member(ctx, b->seq->element_class(), v) == Tri::False)
                            throw QuantaError(ErrorCode::Type,
                                              serialize(v) + " is outside the element class " +
                                                  serialize(b->seq->element_class()));
                        b->seq->append(v);
                        note("append " + path_key(segs, len) + " <- " + serialize(v));
                        if (via_command && b->seq->adapter_backed) {
                            ExternalAdapter* ad = eng_.find_adapter(b->seq->adapter_name);
                            effects.external.push_back("write " + path_key(segs, len) + " " +
                                                       serialize(v));
                            if (!ad || !ad->write || !ad->write({v}))
                                throw QuantaError(ErrorCode::Effect,
                                                  "external write refused for " +
                                                      name_text(name2));
                        }
                    };
                    if (flagged) {
                        auto ms = members_of(ctx, rv);
                        if (!ms)
                            throw QuantaError(ErrorCode::Type,
                                              "whole-sequence write needs an enumerable value");
                        for (const auto& m : *ms) append1(m);
                    } else {
                        append1(rv);
                    }
                    return rv;
                }
                if (rest == 1 && is_word_seg(segs[len]) && !reserved_seq_word(segs[len]->text)) {
                    InfonPtr rv = normalize_value(ctx, rhs, mode);
                    c->check_mutable();
                    b->seq->set_field(segs[len]->text, rv);
                    return rv;
                }
                throw QuantaError(ErrorCode::Type,
                                  "cannot assign into the interior of sequence " +
                                      path_key(segs, len));
            }

            if (b->object_ctx) {
                Context* oc = eng_.context_by_id(b->object_ctx);
                if (!oc)
                    throw QuantaError(ErrorCode::UnknownReference,
                                      "object behind " + name_text(name2) + " was deleted");
                if (rest == 0)
                    throw QuantaError(ErrorCode::Immutability,
                                      name_text(name2) + " names an object instance");
                InfonList rem(segs.begin() + static_cast<long>(len), segs.end());
                return assign_name(*oc, mk_name(std::move(rem)), rhs, mode, via_command);
            }

            if (!b->adapter.empty()) {
                InfonPtr rv = normalize_value(ctx, rhs, mode);
                if (!via_command) return rv;  // recorded fact; writes need '!'
                ExternalAdapter* ad = eng_.find_adapter(b->adapter);
                effects.external.push_back("write " + path_key(segs, len) + " " + serialize(rv));
                if (!ad || !ad->write || !ad->write({rv}))
                    throw QuantaError(ErrorCode::Effect,
                                      "external write refused for " + name_text(name2));
                return rv;
            }

            if (b->value) {
                if (rest > 0)
                    throw QuantaError(ErrorCode::Immutability,
                                      "cannot assign inside the const value " +
                                          path_key(segs, len));
                InfonPtr rv = normalize_value(ctx, rhs, mode);
                if (structural_equal(b->value, rv)) return rv;
                if (via_command)
                    throw QuantaError(ErrorCode::Immutability,
                                      name_text(name2) + " is const and already " +
                                          serialize(b->value));
                if (c == &ctx)
                    throw QuantaError(ErrorCode::Contradiction,
                                      name_text(name2) + " is already identical to " +
                                          serialize(b->value));
                ctx.check_mutable();
                Binding& nb = ctx.ensure_local(path_key(segs, segs.size()));
                nb.value = rv;
                note("shadowing " + name_text(name2));
                return rv;
            }

            if (rest == 0) {
                if (via_command)
                    throw QuantaError(ErrorCode::Immutability,
                                      name_text(name2) +
                                          " is a const name; its value comes from assertion");
                InfonPtr rv = normalize_value(ctx, rhs, mode);
                if (b->declared_class && is_member(ctx, b->declared_class, rv) == Tri::False)
                    throw QuantaError(ErrorCode::Type,
                                      serialize(rv) + " is outside the declared class " +
                                          serialize(b->declared_class));
                c->check_mutable();
                b->value = rv;
                return rv;
            }
            // Declared but unbound prefix with a longer path: keep searching
            // outer scopes, then fall through to path creation.
        }
    }

    if (via_command)
        throw QuantaError(ErrorCode::UnrealizableCommand,
                          "no binding or mapping realizes " + name_text(name2));
    InfonPtr rv = normalize_value(ctx, rhs, mode);
    // A fresh dotted name joins the innermost scope that already holds part
    // of its family (same first segment), so members added from nested
    // blocks land beside their siblings.
    Context* home = &ctx;
    if (segs.size() > 1) {
        std::string head = path_key(segs, 1);
        for (Context* c = &ctx; c; c = c->parent()) {
            bool owns = false;
            for (const auto& [k, _] : c->bindings())
                if (k == head || (k.size() > head.size() && k.compare(0, head.size(), head) == 0 &&
                                  k[head.size()] == '\x1f')) {
                    owns = true;
                    break;
                }
            if (owns) {
                home = c;
                break;
            }
        }
    }
    home->check_mutable();
    Binding& nb = home->ensure_local(path_key(segs, segs.size()));
    nb.value = rv;
    return rv;
}

InfonPtr Evaluator::handle_contain(Context& ctx, const InfonPtr& stmt, Mode mode) {
    const InfonPtr& cls = stmt->children[0];
    if (stmt->children.size() == 1) {
        // Call idiom: `f(x):` evaluates with effects allowed.
        if (cls->kind == Kind::Name) return normalize_name(ctx, cls, mode, true, true);
        return normalize_value(ctx, cls, mode);
    }
    const InfonPtr& item = stmt->children[1];

    if (cls->kind == Kind::SeqClass)
        return handle_seq_contain(ctx, mk_seq_contain(cls->children[0], item), mode, false);

    auto class_value = [&]() -> InfonPtr {
        if (InfonPtr n = as_name(cls)) {
            if (auto r = resolve_name(ctx, n, Mode::Query)) return *r;
            return nullptr;
        }
        return cls;
    };

    if (item->kind == Kind::Identity) {
        InfonPtr lhsName = as_name(item->children[0]);
        if (!lhsName)
            throw QuantaError(ErrorCode::Type, "declaration needs a name on the left");
        InfonPtr cv = class_value();
        if (cv && cv->kind == Kind::Match && has_declarations(cv->children[0])) {
            instantiate_object(ctx, cls, cv, lhsName, item->children.back(), mode);
            return stmt;
        }
        declare_const(ctx, cls, lhsName, mode, false);
        InfonList terms{lhsName};
        terms.insert(terms.end(), item->children.begin() + 1, item->children.end());
        assert_identity(ctx, mk_identity(std::move(terms)), mode);
        return stmt;
    }

    if (InfonPtr n = as_name(item)) {
        InfonPtr cv = class_value();
        if (cv && cv->kind == Kind::Match && has_declarations(cv->children[0])) {
            instantiate_object(ctx, cls, cv, n, nullptr, mode);
            return stmt;
        }
        return declare_const(ctx, cls, n, mode, false);
    }

    // Closed item: a plain membership assertion.
    InfonPtr iv = normalize_value(ctx, item, mode);
    Tri t = is_member(ctx, cls, iv);
    if (t == Tri::False)
        throw QuantaError(ErrorCode::Contradiction,
                          serialize(iv) + " cannot be a member of " + serialize(cls));
    ctx.check_mutable();
    ctx.add_fact(Fact{Fact::Rel::Contain, cls, iv});
    return stmt;
}

InfonPtr Evaluator::declare_const(Context& ctx, const InfonPtr& cls, const InfonPtr& item,
                                  Mode mode, bool via_command) {
    InfonPtr name2 = normalize_name_segments(ctx, item, mode);
    std::string key = path_key(name2->children, name2->children.size());
    Context* owner = nullptr;
    Binding* existing = ctx.find(key, &owner);
    if (existing) {
        if (via_command)
            throw QuantaError(ErrorCode::AlreadyBound,
                              name_text(name2) + " is already allocated");
        ctx.check_mutable();
        ctx.add_fact(Fact{Fact::Rel::Contain, cls, name2});
        return item;
    }
    if (via_command) {
        InfonPtr n = as_name(cls);
        bool known = !n;
        if (n) known = resolve_name(ctx, n, Mode::Query).has_value();
        if (!known)
            throw QuantaError(ErrorCode::UnknownClass,
                              "cannot allocate against unknown class " + serialize(cls));
    }
    ctx.check_mutable();
    Binding& b = ctx.ensure_local(key);
    b.declared = true;
    b.declared_class = cls;
    ctx.add_fact(Fact{Fact::Rel::Contain, cls, name2});
    return item;
}

InfonPtr Evaluator::handle_seq_contain(Context& ctx, const InfonPtr& stmt, Mode mode,
                                       bool via_command) {
    const InfonPtr& cls = stmt->children[0];
    const InfonPtr& item = stmt->children[1];
    if (item->kind == Kind::Identity) {
        InfonPtr lhsName = as_name(item->children[0]);
        if (!lhsName)
            throw QuantaError(ErrorCode::Type, "sequence declaration needs a name");
        declare_sequence(ctx, cls, lhsName, mode, via_command);
        for (size_t i = 1; i < item->children.size(); ++i)
            assign_name(ctx, lhsName, item->children[i], mode, via_command);
        return stmt;
    }
    if (InfonPtr n = as_name(item)) {
        declare_sequence(ctx, cls, n, mode, via_command);
        return stmt;
    }
    ctx.check_mutable();
    ctx.add_fact(Fact{Fact::Rel::SeqContain, cls, item});
    return stmt;
}

InfonPtr Evaluator::declare_sequence(Context& ctx, const InfonPtr& cls, const InfonPtr& item,
                                     Mode mode, bool via_command) {
    InfonPtr name2 = normalize_name_segments(ctx, item, mode);
    std::string key = path_key(name2->children, name2->children.size());
    Context* owner = nullptr;
    Binding* existing = ctx.find(key, &owner);
    if (existing) {
        if (via_command)
            throw QuantaError(ErrorCode::AlreadyBound,
                              name_text(name2) + " is already allocated");
        if (existing->is_sequence()) return item;  // re-declaration is a no-op
        throw QuantaError(ErrorCode::Contradiction,
                          name_text(name2) + " is already a const name");
    }
    ctx.check_mutable();
    Binding& b = ctx.ensure_local(key);
    b.declared = true;
    b.declared_class = cls;
    b.seq = std::make_shared<SequenceStore>(cls);
    ctx.add_fact(Fact{Fact::Rel::SeqContain, cls, name2});
    return item;
}

InfonPtr Evaluator::instantiate_object(Context& ctx, const InfonPtr& cls_written,
                                       const InfonPtr& matchv, const InfonPtr& item_name,
                                       const InfonPtr& init, Mode mode) {
    InfonPtr name2 = normalize_name_segments(ctx, item_name, mode);
    std::string key = path_key(name2->children, name2->children.size());
    if (Binding* ex = ctx.find_local(key)) {
        // Re-asserting the same object declaration adds nothing.
        if (ex->object_ctx && ex->declared_class &&
            structural_equal(ex->declared_class, cls_written))
            return name2;
        throw QuantaError(ErrorCode::AlreadyBound, name_text(name2) + " is already bound");
    }
    ctx.check_mutable();
    Context* oc = ctx.make_child("obj " + key);
    const InfonPtr& pattern = matchv->children[0];
    InfonList decls = pattern->kind == Kind::Collection ? pattern->children : InfonList{pattern};
    for (const auto& d : decls) eval_statement(*oc, d, Mode::Assert);
    if (init) {
        InfonList inits = init->kind == Kind::Collection ? init->children : InfonList{init};
        for (const auto& st : inits) eval_statement(*oc, st, mode);
    }
    Binding& b = ctx.ensure_local(key);
    b.declared = true;
    b.declared_class = cls_written;
    b.object_ctx = oc->id();
    b.value = with_ctx(pattern->kind == Kind::Collection ? pattern : mk_collection({pattern}),
                       oc->id());
    ctx.add_fact(Fact{Fact::Rel::Contain, cls_written, name2});
    note("instantiated " + name_text(name2));
    return name2;
}

void Evaluator::run_action(Context& ctx, const InfonPtr& action) {
    const InfonPtr& body = action->children[0];
    InfonList stmts = body->kind == Kind::Collection ? body->children : InfonList{body};
    for (const auto& st : stmts) eval_statement(ctx, st, Mode::Command);
}

InfonPtr Evaluator::eval_for_statement(Context& ctx, const InfonPtr& f, Mode mode) {
    InfonPtr body = f->children.back();
    bool identity_ish = body->kind == Kind::Identity || body->kind == Kind::PartialId;
    if (body->kind == Kind::Collection && !body->children.empty()) {
        identity_ish = true;
        for (const auto& m : body->children)
            if (m->kind != Kind::Identity && m->kind != Kind::PartialId) identity_ish = false;
    }
    if (identity_ish) {
        std::vector<Rule> rs = rules_from_for(f, Rule::Lane::Axiom);
        ctx.check_mutable();
        for (Rule& r : rs) {
            bool dup = false;
            for (const Rule& ex : ctx.rules())
                if (structural_equal(ex.lhs, r.lhs) && structural_equal(ex.rhs, r.rhs)) dup = true;
            if (!dup) ctx.add_rule(std::move(r));
        }
        return f;
    }

    size_t nv = f->for_vars.size();
    std::vector<std::vector<InfonPtr>> lists;
    for (size_t i = 0; i < nv; ++i) {
        InfonPtr range = normalize_value(ctx, f->children[i], mode);
        auto ms = members_of(ctx, range);
        if (!ms)
            throw QuantaError(ErrorCode::Enumeration,
                              "range of " + f->for_vars[i].token + " is not enumerable: " +
                                  serialize(range));
        lists.push_back(*ms);
    }
    size_t total = 1;
    for (const auto& l : lists) {
        total *= l.size();
        if (total > 100000)
            throw QuantaError(ErrorCode::Budget, "loop expansion above safety cap");
    }
    InfonList out;
    std::map<std::string, InfonPtr> binds;
    std::function<void(size_t)> rec = [&](size_t d) {
        if (d == nv) {
            bump("for");
            InfonPtr inst = substitute(body, binds);
            out.push_back(eval_statement(ctx, inst, mode));
            return;
        }
        for (const auto& m : lists[d]) {
            binds[f->for_vars[d].token] = m;
            rec(d + 1);
        }
        binds.erase(f->for_vars[d].token);
    };
    rec(0);
    return mk_collection(std::move(out), f->seq_flag);
}

InfonPtr Evaluator::execute_command(Context& ctx, const InfonPtr& cmd) {
    // Mappings asserted over command descriptions take precedence over the
    // engine's own realizations (they route effects elsewhere).
    if (auto rr = try_rules(ctx, cmd, Mode::Command, true))
        return normalize_value(ctx, *rr, Mode::Command);

    const InfonPtr& inner = cmd->children[0];
    switch (inner->kind) {
        case Kind::Identity: {
            const InfonList& terms = inner->children;
            InfonPtr lhs = terms[0];
            InfonPtr last;
            for (size_t i = 0; i + 1 < terms.size(); ++i) {
                InfonPtr L = as_name(terms[i]);
                if (L) {
                    last = assign_name(ctx, L, terms[i + 1], Mode::Command, true);
                } else {
                    InfonPtr lv = normalize_value(ctx, terms[i], Mode::Command);
                    InfonPtr rv = normalize_value(ctx, terms[i + 1], Mode::Command);
                    if (!structural_equal(lv, rv))
                        throw QuantaError(ErrorCode::UnrealizableCommand,
                                          "cannot realize " + serialize(terms[i]) + " == " +
                                              serialize(terms[i + 1]));
                    last = rv;
                }
            }
            return mk_identity({lhs, last});
        }
        case Kind::Contain: {
            if (inner->children.size() == 1) return handle_contain(ctx, inner, Mode::Command);
            const InfonPtr& cls = inner->children[0];
            const InfonPtr& item = inner->children[1];
            if (cls->kind == Kind::SeqClass)
                return handle_seq_contain(ctx, mk_seq_contain(cls->children[0], item),
                                          Mode::Command, true);
            if (item->kind == Kind::Identity) {
                InfonPtr lhsName = as_name(item->children[0]);
                if (!lhsName)
                    throw QuantaError(ErrorCode::Type, "allocation needs a name");
                declare_const(ctx, cls, lhsName, Mode::Command, true);
                // The allocation's own initializer binds the fresh const;
                // later command sets on it raise immutability errors.
                for (size_t i = 1; i < item->children.size(); ++i)
                    assign_name(ctx, lhsName, item->children[i], Mode::Command, false);
                return inner;
            }
            if (InfonPtr n = as_name(item)) {
                declare_const(ctx, cls, n, Mode::Command, true);
                return inner;
            }
            return handle_contain(ctx, inner, Mode::Command);
        }
        case Kind::SeqContain:
            return handle_seq_contain(ctx, inner, Mode::Command, true);
        case Kind::Collection: {
            // '!' distributes over the block: state-describing members become
            // commands; block scoping and '#' splicing work as in assertion.
            InfonList wrapped;
            for (const auto& m : inner->children) {
                if (m->kind == Kind::Identity || m->kind == Kind::Contain ||
                    m->kind == Kind::SeqContain) {
                    wrapped.push_back(with_flags(mk_command(m), m->seq_flag, m->flatten));
                } else {
                    wrapped.push_back(m);
                }
            }
            InfonPtr block = with_children(inner, std::move(wrapped));
            return eval_block(ctx, block, Mode::Command, true);
        }
        case Kind::For:
            return eval_for_statement(ctx, inner, Mode::Command);
        case Kind::Conditional:
            return eval_conditional(ctx, inner, Mode::Command, true);
        case Kind::BoolQuery:
            return eval_bool_query(ctx, inner->children[0]);
        case Kind::Name:
            return normalize_name(ctx, inner, Mode::Command, true, true);
        case Kind::Command:
            return execute_command(ctx, inner);
        default:
            throw QuantaError(ErrorCode::UnrealizableCommand,
                              "command does not describe a realizable state change: " +
                                  serialize(inner));
    }
}

InfonPtr Evaluator::eval_block(Context& ctx, const InfonPtr& coll, Mode mode, bool stmt_pos) {
    bool needs_ctx = false;
    for (const auto& m : coll->children)
        if (stmt_like(m)) needs_ctx = true;
    Context* child = needs_ctx ? ctx.make_child("block") : &ctx;

    InfonList out;
    for (size_t i = 0; i < coll->children.size(); ++i) {
        const InfonPtr& m = coll->children[i];
        PathGuard g(path_, static_cast<int>(i));
        InfonPtr r = eval_statement(*child, m, mode);
        bool splice = m->flatten || r->flatten;
        if (!splice && coll->seq_flag) {
            bool written_seq = (m->kind == Kind::Collection && m->seq_flag) ||
                               (m->kind == Kind::IntRange && m->seq_flag) ||
                               (m->kind == Kind::For && m->seq_flag);
            splice = written_seq && r->kind == Kind::Collection && r->seq_flag;
        }
        if (splice) {
            auto ms = members_of(ctx, with_flags(r, r->seq_flag, false));
            if (!ms) {
                // A taken `#if` branch contributes its single statement; a
                // `#for` that became rewrite rules stays a single member.
                if (m->kind == Kind::Conditional ||
                    (m->kind == Kind::For && r->kind == Kind::For)) {
                    out.push_back(with_flags(r, r->seq_flag, false));
                    continue;
                }
                throw QuantaError(ErrorCode::Type,
                                  "'#' needs an enumerable value, got " + serialize(r));
            }
            out.insert(out.end(), ms->begin(), ms->end());
        } else {
            out.push_back(r);
        }
    }
    InfonPtr res = mk_collection(std::move(out), coll->seq_flag, coll->open_ended);
    if (coll->flatten) res = with_flags(res, res->seq_flag, true);
    if (needs_ctx) res = with_ctx(res, child->id());
    if (!stmt_pos && !needs_ctx) {
        if (auto rr = try_rules(ctx, res, mode, false)) return normalize_value(ctx, *rr, mode);
    }
    return res;
}

}  // namespace quanta
