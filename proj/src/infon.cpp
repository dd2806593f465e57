#include "quanta/infon.hpp"

#include <algorithm>
#include <atomic>

namespace quanta {

uint64_t Infon::next_id() {
    static std::atomic<uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

namespace {
std::shared_ptr<Infon> fresh(Kind k) { return std::make_shared<Infon>(k); }
}  // namespace

InfonPtr mk_int(BigInt v) {
    auto n = fresh(Kind::Int);
    n->ival = std::move(v);
    return n;
}

InfonPtr mk_int(long long v) { return mk_int(BigInt(v)); }

InfonPtr mk_string(std::string s) {
    auto n = fresh(Kind::String);
    n->text = std::move(s);
    return n;
}

InfonPtr mk_bool(bool b) {
    auto n = fresh(Kind::Bool);
    n->bval = b;
    return n;
}

InfonPtr mk_var(std::string token) {
    auto n = fresh(Kind::Var);
    n->text = std::move(token);
    return n;
}

InfonPtr mk_builtin_class(std::string name) {
    auto n = fresh(Kind::BuiltinClass);
    n->text = std::move(name);
    return n;
}

InfonPtr mk_collection(InfonList members, bool seq, bool open) {
    auto n = fresh(Kind::Collection);
    n->children = std::move(members);
    n->seq_flag = seq;
    n->open_ended = open;
    return n;
}

InfonPtr mk_array(InfonList elems) {
    auto n = fresh(Kind::Array);
    n->children = std::move(elems);
    return n;
}

InfonPtr mk_name(InfonList segments) {
    auto n = fresh(Kind::Name);
    n->children = std::move(segments);
    return n;
}

InfonPtr mk_name1(std::string word) { return mk_name({mk_string(std::move(word))}); }

InfonPtr mk_call(std::string head, InfonList args) {
    InfonList segs;
    segs.push_back(mk_string(std::move(head)));
    if (args.size() == 1) {
        segs.push_back(args[0]);
    } else {
        segs.push_back(mk_array(std::move(args)));
    }
    return mk_name(std::move(segs));
}

InfonPtr mk_identity(InfonList terms) {
    auto n = fresh(Kind::Identity);
    n->children = std::move(terms);
    return n;
}

InfonPtr mk_partial_id(InfonPtr lhs, InfonPtr rhs) {
    auto n = fresh(Kind::PartialId);
    n->children = {std::move(lhs), std::move(rhs)};
    return n;
}

InfonPtr mk_contain(InfonPtr cls, InfonPtr item) {
    auto n = fresh(Kind::Contain);
    n->children.push_back(std::move(cls));
    if (item) n->children.push_back(std::move(item));
    return n;
}

InfonPtr mk_seq_contain(InfonPtr cls, InfonPtr item) {
    auto n = fresh(Kind::SeqContain);
    n->children = {std::move(cls), std::move(item)};
    return n;
}

InfonPtr mk_seq_class(InfonPtr name) {
    auto n = fresh(Kind::SeqClass);
    n->children = {std::move(name)};
    return n;
}

InfonPtr mk_for(std::vector<ForVar> vars, InfonList ranges, InfonPtr body, bool ordered) {
    auto n = fresh(Kind::For);
    n->for_vars = std::move(vars);
    n->children = std::move(ranges);
    n->children.push_back(std::move(body));
    n->seq_flag = ordered;
    return n;
}

InfonPtr mk_match(InfonPtr pattern) {
    auto n = fresh(Kind::Match);
    n->children = {std::move(pattern)};
    return n;
}

InfonPtr mk_conditional(InfonPtr cond, InfonPtr then_branch, InfonPtr else_branch, bool seq) {
    auto n = fresh(Kind::Conditional);
    n->children = {std::move(cond), std::move(then_branch)};
    if (else_branch) n->children.push_back(std::move(else_branch));
    n->seq_flag = seq;
    return n;
}

InfonPtr mk_range(InfonPtr lo, InfonPtr hi, bool seq) {
    auto n = fresh(Kind::IntRange);
    n->children = {std::move(lo), std::move(hi)};
    n->seq_flag = seq;
    return n;
}

InfonPtr mk_query(InfonPtr inner) {
    auto n = fresh(Kind::BoolQuery);
    n->children = {std::move(inner)};
    return n;
}

InfonPtr mk_command(InfonPtr inner) {
    auto n = fresh(Kind::Command);
    n->children = {std::move(inner)};
    return n;
}

InfonPtr mk_difference(InfonPtr a, InfonPtr b) {
    auto n = fresh(Kind::Difference);
    n->children = {std::move(a), std::move(b)};
    return n;
}

InfonPtr mk_intersection(InfonPtr x) {
    auto n = fresh(Kind::Intersection);
    n->children = {std::move(x)};
    return n;
}

InfonPtr mk_complement(InfonPtr x) {
    auto n = fresh(Kind::Complement);
    n->children = {std::move(x)};
    return n;
}

InfonPtr mk_template(std::vector<std::string> texts, InfonList spans) {
    auto n = fresh(Kind::Template);
    n->tpl_text = std::move(texts);
    n->children = std::move(spans);
    return n;
}

InfonPtr empty_collection() { return mk_collection({}); }

InfonPtr with_flags(const InfonPtr& n, bool seq, bool flatten) {
    if (n->seq_flag == seq && n->flatten == flatten) return n;
    auto c = std::make_shared<Infon>(*n);
    c->id = Infon::next_id();
    c->seq_flag = seq;
    c->flatten = flatten;
    return c;
}

InfonPtr with_children(const InfonPtr& n, InfonList children) {
    auto c = std::make_shared<Infon>(*n);
    c->id = Infon::next_id();
    c->children = std::move(children);
    return c;
}

InfonPtr with_ctx(const InfonPtr& n, uint64_t ctx_id) {
    if (n->ctx_id == ctx_id) return n;
    auto c = std::make_shared<Infon>(*n);
    c->id = Infon::next_id();
    c->ctx_id = ctx_id;
    return c;
}

bool is_kind(const InfonPtr& n, Kind k) { return n && n->kind == k; }
bool is_int(const InfonPtr& n) { return is_kind(n, Kind::Int); }
bool is_string(const InfonPtr& n) { return is_kind(n, Kind::String); }
bool is_bool(const InfonPtr& n) { return is_kind(n, Kind::Bool); }

bool is_empty_collection(const InfonPtr& n) {
    return is_kind(n, Kind::Collection) && n->children.empty() && !n->open_ended;
}

std::optional<std::string> simple_name_word(const InfonPtr& n) {
    if (!is_kind(n, Kind::Name) || n->children.size() != 1) return std::nullopt;
    const InfonPtr& seg = n->children[0];
    if (seg->kind != Kind::String || seg->seq_flag) return std::nullopt;
    return seg->text;
}

std::optional<std::string> call_head(const InfonPtr& n) {
    if (!is_kind(n, Kind::Name) || n->children.size() != 2) return std::nullopt;
    const InfonPtr& head = n->children[0];
    if (head->kind != Kind::String || head->seq_flag) return std::nullopt;
    return head->text;
}

InfonList call_args(const InfonPtr& n) {
    if (!is_kind(n, Kind::Name) || n->children.size() != 2) return {};
    const InfonPtr& arg = n->children[1];
    if (arg->kind == Kind::Array) return arg->children;
    return {arg};
}

bool structural_equal(const InfonPtr& a, const InfonPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (a->seq_flag != b->seq_flag || a->flatten != b->flatten || a->open_ended != b->open_ended)
        return false;
    switch (a->kind) {
        case Kind::Int:
            if (a->ival != b->ival) return false;
            break;
        case Kind::Bool:
            if (a->bval != b->bval) return false;
            break;
        case Kind::String:
        case Kind::Var:
        case Kind::BuiltinClass:
            if (a->text != b->text) return false;
            break;
        default:
            break;
    }
    if (a->kind == Kind::For) {
        if (a->for_vars.size() != b->for_vars.size()) return false;
        for (size_t i = 0; i < a->for_vars.size(); ++i) {
            if (a->for_vars[i].token != b->for_vars[i].token ||
                a->for_vars[i].ordered != b->for_vars[i].ordered)
                return false;
        }
    }
    if (a->kind == Kind::Template && a->tpl_text != b->tpl_text) return false;
    if (a->children.size() != b->children.size()) return false;
    for (size_t i = 0; i < a->children.size(); ++i) {
        if (!structural_equal(a->children[i], b->children[i])) return false;
    }
    return true;
}

int canonical_cmp(const InfonPtr& a, const InfonPtr& b) {
    if (a.get() == b.get()) return 0;
    if (!a || !b) return a ? 1 : (b ? -1 : 0);
    if (a->kind != b->kind)
        return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
    switch (a->kind) {
        case Kind::Int: {
            int c = a->ival.compare(b->ival);
            if (c) return c;
            break;
        }
        case Kind::Bool:
            if (a->bval != b->bval) return a->bval ? 1 : -1;
            break;
        case Kind::String:
        case Kind::Var:
        case Kind::BuiltinClass: {
            int c = a->text.compare(b->text);
            if (c) return c < 0 ? -1 : 1;
            break;
        }
        default:
            break;
    }
    size_t n = std::min(a->children.size(), b->children.size());
    for (size_t i = 0; i < n; ++i) {
        int c = canonical_cmp(a->children[i], b->children[i]);
        if (c) return c;
    }
    if (a->children.size() != b->children.size())
        return a->children.size() < b->children.size() ? -1 : 1;
    if (a->seq_flag != b->seq_flag) return a->seq_flag ? 1 : -1;
    if (a->flatten != b->flatten) return a->flatten ? 1 : -1;
    if (a->open_ended != b->open_ended) return a->open_ended ? 1 : -1;
    if (a->kind == Kind::Template) {
        if (a->tpl_text < b->tpl_text) return -1;
        if (b->tpl_text < a->tpl_text) return 1;
    }
    return 0;
}

bool canonical_less(const InfonPtr& a, const InfonPtr& b) { return canonical_cmp(a, b) < 0; }

bool is_closed(const InfonPtr& n) {
    if (!n) return true;
    switch (n->kind) {
        case Kind::Name:
        case Kind::Var:
        case Kind::Template:
            return false;
        default:
            break;
    }
    for (const auto& c : n->children)
        if (!is_closed(c)) return false;
    return true;
}

namespace {
void collect_vars_rec(const InfonPtr& n, std::vector<std::string>& bound,
                      std::vector<std::string>& out) {
    if (!n) return;
    if (n->kind == Kind::Var) {
        if (std::find(bound.begin(), bound.end(), n->text) == bound.end() &&
            std::find(out.begin(), out.end(), n->text) == out.end())
            out.push_back(n->text);
        return;
    }
    if (n->kind == Kind::For) {
        // Ranges see the outer scope; the body adds the loop variables.
        size_t nranges = n->for_vars.size();
        for (size_t i = 0; i < nranges && i < n->children.size(); ++i)
            collect_vars_rec(n->children[i], bound, out);
        size_t before = bound.size();
        for (const auto& v : n->for_vars) bound.push_back(v.token);
        if (!n->children.empty()) collect_vars_rec(n->children.back(), bound, out);
        bound.resize(before);
        return;
    }
    for (const auto& c : n->children) collect_vars_rec(c, bound, out);
}
}  // namespace

void collect_free_vars(const InfonPtr& n, std::vector<std::string>& out) {
    std::vector<std::string> bound;
    collect_vars_rec(n, bound, out);
}

}  // namespace quanta
