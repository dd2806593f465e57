#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quanta/bigint.hpp"

namespace quanta {

// Every value in the engine is an infon. Nodes are immutable and shared;
// mutation happens only in context bindings and sequence stores.
enum class Kind : uint8_t {
    Collection,    // {a; b} / {a, b}; children = members
    Array,         // [a, b, c]; children = elements (an ordered name segment)
    Int,           // arbitrary-precision integer
    String,        // text; also the form of bare words like `red`
    Bool,          // true / false
    Name,          // <seg.seg...>; children = segments (any infon each)
    Identity,      // a == b == ...; children = the chained terms (n >= 2)
    PartialId,     // a ::= b
    Contain,       // a : b  (children [class] or [class, item])
    SeqContain,    // a $: b (children [class, item])
    SeqClass,      // $<name>; children = [inner name]
    For,           // for v:R,... :: body; children = [R..., body]
    Var,           // %tok inside rule/for bodies; text = tok
    Match,         // @ pattern; children = [pattern]
    Conditional,   // if c t [else e]; children = [c, t] or [c, t, e]
    IntRange,      // lo..hi; children = [lo, hi]
    BoolQuery,     // x?; children = [inner]
    Command,       // x!; children = [inner]
    Difference,    // difference(a, b)
    Intersection,  // intersection x
    Complement,    // complement x / not x
    Template,      // $"text%span%text"; children = spans, tpl_text = n+1 pieces
    BuiltinClass,  // one of the preloaded classes; text = ints|numbers|...
};

struct Infon;
using InfonPtr = std::shared_ptr<const Infon>;
using InfonList = std::vector<InfonPtr>;

struct ForVar {
    std::string token;
    bool ordered = false;  // '$' on the loop variable
};

struct Infon {
    Kind kind;
    uint64_t id;  // informatic identity tag; fresh per constructed node

    bool seq_flag = false;    // '$' prefix (ordered / sequence view)
    bool flatten = false;     // '#' prefix (splice into the enclosing collection)
    bool open_ended = false;  // collection declared with trailing '...'

    bool bval = false;     // Bool
    BigInt ival;           // Int
    std::string text;      // String text / Var token / BuiltinClass name

    InfonList children;
    std::vector<ForVar> for_vars;       // For: parallel to leading children
    std::vector<std::string> tpl_text;  // Template: children.size() + 1 pieces

    // Collection evaluated as a block: the context its statements ran in.
    // 0 when not applicable. Ignored by structural comparison.
    uint64_t ctx_id = 0;

    explicit Infon(Kind k) : kind(k), id(next_id()) {}
    static uint64_t next_id();
};

// --- constructors -----------------------------------------------------------

InfonPtr mk_int(BigInt v);
InfonPtr mk_int(long long v);
InfonPtr mk_string(std::string s);
InfonPtr mk_bool(bool b);
InfonPtr mk_var(std::string token);
InfonPtr mk_builtin_class(std::string name);
InfonPtr mk_collection(InfonList members, bool seq = false, bool open = false);
InfonPtr mk_array(InfonList elems);
InfonPtr mk_name(InfonList segments);
InfonPtr mk_name1(std::string word);                   // <word>
InfonPtr mk_call(std::string head, InfonList args);    // head(args...)
InfonPtr mk_identity(InfonList terms);
InfonPtr mk_partial_id(InfonPtr lhs, InfonPtr rhs);
InfonPtr mk_contain(InfonPtr cls, InfonPtr item);      // item may be null
InfonPtr mk_seq_contain(InfonPtr cls, InfonPtr item);
InfonPtr mk_seq_class(InfonPtr name);
InfonPtr mk_for(std::vector<ForVar> vars, InfonList ranges, InfonPtr body, bool ordered);
InfonPtr mk_match(InfonPtr pattern);
InfonPtr mk_conditional(InfonPtr cond, InfonPtr then_branch, InfonPtr else_branch, bool seq);
InfonPtr mk_range(InfonPtr lo, InfonPtr hi, bool seq);
InfonPtr mk_query(InfonPtr inner);
InfonPtr mk_command(InfonPtr inner);
InfonPtr mk_difference(InfonPtr a, InfonPtr b);
InfonPtr mk_intersection(InfonPtr x);
InfonPtr mk_complement(InfonPtr x);
InfonPtr mk_template(std::vector<std::string> texts, InfonList spans);

InfonPtr empty_collection();

// Copy with a flag tweaked (nodes are immutable). Fresh id.
InfonPtr with_flags(const InfonPtr& n, bool seq, bool flatten);
InfonPtr with_children(const InfonPtr& n, InfonList children);
InfonPtr with_ctx(const InfonPtr& n, uint64_t ctx_id);

// --- predicates / views -----------------------------------------------------

bool is_kind(const InfonPtr& n, Kind k);
bool is_int(const InfonPtr& n);
bool is_string(const InfonPtr& n);
bool is_bool(const InfonPtr& n);
bool is_empty_collection(const InfonPtr& n);

// Single-segment name whose segment is a plain word; returns the word.
std::optional<std::string> simple_name_word(const InfonPtr& n);
// Name of form <head.arg> or <head.[args...]>: returns head word.
std::optional<std::string> call_head(const InfonPtr& n);
// The argument list of a call: <f.[a,b]> -> {a,b}; <f.a> -> {a}; <f.[]> -> {}.
InfonList call_args(const InfonPtr& n);

// Structural comparison. Ignores identity tags and context ids; includes
// kind, flags, scalar payloads, children, loop variables and template texts.
bool structural_equal(const InfonPtr& a, const InfonPtr& b);

// Total deterministic order used for canonicalization (dictionary order on
// serialized structure, with numeric order for ints of equal kind).
bool canonical_less(const InfonPtr& a, const InfonPtr& b);
int canonical_cmp(const InfonPtr& a, const InfonPtr& b);

// True when n contains no Name/Var/Template nodes anywhere (fully resolved).
bool is_closed(const InfonPtr& n);

// Collects the free Var tokens of n (tokens bound by enclosing For excluded).
void collect_free_vars(const InfonPtr& n, std::vector<std::string>& out);

}  // namespace quanta
