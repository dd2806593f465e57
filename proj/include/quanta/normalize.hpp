#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "quanta/bigint.hpp"
#include "quanta/engine.hpp"
#include "quanta/infon.hpp"
#include "quanta/trace.hpp"

namespace quanta {

// Tri-state class membership.
enum class Tri { False, True, Unknown };

// One evaluation pass: statement semantics (bindings, sequences, rules,
// commands) plus the pure rewrite driver (substitution of identicals).
class Evaluator {
public:
    Evaluator(Engine& eng, const EngineOptions& opt);

    // Statement position: identities bind, containments declare, commands
    // execute, `for` registers rules or expands, everything else is a value.
    InfonPtr eval_statement(Context& ctx, const InfonPtr& stmt, Mode mode);

    // Value position: rewrites to normal form under the current mode.
    InfonPtr normalize_value(Context& ctx, const InfonPtr& v, Mode mode);

    // Total boolean query over closed-world facts.
    InfonPtr eval_bool_query(Context& ctx, const InfonPtr& q);

    // Membership of `item` in class `cls` (written form; resolves names,
    // walks containment/identity facts, knows built-in classes).
    Tri is_member(Context& ctx, const InfonPtr& cls, const InfonPtr& item);

    // Enumerates members if the value is enumerable (collections, arrays,
    // strings, closed int ranges); nullopt otherwise.
    std::optional<std::vector<InfonPtr>> members_of(Context& ctx, const InfonPtr& v);

    // Distinct-state count of a class value, when finite (used by the
    // information measure). nullopt when unbounded or unknown.
    std::optional<BigInt> class_state_count(Context& ctx, const InfonPtr& cls);

    Effects effects;
    Trace trace;
    std::vector<std::string> warnings;

private:
    struct SeqView;  // uniform walker over stores, $-collections, strings

    // --- statements ---
    InfonPtr assert_identity(Context& ctx, const InfonPtr& stmt, Mode mode);
    InfonPtr assert_pair(Context& ctx, const InfonPtr& lhs, const InfonPtr& rhs, Mode mode);
    InfonPtr assert_fact_identity(Context& ctx, const InfonPtr& lhs, const InfonPtr& rhs,
                                  Mode mode);
    InfonPtr partial_identity(Context& ctx, const InfonPtr& stmt, Mode mode);
    InfonPtr handle_contain(Context& ctx, const InfonPtr& stmt, Mode mode);
    InfonPtr handle_seq_contain(Context& ctx, const InfonPtr& stmt, Mode mode, bool via_command);
    InfonPtr eval_for_statement(Context& ctx, const InfonPtr& f, Mode mode);
    InfonPtr execute_command(Context& ctx, const InfonPtr& cmd);
    InfonPtr eval_conditional(Context& ctx, const InfonPtr& c, Mode mode, bool stmt_pos);
    InfonPtr eval_block(Context& ctx, const InfonPtr& coll, Mode mode, bool stmt_pos);

    // Declaration plumbing shared by ':'/'$:' forms and their '!' commands.
    InfonPtr declare_const(Context& ctx, const InfonPtr& cls, const InfonPtr& item, Mode mode,
                           bool via_command);
    InfonPtr declare_sequence(Context& ctx, const InfonPtr& cls, const InfonPtr& item, Mode mode,
                              bool via_command);
    InfonPtr instantiate_object(Context& ctx, const InfonPtr& cls_written, const InfonPtr& matchv,
                                const InfonPtr& item_name, const InfonPtr& init, Mode mode);
    void run_action(Context& ctx, const InfonPtr& action);

    // L-value routine shared by assertion and command realization: binds,
    // appends, shadows, or routes through adapters.
    InfonPtr assign_name(Context& ctx, const InfonPtr& name, const InfonPtr& rhs, Mode mode,
                         bool via_command);

    // --- values ---
    InfonPtr normalize_name(Context& ctx, const InfonPtr& name, Mode mode, bool effects_ok,
                            bool stmt_pos = false);
    InfonPtr normalize_name_segments(Context& ctx, const InfonPtr& name, Mode mode);
    std::optional<InfonPtr> resolve_name(Context& ctx, const InfonPtr& name, Mode mode,
                                         Context** owner = nullptr);
    std::optional<InfonPtr> resolve_bare_word(Context& ctx, const InfonPtr& s, Mode mode);
    InfonPtr expand_template(Context& ctx, const InfonPtr& t, Mode mode, int depth = 0);
    InfonPtr eval_set_op(Context& ctx, const InfonPtr& v, Mode mode);
    std::optional<InfonPtr> expand_for_value(Context& ctx, const InfonPtr& f, Mode mode);
    InfonPtr normalize_children(Context& ctx, const InfonPtr& v, Mode mode);
    bool query_truth(Context& ctx, const InfonPtr& q);
    bool query_equal(Context& ctx, const InfonPtr& a, const InfonPtr& b);
    bool class_subset(Context& ctx, const InfonPtr& sub, const InfonPtr& super, int depth = 0);

    // Rule driver: canonical-order rules, then built-in operations, then
    // shortcuts, then axioms (most recent first). Returns rewritten site.
    std::optional<InfonPtr> try_rules(Context& ctx, const InfonPtr& site, Mode mode,
                                      bool effects_ok);
    std::optional<InfonPtr> try_autoname(Context& ctx, const InfonPtr& site, Mode mode,
                                         bool effects_ok);
    bool match_pattern(Context& ctx, const InfonPtr& pat, const InfonPtr& subj,
                       std::map<std::string, InfonPtr>& binds,
                       const std::map<std::string, InfonPtr>& guards);
    InfonPtr substitute(const InfonPtr& body, const std::map<std::string, InfonPtr>& binds);

    // Randomized rewrite-site selection over a pure expression tree.
    InfonPtr normalize_expr_random(Context& ctx, const InfonPtr& v, Mode mode);
    void collect_sites(Context& ctx, const InfonPtr& v, Mode mode, std::vector<int>& path,
                       std::vector<std::vector<int>>& out);
    // One rewrite (resolution or rule) at a site, no recursive normalization.
    std::optional<InfonPtr> one_step(Context& ctx, const InfonPtr& site, Mode mode);

    bool describes(Context& ctx, const InfonPtr& pattern, const InfonPtr& item);

    void bump(const std::string& rule);
    void note(const std::string& text);
    void record(const std::string& rule, const InfonPtr& before, const InfonPtr& after);

    Engine& eng_;
    const EngineOptions& opt_;
    uint64_t steps_ = 0;
    std::vector<std::string> recent_rules_;
    std::vector<int> path_;
    std::mt19937_64 rng_;
    bool random_mode_ = false;
    bool probing_ = false;      // site probes must not trace, count, or bind
    int trace_mute_ = 0;        // suppress entries inside composite steps
    bool last_resolve_uninit_ = false;  // empty-store read seen by resolve
};

// Builds the directed rules a `for` statement declares (one per identity in
// its body). Throws when the body is not identity-shaped.
std::vector<Rule> rules_from_for(const InfonPtr& f, Rule::Lane lane);

}  // namespace quanta
