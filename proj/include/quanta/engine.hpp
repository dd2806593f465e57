#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quanta/context.hpp"
#include "quanta/infon.hpp"
#include "quanta/rule.hpp"
#include "quanta/trace.hpp"

namespace quanta {

class Evaluator;

enum class Mode { Assert, Query, Command };

struct EngineOptions {
    uint64_t step_budget = 1000000;  // rewrite steps before a divergence error
    bool trace = false;              // collect rewrite traces
    bool use_autonames = true;       // built-in operation rules participate
    bool reverse_axioms = false;     // try user axioms right-to-left instead
    std::optional<uint64_t> random_seed;  // randomized rewrite-site selection
};

struct Effects {
    std::string console;                 // accumulated write/writeln/print output
    std::vector<std::string> external;   // adapter calls, in order
};

// A built-in operation: fires only when its arguments are specific enough
// and its effect class is allowed in the current mode.
struct Autoname {
    enum class Effect { Pure, Console, ReadsWorld, WritesWorld };
    std::string name;
    Effect effect = Effect::Pure;
    // Returns the result, or nullopt to leave the call symbolic.
    std::function<std::optional<InfonPtr>(Evaluator&, Context&, const std::vector<InfonPtr>&,
                                          Mode, bool effects_ok)>
        handler;
};

// External world hook: reads fire in query/command mode, writes only in
// command mode. A failed write raises an effect error.
struct ExternalAdapter {
    std::function<std::optional<InfonPtr>(const std::vector<InfonPtr>&)> read;
    std::function<bool(const std::vector<InfonPtr>&)> write;
};

// Result of evaluating one source unit (statement, line, or file).
struct Outcome {
    std::string handle;      // "obj:N", stable, never reused
    InfonPtr value;          // normal form
    Effects effects;
    Trace trace;
    std::vector<std::string> warnings;
};

class Engine {
public:
    explicit Engine(EngineOptions opt = {});
    ~Engine();

    Context& world() { return *world_; }
    const EngineOptions& options() const { return opt_; }
    EngineOptions& options() { return opt_; }

    // Context registry (contexts self-register on construction).
    void register_context(Context* c);
    void unregister_context(uint64_t id);
    Context* context_by_id(uint64_t id) const;

    uint64_t next_rule_seq() { return ++rule_seq_; }

    // Built-in operations.
    void add_autoname(Autoname a);
    const Autoname* find_autoname(const std::string& name) const;

    // External adapters, addressed by the head word of the call form.
    void add_adapter(const std::string& name, ExternalAdapter a);
    ExternalAdapter* find_adapter(const std::string& name);
    // Routes reads/writes of a declared name in `ctx` through an adapter.
    void bind_adapter(Context& ctx, const std::string& word, const std::string& adapter);

    // Evaluates parsed statements in `ctx`; a synthesized program collection
    // is unrolled so its statements bind directly in `ctx`.
    Outcome eval_source(Context& ctx, const std::string& source);
    Outcome eval_infon(Context& ctx, const InfonPtr& stmt);

    // Handle table: every outcome gets a fresh "obj:N".
    const Outcome* find_handle(const std::string& handle) const;
    bool delete_handle(const std::string& handle);  // drops any owned context

    // Registers a rewrite rule parsed from `src` (a `for` statement or a
    // ground identity) with a fixed display name and lane.
    void register_prelude_rule(const std::string& src, const std::string& display,
                               Rule::Lane lane);

private:
    std::string store_outcome(Outcome&& o);

    EngineOptions opt_;
    // Declared before world_ so the registry outlives the context tree
    // (contexts unregister themselves on destruction).
    std::map<uint64_t, Context*> contexts_;
    std::unique_ptr<Context> world_;
    uint64_t rule_seq_ = 0;
    std::vector<Autoname> autonames_;
    std::map<std::string, ExternalAdapter> adapters_;
    std::map<std::string, Outcome> handles_;
    uint64_t handle_no_ = 0;
};

// Installs arithmetic/comparison/console operations, the class bindings for
// <ints>, <numbers>, <strings>, <chars>, <bools>, and the two stock shortcuts.
void install_builtins(Engine& eng);

// Interactive/batch session layered over an engine: a chain of child
// contexts so later lines see earlier bindings and may shadow them.
class Session {
public:
    explicit Session(Engine& eng);
    Outcome eval_line(const std::string& line);
    Context& current() { return *cur_; }

private:
    Engine& eng_;
    Context* cur_;  // tail of the line chain; contexts are owned by parents
};

}  // namespace quanta
