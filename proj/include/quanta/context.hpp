#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "quanta/infon.hpp"
#include "quanta/rule.hpp"
#include "quanta/sequence.hpp"

namespace quanta {

class Engine;

// A recorded containment / identity statement, used for membership closure
// and identity-equivalence reasoning (measure dedup, query verification).
struct Fact {
    enum class Rel { Identity, Partial, Contain, SeqContain };
    Rel rel;
    InfonPtr lhs;
    InfonPtr rhs;
};

struct Binding {
    bool declared = false;        // explicit ':' / '$:' declaration seen
    InfonPtr declared_class;      // membership constraint; null if none
    InfonPtr value;               // const value; null until first identity
    std::shared_ptr<SequenceStore> seq;  // live store for '$:' names
    std::string adapter;          // non-empty: reads/writes via this adapter
    uint64_t object_ctx = 0;      // object instance context, if any

    bool is_sequence() const { return seq != nullptr; }
};

// A node of the context tree rooted at World. Owns its bindings, facts,
// rules and children; lookup walks toward the root.
class Context {
public:
    Context(Engine* engine, Context* parent, std::string label);
    ~Context();

    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;

    uint64_t id() const { return id_; }
    Context* parent() const { return parent_; }
    const std::string& label() const { return label_; }
    Engine* engine() const { return engine_; }

    Context* make_child(const std::string& label);
    // Detaches and destroys a direct or transitive child.
    bool drop_descendant(uint64_t id);

    bool frozen = false;
    void check_mutable() const;

    // --- bindings -----------------------------------------------------------
    Binding* find_local(const std::string& key);
    const Binding* find_local(const std::string& key) const;
    // Walks this context and its ancestors; also reports the owning context.
    Binding* find(const std::string& key, Context** owner = nullptr);
    Binding& ensure_local(const std::string& key);
    const std::map<std::string, Binding>& bindings() const { return bindings_; }

    // --- facts and rules ----------------------------------------------------
    void add_fact(Fact f);
    void add_rule(Rule r);
    const std::vector<Fact>& facts() const { return facts_; }
    const std::vector<Rule>& rules() const { return rules_; }

    // All facts visible from this context, innermost scope first.
    void visible_facts(std::vector<const Fact*>& out) const;
    // All rules visible from this context in search order: per scope
    // (innermost first), most recent first within a scope.
    void visible_rules(std::vector<const Rule*>& out) const;

private:
    Engine* engine_;
    Context* parent_;
    std::string label_;
    uint64_t id_;
    std::map<std::string, Binding> bindings_;
    std::vector<Fact> facts_;
    std::vector<Rule> rules_;
    std::vector<std::unique_ptr<Context>> children_;
};

// Binding keys: canonical serialization of normalized name segments joined
// with a separator that cannot appear in canonical syntax output.
std::string segment_key(const InfonPtr& segment);
std::string path_key(const InfonList& segments, size_t count);

}  // namespace quanta
