#include "quanta/context.hpp"

#include <atomic>

#include "quanta/engine.hpp"
#include "quanta/error.hpp"
#include "quanta/printer.hpp"

namespace quanta {

namespace {
std::atomic<uint64_t> ctx_counter{1};
}

Context::Context(Engine* engine, Context* parent, std::string label)
    : engine_(engine), parent_(parent), label_(std::move(label)), id_(ctx_counter.fetch_add(1)) {
    if (engine_) engine_->register_context(this);
}

Context::~Context() {
    // Children unregister first (members destroyed after this body runs), so
    // do it explicitly to keep the registry exact.
    children_.clear();
    if (engine_) engine_->unregister_context(id_);
}

Context* Context::make_child(const std::string& label) {
    check_mutable();
    children_.push_back(std::unique_ptr<Context>(new Context(engine_, this, label)));
    return children_.back().get();
}

bool Context::drop_descendant(uint64_t id) {
    for (auto it = children_.begin(); it != children_.end(); ++it) {
        if ((*it)->id() == id) {
            children_.erase(it);
            return true;
        }
        if ((*it)->drop_descendant(id)) return true;
    }
    return false;
}

void Context::check_mutable() const {
    if (frozen)
        throw QuantaError(ErrorCode::Frozen, "context '" + label_ + "' is frozen");
}

Binding* Context::find_local(const std::string& key) {
    auto it = bindings_.find(key);
    return it == bindings_.end() ? nullptr : &it->second;
}

const Binding* Context::find_local(const std::string& key) const {
    auto it = bindings_.find(key);
    return it == bindings_.end() ? nullptr : &it->second;
}

Binding* Context::find(const std::string& key, Context** owner) {
    for (Context* c = this; c; c = c->parent_) {
        if (Binding* b = c->find_local(key)) {
            if (owner) *owner = c;
            return b;
        }
    }
    return nullptr;
}

Binding& Context::ensure_local(const std::string& key) {
    check_mutable();
    return bindings_[key];
}

void Context::add_fact(Fact f) {
    check_mutable();
    facts_.push_back(std::move(f));
}

void Context::add_rule(Rule r) {
    check_mutable();
    r.seq_no = engine_ ? engine_->next_rule_seq() : 0;
    rules_.push_back(std::move(r));
}

void Context::visible_facts(std::vector<const Fact*>& out) const {
    for (const Context* c = this; c; c = c->parent_) {
        for (const auto& f : c->facts_) out.push_back(&f);
    }
}

void Context::visible_rules(std::vector<const Rule*>& out) const {
    for (const Context* c = this; c; c = c->parent_) {
        for (auto it = c->rules_.rbegin(); it != c->rules_.rend(); ++it) out.push_back(&*it);
    }
}

std::string segment_key(const InfonPtr& segment) { return serialize(segment); }

std::string path_key(const InfonList& segments, size_t count) {
    std::string key;
    for (size_t i = 0; i < count && i < segments.size(); ++i) {
        if (i) key.push_back('\x1f');
        key += segment_key(segments[i]);
    }
    return key;
}

}  // namespace quanta
