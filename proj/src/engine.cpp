#include "quanta/engine.hpp"

#include "quanta/error.hpp"
#include "quanta/normalize.hpp"
#include "quanta/parser.hpp"

namespace quanta {

Engine::Engine(EngineOptions opt) : opt_(std::move(opt)) {
    world_ = std::make_unique<Context>(this, nullptr, "World");
    install_builtins(*this);
}

Engine::~Engine() = default;

void Engine::register_context(Context* c) { contexts_[c->id()] = c; }

void Engine::unregister_context(uint64_t id) { contexts_.erase(id); }

Context* Engine::context_by_id(uint64_t id) const {
    auto it = contexts_.find(id);
    return it == contexts_.end() ? nullptr : it->second;
}

void Engine::add_autoname(Autoname a) { autonames_.push_back(std::move(a)); }

const Autoname* Engine::find_autoname(const std::string& name) const {
    for (const auto& a : autonames_)
        if (a.name == name) return &a;
    return nullptr;
}

void Engine::add_adapter(const std::string& name, ExternalAdapter a) {
    adapters_[name] = std::move(a);
}

ExternalAdapter* Engine::find_adapter(const std::string& name) {
    auto it = adapters_.find(name);
    return it == adapters_.end() ? nullptr : &it->second;
}

void Engine::bind_adapter(Context& ctx, const std::string& word, const std::string& adapter) {
    Binding& b = ctx.ensure_local(word);
    b.declared = true;
    b.adapter = adapter;
}

Outcome Engine::eval_source(Context& ctx, const std::string& source) {
    ParseResult pr = parse_program(source);
    Evaluator ev(*this, opt_);
    Outcome o;
    if (pr.program_list) {
        InfonList results;
        for (const auto& stmt : pr.root->children)
            results.push_back(ev.eval_statement(ctx, stmt, Mode::Assert));
        o.value = results.size() == 1 ? results[0] : mk_collection(std::move(results));
    } else {
        o.value = ev.eval_statement(ctx, pr.root, Mode::Assert);
    }
    o.effects = std::move(ev.effects);
    o.trace = std::move(ev.trace);
    o.warnings = std::move(ev.warnings);
    std::string h = store_outcome(std::move(o));
    return *find_handle(h);
}

Outcome Engine::eval_infon(Context& ctx, const InfonPtr& stmt) {
    Evaluator ev(*this, opt_);
    Outcome o;
    o.value = ev.eval_statement(ctx, stmt, Mode::Assert);
    o.effects = std::move(ev.effects);
    o.trace = std::move(ev.trace);
    o.warnings = std::move(ev.warnings);
    std::string h = store_outcome(std::move(o));
    return *find_handle(h);
}

std::string Engine::store_outcome(Outcome&& o) {
    std::string handle = "obj:" + std::to_string(++handle_no_);
    o.handle = handle;
    handles_[handle] = std::move(o);
    return handle;
}

const Outcome* Engine::find_handle(const std::string& handle) const {
    auto it = handles_.find(handle);
    return it == handles_.end() ? nullptr : &it->second;
}

bool Engine::delete_handle(const std::string& handle) {
    auto it = handles_.find(handle);
    if (it == handles_.end()) return false;
    if (it->second.value && it->second.value->ctx_id)
        world_->drop_descendant(it->second.value->ctx_id);
    handles_.erase(it);
    return true;
}

void Engine::register_prelude_rule(const std::string& src, const std::string& display,
                                   Rule::Lane lane) {
    ParseResult pr = parse_expression(src);
    std::vector<Rule> rs;
    if (pr.root->kind == Kind::For) {
        rs = rules_from_for(pr.root, lane);
    } else if (pr.root->kind == Kind::Identity && pr.root->children.size() == 2) {
        Rule r;
        r.lhs = pr.root->children[0];
        r.rhs = pr.root->children[1];
        r.lane = lane;
        rs.push_back(std::move(r));
    } else {
        throw QuantaError(ErrorCode::Usage, "prelude rule must be a 'for' or an identity");
    }
    for (Rule& r : rs) {
        r.display = display;
        world_->add_rule(std::move(r));
    }
}

Session::Session(Engine& eng) : eng_(eng) {
    cur_ = eng.world().make_child("session");
}

Outcome Session::eval_line(const std::string& line) {
    Context* next = cur_->make_child("line");
    Outcome o = eng_.eval_source(*next, line);
    cur_ = next;
    return o;
}

}  // namespace quanta
