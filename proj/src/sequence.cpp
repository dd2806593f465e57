#include "quanta/sequence.hpp"

namespace quanta {

SeqNode* SequenceStore::append(InfonPtr v) {
    auto node = std::make_unique<SeqNode>();
    node->value = std::move(v);
    node->prev = tail_;
    node->index = nodes_.size();
    SeqNode* raw = node.get();
    if (tail_) tail_->next = raw;
    tail_ = raw;
    if (!head_) head_ = raw;
    nodes_.push_back(std::move(node));
    cursor_ = raw;
    return raw;
}

SeqNode* SequenceStore::at(size_t idx) const {
    if (idx >= nodes_.size()) return nullptr;
    return nodes_[idx].get();
}

InfonPtr SequenceStore::snapshot() const {
    InfonList vals;
    vals.reserve(nodes_.size());
    for (const auto& n : nodes_) vals.push_back(n->value);
    return mk_collection(std::move(vals), /*seq=*/true);
}

InfonPtr SequenceStore::slice(size_t start, size_t count) const {
    InfonList vals;
    for (size_t i = start; i < start + count && i < nodes_.size(); ++i)
        vals.push_back(nodes_[i]->value);
    return mk_collection(std::move(vals), /*seq=*/true);
}

const InfonPtr* SequenceStore::field(const std::string& name) const {
    auto it = fields_.find(name);
    return it == fields_.end() ? nullptr : &it->second;
}

void SequenceStore::set_field(const std::string& name, InfonPtr v) { fields_[name] = std::move(v); }

}  // namespace quanta
