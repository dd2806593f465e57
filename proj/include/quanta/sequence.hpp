#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quanta/infon.hpp"

namespace quanta {

// One element of a live sequence. Bidirectional links are real pointers so
// next/prev navigation is O(1) and structurally testable.
struct SeqNode {
    InfonPtr value;
    SeqNode* prev = nullptr;
    SeqNode* next = nullptr;
    size_t index = 0;  // position at append time (append-only, so stable)
};

// The evolving state behind a name declared with '$:'. Append-only; the
// cursor is the engine's R-value position (last written node).
class SequenceStore {
public:
    explicit SequenceStore(InfonPtr element_class) : class_(std::move(element_class)) {}

    SeqNode* append(InfonPtr v);

    size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    SeqNode* first() const { return head_; }
    SeqNode* last() const { return tail_; }
    SeqNode* cursor() const { return cursor_; }
    void set_cursor(SeqNode* n) { cursor_ = n; }
    SeqNode* at(size_t idx) const;

    const InfonPtr& element_class() const { return class_; }

    // Values as an ordered collection (the sequence's value snapshot).
    InfonPtr snapshot() const;
    // start index, element count.
    InfonPtr slice(size_t start, size_t count) const;

    // Named non-element fields captured by format models (headers, lengths,
    // condition codes). Kept in declaration order for serialization.
    const InfonPtr* field(const std::string& name) const;
    void set_field(const std::string& name, InfonPtr v);

    bool adapter_backed = false;
    std::string adapter_name;

private:
    InfonPtr class_;
    std::vector<std::unique_ptr<SeqNode>> nodes_;
    SeqNode* head_ = nullptr;
    SeqNode* tail_ = nullptr;
    SeqNode* cursor_ = nullptr;
    std::map<std::string, InfonPtr> fields_;
};

}  // namespace quanta
