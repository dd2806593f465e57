#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "quanta/infon.hpp"
#include "quanta/normalize.hpp"

namespace quanta {

// A wire-format description evaluated against a byte stream: collections
// concatenate, literal identities anchor, counted repetitions read as many
// items as a previously bound field says, conditionals pick the alternative
// whose bound fields admit it.
struct ParsedRecord {
    std::vector<InfonPtr> elements;              // stream items, in order
    std::map<std::string, InfonPtr> fields;      // named fields (anchors, counts, tags)
    std::vector<std::string> field_order;        // declaration order for serialization
};

class FormatModel {
public:
    // `pattern` is the description body (the collection under `@`).
    FormatModel(Evaluator& ev, Context& ctx, InfonPtr pattern);

    // Reads one record from `input` starting at `offset`; advances `offset`.
    ParsedRecord parse(const std::string& input, size_t& offset) const;

    // Inverse direction: renders a record back to bytes.
    std::string serialize(const ParsedRecord& rec) const;

private:
    struct Cursor {
        const std::string* s;
        size_t pos;
    };
    // Field names used as repetition bounds frame the stream (they are
    // recorded as fields, not elements).
    using Framing = std::set<std::string>;
    static Framing framing_of(const InfonPtr& pattern);

    void parse_item(const InfonPtr& item, const Framing& framing, Cursor& cur,
                    ParsedRecord& rec) const;
    void serialize_item(const InfonPtr& item, const Framing& framing, const ParsedRecord& rec,
                        std::string& out, size_t& elem_idx) const;
    long long field_int(const ParsedRecord& rec, const std::string& name) const;

    Evaluator& ev_;
    Context& ctx_;
    InfonPtr pattern_;
};

}  // namespace quanta
