#pragma once

#include <string_view>
#include <unordered_map>

#include "quanta/infon.hpp"
#include "quanta/token.hpp"

namespace quanta {

struct ParseResult {
    InfonPtr root;
    // True when root is a collection synthesized from 2+ top-level
    // statements (as opposed to a literal collection expression).
    bool program_list = false;
    // Node id -> where that node started in the source (best effort for
    // template spans, which re-lex embedded text).
    std::unordered_map<uint64_t, SourcePos> spans;
};

// Parses a whole program. Zero statements yield {}; one statement yields that
// infon; several yield one collection in statement style.
ParseResult parse_program(std::string_view source);

// Parses exactly one infon; trailing tokens are an error.
ParseResult parse_expression(std::string_view source);

}  // namespace quanta
