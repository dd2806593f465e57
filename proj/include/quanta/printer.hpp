#pragma once

#include <string>

#include "quanta/infon.hpp"

namespace quanta {

// Canonical concrete syntax. Guarantee: parse(serialize(x)) is structurally
// equal to x for any parse-produced or engine-produced infon.
std::string serialize(const InfonPtr& n);

// How console ops and template expansion render a value: strings verbatim
// (no quotes), ints in decimal, bools as words, all else canonical syntax.
std::string render_text(const InfonPtr& n);

std::string quote_string(const std::string& s);
bool bare_word_ok(const std::string& s);

}  // namespace quanta
