#pragma once

#include <string_view>

#include "quanta/token.hpp"

namespace quanta {

// Tokenizes Quanta source. Throws QuantaError(ErrorCode::Lex) with an exact
// "line:col:" position on malformed input (unterminated string/comment, bad
// escape, stray byte).
TokenStream lex(std::string_view source);

bool is_keyword_word(const std::string& lowered);

// Decodes C-style escapes; used for string literals and the literal pieces of
// template strings (whose bodies are kept raw until span splitting).
std::string decode_string_escapes(std::string_view raw, SourcePos pos);

}  // namespace quanta
