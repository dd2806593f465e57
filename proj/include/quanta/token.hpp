#pragma once

#include <string>
#include <vector>

#include "quanta/error.hpp"

namespace quanta {

enum class TokKind {
    Ident,     // bare word that is not a keyword
    Keyword,   // for if else true false difference intersection complement not
    Int,       // decimal digit run (sign handled by the parser)
    String,    // "..." or '...'; text holds the decoded value
    Template,  // $"..."; text holds the *raw* body (spans split by the parser)
    Punct,     // one of the operator/delimiter spellings
    End,
};

struct Token {
    TokKind kind = TokKind::End;
    std::string text;  // decoded value (strings) or exact spelling
    SourcePos pos;

    bool is(TokKind k) const { return kind == k; }
    bool is_punct(const char* p) const { return kind == TokKind::Punct && text == p; }
    bool is_keyword(const char* k) const { return kind == TokKind::Keyword && text == k; }
};

using TokenStream = std::vector<Token>;

}  // namespace quanta
