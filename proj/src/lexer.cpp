#include "quanta/lexer.hpp"

#include <array>
#include <cctype>

namespace quanta {

namespace {

const std::array<const char*, 9> kKeywords = {
    "for", "if", "else", "true", "false", "difference", "intersection", "complement", "not"};

// Multi-char punctuation, longest first.
const std::array<const char*, 6> kWidePunct = {"...", "::=", "$:", "::", "==", ".."};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    TokenStream run() {
        TokenStream out;
        for (;;) {
            skip_blanks_and_comments();
            if (at_end()) break;
            out.push_back(next_token());
        }
        out.push_back(Token{TokKind::End, "", pos()});
        return out;
    }

private:
    bool at_end() const { return i_ >= src_.size(); }
    char peek(size_t ahead = 0) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }
    SourcePos pos() const { return {line_, col_}; }

    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg, SourcePos p) {
        throw QuantaError(ErrorCode::Lex, msg, p);
    }

    void skip_blanks_and_comments() {
        for (;;) {
            if (at_end()) return;
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                SourcePos start = pos();
                advance();
                advance();
                int depth = 1;
                while (depth > 0) {
                    if (at_end()) fail("unterminated comment", start);
                    if (peek() == '/' && peek(1) == '*') {
                        advance();
                        advance();
                        ++depth;
                    } else if (peek() == '*' && peek(1) == '/') {
                        advance();
                        advance();
                        --depth;
                    } else {
                        advance();
                    }
                }
            } else {
                return;
            }
        }
    }

    Token next_token() {
        SourcePos p = pos();
        char c = peek();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return word(p);
        if (std::isdigit(static_cast<unsigned char>(c))) return number(p);
        if (c == '"' || c == '\'') return string_literal(p, c);
        if (c == '$' && peek(1) == '"') return template_literal(p);

        for (const char* w : kWidePunct) {
            size_t n = std::char_traits<char>::length(w);
            if (src_.compare(i_, n, w) == 0) {
                for (size_t k = 0; k < n; ++k) advance();
                return Token{TokKind::Punct, w, p};
            }
        }

        static const std::string singles = "{}()[]<>.,;!?@#%$+-*/:=";
        if (singles.find(c) != std::string::npos) {
            advance();
            return Token{TokKind::Punct, std::string(1, c), p};
        }
        fail(std::string("unexpected character '") + c + "'", p);
    }

    Token word(SourcePos p) {
        std::string s;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            s.push_back(advance());
        std::string lowered = s;
        for (char& ch : lowered) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (is_keyword_word(lowered)) return Token{TokKind::Keyword, lowered, p};
        return Token{TokKind::Ident, s, p};
    }

    Token number(SourcePos p) {
        std::string s;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) s.push_back(advance());
        return Token{TokKind::Int, s, p};
    }

    // Scans to the matching unescaped quote; returns the raw body.
    std::string raw_string_body(SourcePos p, char quote) {
        advance();  // opening quote
        std::string raw;
        for (;;) {
            if (at_end()) fail("unterminated string literal", p);
            char c = advance();
            if (c == quote) break;
            raw.push_back(c);
            if (c == '\\') {
                if (at_end()) fail("unterminated string literal", p);
                raw.push_back(advance());
            }
        }
        return raw;
    }

    Token string_literal(SourcePos p, char quote) {
        std::string raw = raw_string_body(p, quote);
        return Token{TokKind::String, decode_escapes(raw, p), p};
    }

    Token template_literal(SourcePos p) {
        advance();  // '$'
        std::string raw = raw_string_body(p, '"');
        return Token{TokKind::Template, raw, p};
    }

public:
    static std::string decode_escapes(std::string_view raw, SourcePos p) {
        std::string out;
        out.reserve(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) {
            char c = raw[i];
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (++i >= raw.size()) throw QuantaError(ErrorCode::Lex, "dangling escape", p);
            char e = raw[i];
            switch (e) {
                case 'a': out.push_back('\a'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case 'n': out.push_back('\n'); break;
                case 'r': out.push_back('\r'); break;
                case 't': out.push_back('\t'); break;
                case 'v': out.push_back('\v'); break;
                case '\\': out.push_back('\\'); break;
                case '\'': out.push_back('\''); break;
                case '"': out.push_back('"'); break;
                case '?': out.push_back('?'); break;
                case 'x': {
                    int v = 0, digits = 0;
                    while (i + 1 < raw.size() && std::isxdigit(static_cast<unsigned char>(raw[i + 1])) &&
                           digits < 2) {
                        char h = raw[++i];
                        v = v * 16 + (std::isdigit(static_cast<unsigned char>(h))
                                          ? h - '0'
                                          : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
                        ++digits;
                    }
                    if (digits == 0) throw QuantaError(ErrorCode::Lex, "\\x needs hex digits", p);
                    out.push_back(static_cast<char>(v));
                    break;
                }
                default:
                    if (e >= '0' && e <= '7') {
                        int v = e - '0', digits = 1;
                        while (i + 1 < raw.size() && raw[i + 1] >= '0' && raw[i + 1] <= '7' && digits < 3) {
                            v = v * 8 + (raw[++i] - '0');
                            ++digits;
                        }
                        out.push_back(static_cast<char>(v));
                    } else {
                        throw QuantaError(ErrorCode::Lex, std::string("unknown escape '\\") + e + "'", p);
                    }
            }
        }
        return out;
    }

private:
    std::string_view src_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

bool is_keyword_word(const std::string& lowered) {
    for (const char* k : kKeywords)
        if (lowered == k) return true;
    return false;
}

TokenStream lex(std::string_view source) { return Lexer(source).run(); }

std::string decode_string_escapes(std::string_view raw, SourcePos pos) {
    return Lexer::decode_escapes(raw, pos);
}

}  // namespace quanta
