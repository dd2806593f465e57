#include "quanta/printer.hpp"

#include <cctype>

#include "quanta/lexer.hpp"

namespace quanta {

namespace {

const char* arith_op(const std::string& head) {
    if (head == "sum") return " + ";
    if (head == "difference") return " - ";
    if (head == "product") return " * ";
    if (head == "quotient") return " / ";
    return nullptr;
}

// Kinds whose spelling is self-delimiting and safe as an operand or segment.
bool atom_kind(const InfonPtr& n) {
    switch (n->kind) {
        case Kind::Collection:
        case Kind::Array:
        case Kind::Int:
        case Kind::Bool:
        case Kind::Name:
        case Kind::Var:
        case Kind::Match:
        case Kind::SeqClass:
        case Kind::Template:
        case Kind::BuiltinClass:
            return true;
        case Kind::String:
            return true;  // quoted or bare word, both fine
        default:
            return false;
    }
}

std::string out(const InfonPtr& n, bool need_atom);

// Postfix forms bind to the whole phrase when reparsed, so as an operand
// they must carry their own parentheses.
bool postfix_kind(const InfonPtr& n) {
    return n->kind == Kind::Command || n->kind == Kind::BoolQuery;
}

std::string flags_prefix(const InfonPtr& n) {
    std::string p;
    if (n->flatten) p += "#";
    return p;
}

std::string collection_body(const InfonPtr& n) {
    bool stmt_style = false;
    for (const auto& m : n->children) {
        switch (m->kind) {
            case Kind::Identity:
            case Kind::PartialId:
            case Kind::Contain:
            case Kind::SeqContain:
            case Kind::Command:
            case Kind::For:
            case Kind::Conditional:
                stmt_style = true;
                break;
            default:
                break;
        }
    }
    std::string s = "{";
    if (stmt_style) {
        for (const auto& m : n->children) s += out(m, false) + "; ";
        if (n->open_ended) s += "...; ";
        if (s.size() > 1) s.pop_back();  // trailing space
    } else {
        for (size_t i = 0; i < n->children.size(); ++i) {
            if (i) s += ", ";
            s += out(n->children[i], postfix_kind(n->children[i]));
        }
        if (n->open_ended) s += n->children.empty() ? "..." : ", ...";
    }
    s += "}";
    return s;
}

std::string name_body(const InfonPtr& n) {
    std::string s = "<";
    for (size_t i = 0; i < n->children.size(); ++i) {
        if (i) s += ".";
        const InfonPtr& seg = n->children[i];
        if (seg->kind == Kind::Int && seg->ival.is_negative()) {
            s += "(" + seg->ival.str() + ")";
        } else {
            s += out(seg, true);
        }
        if (seg->seq_flag && seg->kind != Kind::Collection && seg->kind != Kind::IntRange &&
            seg->kind != Kind::SeqClass && seg->kind != Kind::Template)
            s += "$";
    }
    s += ">";
    return s;
}

std::string out(const InfonPtr& n, bool need_atom) {
    std::string body;
    switch (n->kind) {
        case Kind::Int:
            body = n->ival.str();
            if (n->ival.is_negative() && need_atom) body = "(" + body + ")";
            return flags_prefix(n) + body;
        case Kind::Bool:
            return flags_prefix(n) + (n->bval ? "true" : "false");
        case Kind::String:
            return flags_prefix(n) + (bare_word_ok(n->text) ? n->text : quote_string(n->text));
        case Kind::Var:
            return flags_prefix(n) + "%" + n->text;
        case Kind::BuiltinClass:
            return flags_prefix(n) + "<" + n->text + ">";
        case Kind::Collection:
            return flags_prefix(n) + (n->seq_flag ? "$" : "") + collection_body(n);
        case Kind::Array: {
            std::string s = "[";
            for (size_t i = 0; i < n->children.size(); ++i) {
                if (i) s += ", ";
                s += out(n->children[i], postfix_kind(n->children[i]));
            }
            return flags_prefix(n) + s + "]";
        }
        case Kind::Name: {
            // Two-argument arithmetic calls print infix, fully parenthesized.
            if (auto head = call_head(n)) {
                if (const char* op = arith_op(*head)) {
                    InfonList args = call_args(n);
                    if (args.size() == 2)
                        return flags_prefix(n) + "(" + out(args[0], true) + op +
                               out(args[1], true) + ")";
                }
            }
            return flags_prefix(n) + name_body(n);
        }
        case Kind::SeqClass:
            return flags_prefix(n) + "$" + out(n->children[0], true);
        case Kind::Match:
            return flags_prefix(n) + "@" + out(n->children[0], true);
        case Kind::Template: {
            std::string s = "$\"";
            for (size_t i = 0; i < n->tpl_text.size(); ++i) {
                for (char c : n->tpl_text[i]) {
                    if (c == '%') {
                        s += "%%";
                    } else if (c == '"' || c == '\\') {
                        s += std::string("\\") + c;
                    } else if (c == '\n') {
                        s += "\\n";
                    } else if (c == '\t') {
                        s += "\\t";
                    } else {
                        s += c;
                    }
                }
                if (i < n->children.size()) s += "%" + out(n->children[i], false) + "%";
            }
            s += "\"";
            return flags_prefix(n) + s;
        }
        case Kind::Identity: {
            for (size_t i = 0; i < n->children.size(); ++i) {
                if (i) body += " == ";
                body += out(n->children[i], true);
            }
            break;
        }
        case Kind::PartialId:
            body = out(n->children[0], true) + " ::= " + out(n->children[1], true);
            break;
        case Kind::Contain:
            body = out(n->children[0], true) + " :";
            if (n->children.size() > 1)
                body += " " + out(n->children[1], postfix_kind(n->children[1]));
            break;
        case Kind::SeqContain:
            body = out(n->children[0], true) + " $: " +
                   out(n->children[1], postfix_kind(n->children[1]));
            break;
        case Kind::IntRange:
            body = std::string(n->seq_flag ? "$" : "") + out(n->children[0], true) + ".." +
                   out(n->children[1], true);
            break;
        case Kind::BoolQuery:
            body = out(n->children[0], true) + "?";
            break;
        case Kind::Command:
            body = out(n->children[0], true) + "!";
            break;
        case Kind::Difference:
            body = "difference(" + out(n->children[0], postfix_kind(n->children[0])) + ", " +
                   out(n->children[1], postfix_kind(n->children[1])) + ")";
            return flags_prefix(n) + body;
        case Kind::Intersection:
            body = "intersection " + out(n->children[0], true);
            break;
        case Kind::Complement:
            body = "complement " + out(n->children[0], true);
            break;
        case Kind::Conditional: {
            body = std::string(n->seq_flag ? "$" : "") + "if " + out(n->children[0], true) + " " +
                   out(n->children[1], true);
            if (n->children.size() > 2) body += " else " + out(n->children[2], true);
            break;
        }
        case Kind::For: {
            body = std::string(n->seq_flag ? "$" : "") + "for ";
            for (size_t i = 0; i < n->for_vars.size(); ++i) {
                if (i) body += ", ";
                body += std::string(n->for_vars[i].ordered ? "$" : "") + n->for_vars[i].token +
                        ": " + out(n->children[i], true);
            }
            body += " :: " + out(n->children.back(), false);
            break;
        }
    }
    if (need_atom && !atom_kind(n)) body = "(" + body + ")";
    return flags_prefix(n) + body;
}

}  // namespace

bool bare_word_ok(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    std::string lowered = s;
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return !is_keyword_word(lowered);
}

std::string quote_string(const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
        switch (c) {
            case '"': q += "\\\""; break;
            case '\\': q += "\\\\"; break;
            case '\n': q += "\\n"; break;
            case '\t': q += "\\t"; break;
            case '\r': q += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    static const char* hex = "0123456789abcdef";
                    q += "\\x";
                    q += hex[(c >> 4) & 0xf];
                    q += hex[c & 0xf];
                } else {
                    q += c;
                }
        }
    }
    q += "\"";
    return q;
}

std::string serialize(const InfonPtr& n) { return out(n, false); }

std::string render_text(const InfonPtr& n) {
    switch (n->kind) {
        case Kind::String:
            return n->text;
        case Kind::Int:
            return n->ival.str();
        case Kind::Bool:
            return n->bval ? "true" : "false";
        default:
            return serialize(n);
    }
}

}  // namespace quanta
