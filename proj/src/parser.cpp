#include "quanta/parser.hpp"

#include "quanta/lexer.hpp"

namespace quanta {

namespace {

class Parser {
public:
    Parser(TokenStream toks, ParseResult& result) : toks_(std::move(toks)), res_(result) {}

    InfonPtr program() {
        InfonList stmts;
        for (;;) {
            while (accept_punct(";")) {
            }
            if (peek().is(TokKind::End)) break;
            stmts.push_back(statement());
            if (!peek().is(TokKind::End) && !peek().is_punct(";"))
                fail("expected ';' between statements");
        }
        if (stmts.empty()) return empty_collection();
        if (stmts.size() == 1) return stmts[0];
        res_.program_list = true;
        return mk_collection(std::move(stmts));
    }

    InfonPtr single() {
        InfonPtr e = infon();
        while (accept_punct(";")) {
        }
        if (!peek().is(TokKind::End)) fail("trailing input after infon");
        return e;
    }

private:
    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    bool accept_punct(const char* p) {
        if (peek().is_punct(p)) {
            take();
            return true;
        }
        return false;
    }
    bool accept_keyword(const char* k) {
        if (peek().is_keyword(k)) {
            take();
            return true;
        }
        return false;
    }
    void expect_punct(const char* p, const char* what) {
        if (!accept_punct(p)) fail(std::string("expected '") + p + "' " + what);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string found = t.is(TokKind::End) ? "end of input" : "'" + t.text + "'";
        throw QuantaError(ErrorCode::Parse, msg + " (found " + found + ")", t.pos);
    }

    InfonPtr at(InfonPtr n, SourcePos p) {
        res_.spans[n->id] = p;
        return n;
    }

    // A statement is just an infon; the distinction is positional.
    InfonPtr statement() {
        if (peek().is_punct("#")) return member();
        return infon();
    }

    InfonPtr infon() { return command_level(); }

    InfonPtr command_level() {
        InfonPtr e = query_level();
        while (peek().is_punct("!")) {
            SourcePos p = take().pos;
            e = at(mk_command(e), p);
        }
        return e;
    }

    InfonPtr query_level() {
        InfonPtr e = identity_level();
        while (peek().is_punct("?")) {
            SourcePos p = take().pos;
            e = at(mk_query(e), p);
        }
        return e;
    }

    bool starts_infon(const Token& t) const {
        switch (t.kind) {
            case TokKind::Ident:
            case TokKind::Int:
            case TokKind::String:
            case TokKind::Template:
                return true;
            case TokKind::Keyword:
                return t.text == "true" || t.text == "false" || t.text == "for" ||
                       t.text == "if" || t.text == "difference" || t.text == "intersection" ||
                       t.text == "complement" || t.text == "not";
            case TokKind::Punct: {
                static const char* starters[] = {"<", "{", "[", "(", "@", "%", "$", "-"};
                for (const char* s : starters)
                    if (t.text == s) return true;
                return false;
            }
            default:
                return false;
        }
    }

    InfonPtr identity_level() {
        SourcePos p = peek().pos;
        InfonPtr e = range_level();
        if (peek().is_punct("=")) fail("'=' is not an operator; identity is spelled '=='");
        if (peek().is_punct("==")) {
            InfonList terms{e};
            while (accept_punct("==")) terms.push_back(range_level());
            return at(mk_identity(std::move(terms)), p);
        }
        if (accept_punct("::=")) return at(mk_partial_id(e, identity_level()), p);
        if (peek().is_punct(":")) {
            take();
            InfonPtr item;
            if (starts_infon(peek())) item = identity_level();
            return at(mk_contain(e, item), p);
        }
        if (accept_punct("$:")) return at(mk_seq_contain(e, identity_level()), p);
        return e;
    }

    InfonPtr range_level() {
        SourcePos p = peek().pos;
        InfonPtr e = additive();
        if (accept_punct("..")) return at(mk_range(e, additive(), false), p);
        return e;
    }

    InfonPtr additive() {
        InfonPtr e = multiplicative();
        for (;;) {
            SourcePos p = peek().pos;
            if (accept_punct("+")) {
                e = at(mk_call("sum", {e, multiplicative()}), p);
            } else if (accept_punct("-")) {
                e = at(mk_call("difference", {e, multiplicative()}), p);
            } else {
                return e;
            }
        }
    }

    InfonPtr multiplicative() {
        InfonPtr e = primary();
        for (;;) {
            SourcePos p = peek().pos;
            if (accept_punct("*")) {
                e = at(mk_call("product", {e, primary()}), p);
            } else if (accept_punct("/")) {
                e = at(mk_call("quotient", {e, primary()}), p);
            } else {
                return e;
            }
        }
    }

    InfonPtr primary() {
        const Token& t = peek();
        SourcePos p = t.pos;
        switch (t.kind) {
            case TokKind::Int: {
                take();
                return at(mk_int(BigInt::parse(t.text)), p);
            }
            case TokKind::String: {
                take();
                return at(mk_string(t.text), p);
            }
            case TokKind::Template:
                return template_literal(take());
            case TokKind::Ident:
                return word_primary();
            case TokKind::Keyword: {
                if (accept_keyword("true")) return at(mk_bool(true), p);
                if (accept_keyword("false")) return at(mk_bool(false), p);
                if (peek().is_keyword("for")) return for_infon(false);
                if (peek().is_keyword("if")) return conditional(false);
                if (accept_keyword("difference")) {
                    expect_punct("(", "after 'difference'");
                    InfonPtr a = infon();
                    expect_punct(",", "between difference operands");
                    InfonPtr b = infon();
                    expect_punct(")", "after difference operands");
                    return at(mk_difference(a, b), p);
                }
                if (accept_keyword("intersection")) return at(mk_intersection(primary()), p);
                if (accept_keyword("complement") || accept_keyword("not"))
                    return at(mk_complement(primary()), p);
                fail("unexpected keyword");
            }
            case TokKind::Punct: {
                if (accept_punct("(")) {
                    InfonPtr e = infon();
                    expect_punct(")", "to close '('");
                    return e;
                }
                if (t.text == "-") {
                    take();
                    if (!peek().is(TokKind::Int)) fail("expected integer after unary '-'");
                    const Token& num = take();
                    return at(mk_int(-BigInt::parse(num.text)), p);
                }
                if (t.text == "<") return name_infon();
                if (t.text == "{") return collection(false);
                if (t.text == "[") return array_infon();
                if (accept_punct("@")) return at(mk_match(infon()), p);
                if (accept_punct("%")) {
                    if (!peek().is(TokKind::Ident)) fail("expected variable name after '%'");
                    return at(mk_var(take().text), p);
                }
                if (t.text == "$") return dollar_primary();
                fail("unexpected token");
            }
            default:
                fail("unexpected end of input");
        }
    }

    InfonPtr dollar_primary() {
        SourcePos p = take().pos;  // '$'
        const Token& t = peek();
        if (t.is_punct("{")) return collection(true);
        if (t.is_punct("<")) return at(mk_seq_class(name_infon()), p);
        if (t.is_keyword("for")) return for_infon(true);
        if (t.is_keyword("if")) return conditional(true);
        if (t.is(TokKind::Int) || t.is_punct("(") || t.is_punct("-")) {
            InfonPtr lo = additive();
            expect_punct("..", "in ordered range");
            return at(mk_range(lo, additive(), true), p);
        }
        fail("unexpected '$'");
    }

    InfonPtr word_primary() {
        const Token& head = take();
        SourcePos p = head.pos;
        if (accept_punct("(")) {
            InfonList args;
            if (!accept_punct(")")) {
                args.push_back(infon());
                while (accept_punct(",")) args.push_back(infon());
                expect_punct(")", "to close argument list");
            }
            return at(mk_call(head.text, std::move(args)), p);
        }
        if (peek().is_punct(".")) {
            InfonList segs{at(mk_string(head.text), p)};
            while (accept_punct(".")) {
                const Token& s = peek();
                if (s.is(TokKind::Ident)) {
                    take();
                    segs.push_back(at(mk_string(s.text), s.pos));
                } else if (s.is(TokKind::Int)) {
                    take();
                    segs.push_back(at(mk_int(BigInt::parse(s.text)), s.pos));
                } else {
                    fail("expected name segment after '.'");
                }
            }
            return at(mk_name(std::move(segs)), p);
        }
        return at(mk_string(head.text), p);
    }

    InfonPtr name_infon() {
        SourcePos p = peek().pos;
        expect_punct("<", "to open name");
        InfonList segs;
        for (;;) {
            segs.push_back(segment());
            if (accept_punct(".")) continue;
            expect_punct(">", "to close name");
            break;
        }
        return at(mk_name(std::move(segs)), p);
    }

    InfonPtr segment() {
        const Token& t = peek();
        SourcePos p = t.pos;
        InfonPtr seg;
        switch (t.kind) {
            case TokKind::Ident:
                take();
                seg = at(mk_string(t.text), p);
                break;
            case TokKind::Int:
                take();
                seg = at(mk_int(BigInt::parse(t.text)), p);
                break;
            case TokKind::String:
                take();
                seg = at(mk_string(t.text), p);
                break;
            case TokKind::Template:
                seg = template_literal(take());
                break;
            case TokKind::Keyword:
                if (t.text == "true" || t.text == "false") {
                    take();
                    seg = at(mk_bool(t.text == "true"), p);
                    break;
                }
                fail("keyword cannot be a name segment");
            case TokKind::Punct:
                if (t.text == "[") {
                    seg = array_infon();
                    break;
                }
                if (t.text == "{") {
                    seg = collection(false);
                    break;
                }
                if (t.text == "<") {
                    seg = name_infon();
                    break;
                }
                if (t.text == "(") {
                    take();
                    seg = infon();
                    expect_punct(")", "to close '(' in name segment");
                    break;
                }
                if (accept_punct("%")) {
                    if (!peek().is(TokKind::Ident)) fail("expected variable name after '%'");
                    seg = at(mk_var(take().text), p);
                    break;
                }
                if (t.text == "$") {
                    seg = dollar_primary();
                    break;
                }
                fail("unexpected token in name segment");
            default:
                fail("unexpected end of input in name");
        }
        if (accept_punct("$")) seg = with_flags(seg, true, seg->flatten);
        return seg;
    }

    InfonPtr collection(bool seq) {
        SourcePos p = peek().pos;
        expect_punct("{", "to open collection");
        InfonList members;
        bool open = false;
        if (accept_punct("}")) return at(mk_collection({}, seq), p);

        if (accept_punct("...")) {
            open = true;
            // Only separators may follow an open marker.
            while (accept_punct(";") || accept_punct(",")) {
            }
            expect_punct("}", "after '...'");
            return at(mk_collection({}, seq, true), p);
        }

        members.push_back(member());
        if (peek().is_punct(";")) {
            while (accept_punct(";")) {
                if (peek().is_punct("}")) break;
                if (accept_punct("...")) {
                    open = true;
                    accept_punct(";");
                    break;
                }
                members.push_back(member());
            }
        } else if (peek().is_punct(",")) {
            while (accept_punct(",")) {
                if (accept_punct("...")) {
                    open = true;
                    break;
                }
                members.push_back(member());
            }
        }
        expect_punct("}", "to close collection");
        return at(mk_collection(std::move(members), seq, open), p);
    }

    InfonPtr member() {
        if (accept_punct("#")) {
            InfonPtr m = infon();
            return with_flags(m, m->seq_flag, true);
        }
        return infon();
    }

    InfonPtr array_infon() {
        SourcePos p = peek().pos;
        expect_punct("[", "to open array");
        InfonList elems;
        if (!accept_punct("]")) {
            elems.push_back(infon());
            while (accept_punct(",")) elems.push_back(infon());
            expect_punct("]", "to close array");
        }
        return at(mk_array(std::move(elems)), p);
    }

    InfonPtr for_infon(bool ordered) {
        SourcePos p = peek().pos;
        if (!accept_keyword("for")) fail("expected 'for'");
        std::vector<ForVar> vars;
        InfonList ranges;
        for (;;) {
            bool vseq = accept_punct("$");
            const Token& v = peek();
            if (!v.is(TokKind::Ident)) fail("expected loop variable");
            take();
            expect_punct(":", "after loop variable");
            ranges.push_back(range_level());
            vars.push_back(ForVar{v.text, vseq});
            if (!accept_punct(",")) break;
        }
        expect_punct("::", "before loop body");
        InfonPtr body = infon();
        return at(mk_for(std::move(vars), std::move(ranges), body, ordered), p);
    }

    InfonPtr conditional(bool ordered) {
        SourcePos p = peek().pos;
        if (!accept_keyword("if")) fail("expected 'if'");
        InfonPtr cond = query_level();
        InfonPtr then_branch = branch_body();
        InfonPtr else_branch;
        if (accept_keyword("else")) else_branch = branch_body();
        return at(mk_conditional(cond, then_branch, else_branch, ordered), p);
    }

    // Branches parse below '?' so a trailing query binds to the whole
    // conditional only when parenthesized.
    InfonPtr branch_body() {
        if (peek().is_punct("#")) return member();
        return identity_level();
    }

    InfonPtr template_literal(const Token& tok) {
        const std::string& raw = tok.text;
        std::vector<std::string> texts;
        InfonList spans;
        std::string cur;
        size_t i = 0;
        while (i < raw.size()) {
            char c = raw[i];
            if (c == '\\' && i + 1 < raw.size()) {
                cur.push_back(c);
                cur.push_back(raw[i + 1]);
                i += 2;
                continue;
            }
            if (c != '%') {
                cur.push_back(c);
                ++i;
                continue;
            }
            if (i + 1 < raw.size() && raw[i + 1] == '%') {
                cur.push_back('%');
                i += 2;
                continue;
            }
            // Span: scan to the closing single '%'.
            size_t j = i + 1;
            std::string code;
            while (j < raw.size() && raw[j] != '%') code.push_back(raw[j++]);
            if (j >= raw.size())
                throw QuantaError(ErrorCode::Parse, "unterminated '%' span in template", tok.pos);
            texts.push_back(decode_string_escapes(cur, tok.pos));
            cur.clear();
            ParseResult sub;
            Parser sp(lex(code), sub);
            spans.push_back(sp.single());
            i = j + 1;
        }
        texts.push_back(decode_string_escapes(cur, tok.pos));
        return at(mk_template(std::move(texts), std::move(spans)), tok.pos);
    }

    TokenStream toks_;
    size_t pos_ = 0;
    ParseResult& res_;
};

}  // namespace

ParseResult parse_program(std::string_view source) {
    ParseResult res;
    Parser p(lex(source), res);
    res.root = p.program();
    return res;
}

ParseResult parse_expression(std::string_view source) {
    ParseResult res;
    Parser p(lex(source), res);
    res.root = p.single();
    return res;
}

}  // namespace quanta
