#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "quanta/infon.hpp"
#include "quanta/lexer.hpp"
#include "quanta/parser.hpp"
#include "quanta/printer.hpp"
#include "support.hpp"

using namespace quanta;

TEST_CASE("lexer classifies the token kinds") {
    TokenStream ts = lex("<Sum.5> == 12; // trailing comment\nif x? \"str\" $\"t%1%\" 0..4");
    REQUIRE(!ts.empty());
    CHECK(ts[0].is_punct("<"));
    CHECK(ts[1].kind == TokKind::Ident);
    CHECK(ts[1].text == "Sum");
    CHECK(ts[2].is_punct("."));
    CHECK(ts[3].kind == TokKind::Int);
    CHECK(ts.back().kind == TokKind::End);

    bool saw_if = false, saw_string = false, saw_template = false, saw_range = false;
    for (const Token& t : ts) {
        if (t.is_keyword("if")) saw_if = true;
        if (t.kind == TokKind::String && t.text == "str") saw_string = true;
        if (t.kind == TokKind::Template) saw_template = true;
        if (t.is_punct("..")) saw_range = true;
    }
    CHECK(saw_if);
    CHECK(saw_string);
    CHECK(saw_template);
    CHECK(saw_range);
}

TEST_CASE("keyword case is ignored") {
    CHECK(lex("IF")[0].is_keyword("if"));
    CHECK(lex("For")[0].is_keyword("for"));
    CHECK(lex("TRUE")[0].is_keyword("true"));
}

TEST_CASE("lexer reports bad input with positions") {
    try {
        lex("\"unterminated");
        FAIL("expected a lex error");
    } catch (const QuantaError& e) {
        CHECK(e.code() == ErrorCode::Lex);
        CHECK(e.pos().line == 1);
    }
}

TEST_CASE("both collection syntaxes produce equal trees") {
    InfonPtr commas = parse_expression("{red, green, blue}").root;
    InfonPtr semis = parse_expression("{red; green; blue;}").root;
    CHECK(structural_equal(commas, semis));
}

TEST_CASE("a dollar collection carries the sequence flag") {
    InfonPtr c = parse_expression("${red, green, blue}").root;
    REQUIRE(c->kind == Kind::Collection);
    CHECK(c->seq_flag);
    CHECK(c->children.size() == 3);
}

TEST_CASE("alternate call spellings parse to the same name form") {
    InfonPtr a = parse_expression("Sum(5, 3)").root;
    InfonPtr b = parse_expression("<Sum.[5, 3]>").root;
    CHECK(structural_equal(a, b));
    // Infix arithmetic is the lowercase operation name; words keep their case.
    InfonPtr plus = parse_expression("5 + 3").root;
    CHECK(structural_equal(parse_expression("sum(5, 3)").root, plus));
    CHECK(!structural_equal(a, plus));
    InfonPtr sq1 = parse_expression("Sqrt(9)").root;
    REQUIRE(sq1->kind == Kind::Name);
}

TEST_CASE("a hash prefix is recorded as a flatten flag") {
    InfonPtr c = parse_expression("{red, #{a, b}, blue}").root;
    REQUIRE(c->children.size() == 3);
    CHECK(!c->children[0]->flatten);
    CHECK(c->children[1]->flatten);
}

TEST_CASE("marker punctuation maps to the statement kinds") {
    CHECK(parse_expression("<A> == 5").root->kind == Kind::Identity);
    CHECK(parse_expression("<A> ::= 5").root->kind == Kind::PartialId);
    CHECK(parse_expression("<ints> : <A>").root->kind == Kind::Contain);
    CHECK(parse_expression("<ints> $: <A>").root->kind == Kind::SeqContain);
    CHECK(parse_expression("(<A> == 5)!").root->kind == Kind::Command);
    CHECK(parse_expression("(<A> == 5)?").root->kind == Kind::BoolQuery);
    CHECK(parse_expression("@(<c> == red)").root->kind == Kind::Match);
    CHECK(parse_expression("0..4").root->kind == Kind::IntRange);
    CHECK(parse_expression("[red, green]").root->kind == Kind::Array);
    CHECK(parse_expression("if x? a else b").root->kind == Kind::Conditional);
    CHECK(parse_expression("for x : <ints> :: %x").root->kind == Kind::For);
    CHECK(parse_expression("difference({a}, {b})").root->kind == Kind::Difference);
    CHECK(parse_expression("intersection {{a}, {b}}").root->kind == Kind::Intersection);
    CHECK(parse_expression("complement {a}").root->kind == Kind::Complement);
}

TEST_CASE("parse errors carry positions and the parse error code") {
    for (const char* bad : {"<A> ==", "{a, b", "5 +", "for x ::", "<>"}) {
        try {
            parse_expression(bad);
            FAIL_CHECK("expected parse error for: " << bad);
        } catch (const QuantaError& e) {
            CHECK(e.code() == ErrorCode::Parse);
        }
    }
}

namespace {

// Random closed-ish infon trees exercising every printable construct.
InfonPtr random_infon(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 5 : 13);
    std::uniform_int_distribution<int> small(0, 9);
    std::uniform_int_distribution<int> sign(0, 1);
    switch (pick(rng)) {
        case 0:
            return mk_int(BigInt((sign(rng) ? -1 : 1) * small(rng)));
        case 1:
            return mk_string("w" + std::to_string(small(rng)));
        case 2:
            return mk_string("spaced text " + std::to_string(small(rng)));
        case 3:
            return mk_bool(small(rng) % 2 == 0);
        case 4:
            return mk_var("v" + std::to_string(small(rng)));
        case 5:
            return mk_name1("N" + std::to_string(small(rng)));
        case 6: {
            InfonList ms;
            int n = small(rng) % 4;
            for (int i = 0; i < n; ++i) ms.push_back(random_infon(rng, depth - 1));
            return mk_collection(std::move(ms), small(rng) % 2 == 0, small(rng) % 3 == 0);
        }
        case 7: {
            InfonList ms;
            int n = small(rng) % 3;
            for (int i = 0; i < n; ++i) ms.push_back(random_infon(rng, depth - 1));
            return mk_array(std::move(ms));
        }
        case 8:
            return mk_identity({random_infon(rng, depth - 1), random_infon(rng, depth - 1)});
        case 9:
            return mk_contain(mk_name1("C" + std::to_string(small(rng))),
                              random_infon(rng, depth - 1));
        case 10:
            return mk_query(random_infon(rng, depth - 1));
        case 11:
            return mk_command(random_infon(rng, depth - 1));
        case 12:
            return mk_range(mk_int(BigInt(small(rng))), mk_int(BigInt(small(rng) + 10)),
                            small(rng) % 2 == 0);
        default:
            return mk_call("f" + std::to_string(small(rng)),
                           {random_infon(rng, depth - 1), random_infon(rng, depth - 1)});
    }
}

}  // namespace

TEST_CASE("serialize then reparse reproduces the tree") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 500; ++i) {
        InfonPtr t = random_infon(rng, 4);
        std::string text = serialize(t);
        CAPTURE(text);
        InfonPtr back = parse_expression(text).root;
        CHECK(structural_equal(t, back));
        // And the printed form is already a fixed point.
        CHECK(serialize(back) == text);
    }
}

TEST_CASE("corpus files reparse to their own serialization") {
    const char* files[] = {"arith_sum.qta",  "mult_table.qta", "course_totals.qta",
                           "obj_age.qta",    "templates.qta",  "format_models.qta",
                           "interspersed.qta"};
    for (const char* f : files) {
        std::string src = testsup::slurp(std::string(QUANTA_CORPUS_DIR) + "/" + f);
        REQUIRE(!src.empty());
        InfonPtr t = parse_program(src).root;
        InfonPtr back = parse_program(serialize(t)).root;
        CHECK(structural_equal(t, back));
    }
}
