#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hypgram/lexer.hpp"
#include "hypgram/parser.hpp"

using namespace hypgram;

TEST_CASE("lexing basics") {
    auto toks = lex("AVG(Rating) >= 9.1");
    REQUIRE(toks.size() == 7);  // AVG ( Rating ) >= 9.1 <end>
    CHECK(toks[0].kind == Token::Kind::Ident);
    CHECK(toks[4].text == ">=");
    CHECK(toks[5].num == Catch::Approx(9.1));
    CHECK(toks.back().kind == Token::Kind::End);
}

TEST_CASE("unicode operators normalize to ascii") {
    CHECK(lex("a ∈ b")[1].text == "in");
    CHECK(lex("a ∉ b")[1].text == "not");
    CHECK(lex("a ≠ b")[1].text == "!=");
    CHECK(lex("a ≤ b")[1].text == "<=");
    CHECK(lex("a ≥ b")[1].text == ">=");
}

TEST_CASE("hyphenated identifiers stay single tokens") {
    auto toks = lex("Gate-name ~ \"^entrance\"");
    CHECK(toks[0].text == "Gate-name");
    CHECK(toks[1].text == "~");
    CHECK(toks[2].kind == Token::Kind::String);
}

TEST_CASE("quote style does not affect token equality") {
    auto a = lex("'US'");
    auto b = lex("\"US\"");
    CHECK(a[0].same(b[0]));
}

TEST_CASE("comments are skipped") {
    auto toks = lex("cost < 10 # trailing note");
    REQUIRE(toks.size() == 4);
    CHECK(toks[2].num == 10);
}

TEST_CASE("parse simple comparison") {
    auto h = parse_hypothesis("cost < 10");
    REQUIRE(h.clauses.size() == 1);
    CHECK(h.clauses[0].lhs.kind == ExprNode::Kind::VarRef);
    CHECK(h.clauses[0].op == OpKind::Lt);
    CHECK(h.clauses[0].rhs.value.num == 10);
}

TEST_CASE("dot notation desugars to an id predicate") {
    auto a = parse_hypothesis("r2.cost = 2");
    auto b = parse_hypothesis("cost[id=2] = 2");
    CHECK(a == b);
}

TEST_CASE("conjunction flattens to clauses") {
    auto h = parse_hypothesis("cost < 10 & price > 6 & count() > 1");
    CHECK(h.clauses.size() == 3);
}

TEST_CASE("chained comparisons flatten pairwise") {
    auto h = parse_hypothesis("count()[State='CA'] = count()[State='NY'] = count()[State='UT']");
    REQUIRE(h.clauses.size() == 2);
    CHECK(h.clauses[0].rhs == h.clauses[1].lhs);
}

TEST_CASE("hypothesis-level predicate binds to the clause") {
    auto h = parse_hypothesis("(cost < price)[market='US']");
    REQUIRE(h.clauses.size() == 1);
    REQUIRE(h.clauses[0].pred.has_value());
    CHECK_FALSE(h.clauses[0].lhs.pred.has_value());
}

TEST_CASE("trailing predicate after a comparison is hypothesis-level") {
    auto h = parse_hypothesis("count() > 1 [Year=1999 & Genre='Action']");
    REQUIRE(h.clauses[0].pred.has_value());
    CHECK(h.clauses[0].pred->conjuncts.size() == 2);
}

TEST_CASE("negated predicate conjunct") {
    auto h = parse_hypothesis("(count() > 0)[!(Car-type ~ \"ranger\")]");
    REQUIRE(h.clauses[0].pred.has_value());
    CHECK(h.clauses[0].pred->conjuncts[0].negated);
    CHECK(h.clauses[0].pred->conjuncts[0].op == OpKind::RegexMatch);
}

TEST_CASE("intervals and arrays") {
    auto h = parse_hypothesis("Hour in [0,7)");
    const auto& c = h.clauses[0].rhs.value;
    CHECK(c.kind == ConstValue::Kind::Interval);
    CHECK(c.lo_closed);
    CHECK_FALSE(c.hi_closed);

    auto h2 = parse_hypothesis("month in [1,2,3]");
    CHECK(h2.clauses[0].rhs.value.kind == ConstValue::Kind::Array);
    CHECK(h2.clauses[0].op == OpKind::In);

    CHECK_THROWS_AS(parse_hypothesis("x in [1,'a']"), ParseError);
}

TEST_CASE("prefix arithmetic and infix sugar agree") {
    auto a = parse_hypothesis("-(avg(cost), avg(price)) < 10");
    auto b = parse_hypothesis("avg(cost) - avg(price) < 10");
    CHECK(a == b);
}

TEST_CASE("infix precedence: mul binds tighter") {
    auto h = parse_hypothesis("avg(cost) + 2 * stdev(cost) > 0");
    const auto& lhs = h.clauses[0].lhs;
    REQUIRE(lhs.name == "+");
    CHECK(lhs.args[1].name == "*");
}

TEST_CASE("unary minus on literals folds") {
    auto h = parse_hypothesis("Corr(a, b) < -0.75");
    CHECK(h.clauses[0].rhs.value.num == Catch::Approx(-0.75));
}

TEST_CASE("predicate value may be an expression") {
    auto e = parse_expression("Director[AwardsWon=MAX(AwardsWon)]");
    REQUIRE(e.pred.has_value());
    CHECK(e.pred->conjuncts[0].value.front().kind == ExprNode::Kind::FuncCall);
}

TEST_CASE("bare identifiers in predicates are string constants") {
    auto h = parse_hypothesis("count()[Event=SNAP] > 0");
    const auto& v = h.clauses[0].lhs.pred->conjuncts[0].value.front();
    CHECK(v.value.kind == ConstValue::Kind::Str);
    CHECK(v.value.str == "SNAP");
}

TEST_CASE("parse errors carry position and expectations") {
    try {
        parse_hypothesis("Rating[");
        FAIL("no exception");
    } catch (const ParseError& e) {
        CHECK_FALSE(e.expected.empty());
        CHECK(e.span.begin >= 7);
    }
}

TEST_CASE("too many call arguments rejected") {
    CHECK_THROWS_AS(parse_hypothesis("f(a,b,c,d) > 0"), ParseError);
}

// -- round-trip property --------------------------------------------------

namespace {

struct Gen {
    std::mt19937 rng;
    explicit Gen(unsigned seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    ConstValue constant() {
        switch (pick(4)) {
            case 0: return ConstValue::number(pick(2000) - 1000 + pick(100) / 100.0);
            case 1: return ConstValue::string(pick(2) ? "US" : "a b'c");
            case 2: return ConstValue::boolean_(pick(2) == 0);
            default: {
                if (pick(2)) {
                    double lo = pick(50), hi = lo + pick(50);
                    return ConstValue::interval(lo, hi, pick(2), pick(2));
                }
                std::vector<ConstValue> el;
                for (int i = 0, n = 1 + pick(3); i < n; ++i)
                    el.push_back(ConstValue::number(pick(100)));
                return ConstValue::array(std::move(el));
            }
        }
    }

    PredNode pred(int depth) {
        PredNode p;
        int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) {
            PredNode::Conjunct cj;
            cj.negated = pick(4) == 0;
            cj.attr = pick(2) ? "month" : "market";
            cj.op = static_cast<OpKind>(pick(6));
            ExprNode v;
            if (depth > 0 && pick(4) == 0)
                v = expr(depth - 1, /*scalar_ctx=*/true);
            else
                v = ExprNode::constant(scalar_constant());
            cj.value.push_back(std::move(v));
            p.conjuncts.push_back(std::move(cj));
        }
        return p;
    }

    ConstValue scalar_constant() {
        switch (pick(3)) {
            case 0: return ConstValue::number(pick(100));
            case 1: return ConstValue::string("US");
            default: return ConstValue::boolean_(true);
        }
    }

    ExprNode expr(int depth, bool scalar_ctx = false) {
        int kind = depth == 0 ? pick(2) : pick(3);
        if (kind == 0 && !scalar_ctx) {
            std::optional<PredNode> p;
            if (depth > 0 && pick(2)) p = pred(depth - 1);
            return ExprNode::var(pick(2) ? "cost" : "price", std::move(p));
        }
        if (kind <= 1) return ExprNode::constant(constant());
        static const char* fns[] = {"AVG", "SUM", "MAX", "count", "KL"};
        std::string fn = fns[pick(5)];
        std::vector<ExprNode> args;
        int arity = fn == "count" ? 0 : fn == "KL" ? 2 : 1;
        for (int i = 0; i < arity; ++i) args.push_back(expr(depth - 1));
        std::optional<PredNode> p;
        if (depth > 0 && pick(3) == 0) p = pred(depth - 1);
        return ExprNode::call(fn, std::move(args), std::move(p));
    }

    HypothesisAst hypothesis() {
        HypothesisAst h;
        int n = 1 + pick(2);
        for (int i = 0; i < n; ++i) {
            Clause cl;
            cl.lhs = expr(2);
            cl.op = static_cast<OpKind>(pick(9));
            if (cl.op == OpKind::In || cl.op == OpKind::NotIn) {
                std::vector<ConstValue> el{ConstValue::number(1), ConstValue::number(2)};
                cl.rhs = ExprNode::constant(pick(2) ? ConstValue::interval(0, 7, true, false)
                                                    : ConstValue::array(std::move(el)));
            } else if (cl.op == OpKind::RegexMatch) {
                cl.rhs = ExprNode::constant(ConstValue::string("^entrance"));
            } else {
                cl.rhs = expr(2);
            }
            if (pick(3) == 0) cl.pred = pred(1);
            h.clauses.push_back(std::move(cl));
        }
        return h;
    }
};

}  // namespace

TEST_CASE("pretty-print round-trips to an equal AST") {
    Gen g(20260826);
    for (int i = 0; i < 500; ++i) {
        HypothesisAst h = g.hypothesis();
        std::string text = pretty_print(h);
        INFO(text);
        HypothesisAst back = parse_hypothesis(text);
        CHECK(back == h);
        CHECK(pretty_print(back) == text);  // printing is a fixpoint
    }
}

TEST_CASE("grammar files round-trip") {
    const char* src =
        " hyp :- expr \"<\" 10\n"
        "expr :- func \"(cost,\" attr1 \")\"\n"
        "func :- KL | CORR | EMD\n"
        "attr1 :- \"month\" | \"price\" | ...\n";
    GrammarSpec g = parse_grammar(src);
    GrammarSpec again = parse_grammar(print_grammar(g));
    CHECK(g == again);
}

TEST_CASE("grammar alternation and optional groups") {
    GrammarSpec g = parse_grammar("hyp :- (hyp1 | hyp2) (\"&\" hyp)?\nhyp1 :- \"a = 1\"\nhyp2 :- \"b = 2\"");
    const GrammarRule* r = g.find("hyp");
    REQUIRE(r);
    REQUIRE(r->alts.size() == 1);
    CHECK(r->alts[0].size() == 2);
    CHECK(r->alts[0][1].optional);
}

TEST_CASE("undefined single-use nonterminals become terminals, vocabulary names do not") {
    // `foo` has no definition: treated as a literal token
    GrammarSpec g = parse_grammar("hyp :- foo \"=\" 1");
    CHECK(g.find("foo") == nullptr);
    // but `pred` is part of the shared vocabulary, so it must be defined
    CHECK_THROWS_AS(parse_grammar("hyp :- (count() > 0)[pred]"), SpaceError);
}

TEST_CASE("copy suffixes resolve to their base rule") {
    GrammarSpec g = parse_grammar("hyp :- const1 \"=\" const1\nconst1 :- datetime");
    CHECK(g.copy_base("const1") == "const");
    CHECK(g.copy_base("expr23") == "expr");
    CHECK(g.is_copy("const1"));
    CHECK_FALSE(g.is_copy("const"));
}
