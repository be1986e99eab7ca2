#include <catch2/catch_amalgamated.hpp>

#include "hypgram/evaluator.hpp"
#include "hypgram/parser.hpp"
#include "hypgram/space.hpp"
#include "reference_interp.hpp"

using namespace hypgram;

namespace {
const std::string kFix = FIXTURE_DIR;

const Table& movies() {
    static Table t = load_csv(kFix + "/movies.csv");
    return t;
}
const Table& rel1() {
    static Table t = load_csv(kFix + "/relation1.csv");
    return t;
}

Verdict run(const std::string& text, const Table& t, EvalOptions opt = {}) {
    auto h = parse_hypothesis(text);
    auto rep = typecheck(h, t);
    INFO(text);
    for (const auto& i : rep.issues) INFO(i.message);
    REQUIRE(rep.ok());
    return eval_hypothesis(h, t, opt).verdict;
}

std::vector<std::string> issues(const std::string& text, const Table& t) {
    auto h = parse_hypothesis(text);
    std::vector<std::string> out;
    for (const auto& i : typecheck(h, t).issues) out.push_back(i.message);
    return out;
}
}  // namespace

// -- type checking ---------------------------------------------------------

TEST_CASE("documented rejections") {
    CHECK_FALSE(issues("KL(market, price) < 1", rel1()).empty());
    CHECK_FALSE(issues("cost[market='US'] < price[market='EU']", rel1()).empty());
    CHECK(issues("KL(cost, price) < 1", rel1()).empty());
    CHECK(issues("cost[market='US'] < price[market='US']", rel1()).empty());
    CHECK(issues("(cost < price)[market='EU']", rel1()).empty());
}

TEST_CASE("unknown attributes and functions are type errors") {
    CHECK_FALSE(issues("Nope < 10", rel1()).empty());
    CHECK_FALSE(issues("NOSUCH(cost) < 10", rel1()).empty());
    CHECK_FALSE(issues("cost < 10 [nope = 1]", rel1()).empty());
}

TEST_CASE("string against number comparisons are type errors") {
    CHECK_FALSE(issues("market < 10", rel1()).empty());
    CHECK_FALSE(issues("'US' + 1 > 0", rel1()).empty());
    CHECK(issues("market = 'US'", rel1()).empty());
}

TEST_CASE("regex needs a string attribute and a valid pattern") {
    CHECK_FALSE(issues("cost < 10 [month ~ '^x']", rel1()).empty());
    CHECK_FALSE(issues("cost < 10 [market ~ '(']", rel1()).empty());
    CHECK(issues("cost < 10 [market ~ '^U']", rel1()).empty());
}

TEST_CASE("in needs a collection") {
    CHECK_FALSE(issues("cost in 5", rel1()).empty());
    CHECK(issues("cost in [0, 10]", rel1()).empty());
    CHECK(issues("month in {1, 2}", rel1()).empty());
}

TEST_CASE("arity mismatches are caught before evaluation") {
    CHECK_FALSE(issues("AVG(cost, price) < 10", rel1()).empty());
    CHECK_FALSE(issues("KL(cost) < 10", rel1()).empty());
}

TEST_CASE("alignment accepts provably identical row sets") {
    // predicates differ textually but select the same rows
    CHECK(issues("cost[month < 4] < price[month <= 3]", rel1()).empty());
    // and different row sets are flagged
    CHECK_FALSE(issues("cost[month=1] < price[month=2]", rel1()).empty());
}

// -- verdicts ----------------------------------------------------------------

TEST_CASE("movies spot checks") {
    CHECK(run("Rating[Title='The Godfather'] = 9.1", movies()) == Verdict::True);
    CHECK(run("AVG(Rating)[Genre='Comedy'] > AVG(Rating)[Genre='Action']", movies()) ==
          Verdict::False);
    CHECK(run("count() > 1 [Year=1999 & Genre='Action']", movies()) == Verdict::False);
    CHECK(run("count() > 1 [Year=1999]", movies()) == Verdict::True);
    CHECK(run("SRES(fit_LM(Year, Rating), Year, Rating) in [-2,2]", movies()) == Verdict::True);
    CHECK(run("KS_normal(Rating) > 0.05", movies()) == Verdict::True);
}

TEST_CASE("relation1 spot checks") {
    CHECK(run("cost < 10", rel1()) == Verdict::True);
    CHECK(run("cost[market='US'] < 10", rel1()) == Verdict::True);
    CHECK(run("cost[market='US'] < price[market='US']", rel1()) == Verdict::True);
    CHECK(run("(cost < price)[market='EU']", rel1()) == Verdict::True);
    CHECK(run("avg(cost) < avg(price)", rel1()) == Verdict::True);
    CHECK(run("avg(cost) < price", rel1()) == Verdict::True);   // flattens: every price
    CHECK(run("avg(price) < cost", rel1()) == Verdict::False);
    CHECK(run("r2.cost = 2", rel1()) == Verdict::True);
    CHECK(run("2 = 2", rel1()) == Verdict::True);
    CHECK(run("avg(cost) - avg(price) < 10 & price > 6", rel1()) == Verdict::True);
    CHECK(run("CORR(month, price) > 0.9", rel1()) == Verdict::True);
}

TEST_CASE("verdict precedence: false beats vacuous") {
    CHECK(run("cost > 0 [market='XX']", rel1()) == Verdict::Vacuous);
    CHECK(run("cost > 0 [market='XX'] & 1 = 2", rel1()) == Verdict::False);
    CHECK(run("cost > 0 [market='XX'] & 1 = 1", rel1()) == Verdict::Vacuous);
}

TEST_CASE("vacuous cases") {
    // empty hypothesis-level selection
    CHECK(run("cost > 0 [month = 99]", rel1()) == Verdict::Vacuous);
    // empty operand selection
    CHECK(run("cost[month = 99] > 0", rel1()) == Verdict::Vacuous);
    // aggregate over an empty selection
    CHECK(run("AVG(cost[month = 99]) > 0", rel1()) == Verdict::Vacuous);
    // count() is exempt: it just reports zero
    CHECK(run("count() > 0 [month = 99]", rel1()) == Verdict::False);
    CHECK(run("count() = 0 [month = 99]", rel1()) == Verdict::True);
    // constants-only clauses ignore the selection entirely
    CHECK(run("1 < 2 [month = 99]", rel1()) == Verdict::True);
}

TEST_CASE("vacuous-as-true flag") {
    EvalOptions opt;
    opt.vacuous_as_true = true;
    CHECK(run("cost > 0 [month = 99]", rel1(), opt) == Verdict::True);
    CHECK(run("cost > 0 [month = 99] & 1 = 2", rel1(), opt) == Verdict::False);
}

TEST_CASE("aggregate comparisons get a relative tolerance") {
    // AVG(cost) = 3.5 exactly representable; compare against a long literal
    CHECK(run("AVG(cost) = 3.5000000000000004", rel1()) == Verdict::True);
    CHECK(run("AVG(cost) = 3.51", rel1()) == Verdict::False);
    // direct column comparisons stay exact
    CHECK(run("cost[id=1] = 1.0000000001", rel1()) == Verdict::False);
    // tolerance also tempers strict inequalities on aggregates
    CHECK(run("AVG(cost) < 3.5000000000000004", rel1()) == Verdict::False);
}

TEST_CASE("vector-vector comparisons require aligned rows at runtime") {
    auto h = parse_hypothesis("cost[month<=2] < price[month>=3]");
    CHECK_FALSE(typecheck(h, rel1()).ok());  // caught statically here
    // same rows, different predicates: fine
    CHECK(run("cost[month<=2] < price[month<3]", rel1()) == Verdict::True);
}

TEST_CASE("model values coerce to their fit quality") {
    CHECK(run("fit_LM(cost, price) > 0.99", rel1()) == Verdict::True);   // r^2 = 1
    CHECK(run("fit_LM(month, price) < 0.9", rel1()) == Verdict::True);   // r^2 ~ .864
}

TEST_CASE("regex and membership operators in clauses") {
    CHECK(run("market ~ '^U' [market='US']", rel1()) == Verdict::True);
    CHECK(run("month in [1,4]", rel1()) == Verdict::True);
    CHECK(run("month not in [5,9]", rel1()) == Verdict::True);
    CHECK(run("cost in [2,4]", rel1()) == Verdict::False);
}

TEST_CASE("division by zero is an evaluation error, not a verdict") {
    auto h = parse_hypothesis("cost / 0 > 1");
    REQUIRE(typecheck(h, rel1()).ok());
    CHECK_THROWS_AS(eval_hypothesis(h, rel1()), EvalError);
}

TEST_CASE("evaluation emits a trace") {
    auto h = parse_hypothesis("AVG(cost) < AVG(price)");
    auto out = eval_hypothesis(h, rel1());
    CHECK(out.verdict == Verdict::True);
    CHECK_FALSE(out.trace.children.empty());
}

TEST_CASE("chained equalities evaluate clause by clause") {
    CHECK(run("count()[market='US'] = 4 = 4", rel1()) == Verdict::True);
    CHECK(run("count()[market='US'] = count()[market='EU']", rel1()) == Verdict::False);
}

// -- agreement with the naive reference interpreter -------------------------

TEST_CASE("random grounded hypotheses agree with the reference interpreter") {
    GrammarSpec g = parse_grammar(
        "hyp :- func1 \"(\" attr1 \")\" op1 func2 \"(\" attr2 \")\"\n"
        "func1 :- AVG | SUM | MAX | MIN | STDEV\n"
        "func2 :- AVG | SUM | MAX | MIN | STDEV\n"
        "attr1 :- month | cost | price\n"
        "attr2 :- month | cost | price\n"
        "op1 :- ...\n");
    GrammarSpec gd = ground(g, rel1());
    SpaceLimits lim;
    lim.limit = 1u << 20;
    auto sentences = enumerate_sentences(gd, lim);
    REQUIRE(sentences.size() == 5 * 3 * 9 * 5 * 3);
    int checked = 0;
    for (const auto& s : sentences) {
        auto h = parse_hypothesis(s);
        if (!typecheck(h, rel1()).ok()) continue;
        auto expect = refinterp::ref_verdict(h, rel1());
        if (!expect) continue;
        INFO(s);
        CHECK(eval_hypothesis(h, rel1()).verdict == *expect);
        ++checked;
    }
    CHECK(checked > 1200);
}

TEST_CASE("random predicated hypotheses agree with the reference interpreter") {
    GrammarSpec g = parse_grammar(
        "hyp :- AVG \"(\" attr1 \"[\" month op1 const1 \"]\" \")\" op2 func1 \"(\" attr1 \")\"\n"
        "func1 :- AVG | MIN | count\n"
        "attr1 :- cost | price\n"
        "op1 :- = | < | > | <= | >=\n"
        "op2 :- ...\n"
        "const1 :- number\n");
    GrammarSpec gd = ground(g, rel1());
    auto sentences = enumerate_sentences(gd);
    REQUIRE(sentences.size() == 2 * 5 * 4 * 9 * 3);
    int agree = 0;
    for (const auto& s : sentences) {
        auto h = parse_hypothesis(s);
        if (!typecheck(h, rel1()).ok()) continue;
        auto expect = refinterp::ref_verdict(h, rel1());
        if (!expect) continue;
        INFO(s);
        CHECK(eval_hypothesis(h, rel1()).verdict == *expect);
        ++agree;
    }
    CHECK(agree > 400);
}
