// End-to-end acceptance gate. Prints one pass/fail line per criterion and
// exits nonzero if any fails. Run through ctest or directly.
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hypgram/hypgram.hpp"
#include "reference_interp.hpp"

using namespace hypgram;
namespace fs = std::filesystem;

namespace {
const std::string kFix = FIXTURE_DIR;
const std::string kCli = CLI_PATH;

constexpr double kTolRel = 1e-9;    // aggregate comparison tolerance
constexpr double kSymTol = 1e-12;   // CORR argument-order symmetry
constexpr double kFitTol = 1e-9;    // exact-line fit recovery

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

GrammarSpec load_grammar(const std::string& name) {
    return parse_grammar(slurp(kFix + "/corpus/" + name));
}

const Table& table(const std::string& file) {
    static std::map<std::string, Table> cache;
    auto it = cache.find(file);
    if (it == cache.end()) it = cache.emplace(file, load_csv(kFix + "/" + file)).first;
    return it->second;
}

Verdict verdict_of(const std::string& text, const Table& t) {
    auto h = parse_hypothesis(text);
    auto rep = typecheck(h, t);
    if (!rep.ok()) throw std::runtime_error("typecheck failed: " + text);
    return eval_hypothesis(h, t).verdict;
}

std::string run_cli(const std::string& args) {
    std::string cmd = kCli + " " + args + " 2>&1";
    std::array<char, 4096> buf;
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed");
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    pclose(p);
    return out;
}

Value fcall(const std::string& name, std::vector<Value> args) {
    FuncContext ctx;
    return FunctionRegistry::instance().call(name, args, ctx);
}

Value vec(std::vector<double> v) {
    std::vector<double> ids;
    for (std::size_t i = 0; i < v.size(); ++i) ids.push_back(double(i + 1));
    return Value::vector(std::move(v), std::move(ids));
}

struct Check {
    bool ok = true;
    std::string detail;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

// 1. the whole statement/grammar corpus parses and round-trips
Check criterion1() {
    Check c;
    int n = 0;
    for (const auto& e : fs::directory_iterator(kFix + "/corpus")) {
        std::string ext = e.path().extension().string();
        std::string name = e.path().filename().string();
        std::string text = slurp(e.path().string());
        try {
            if (ext == ".hyp") {
                auto h = parse_hypothesis(text);
                c.require(parse_hypothesis(pretty_print(h)) == h, name + " round-trip");
                ++n;
            } else if (ext == ".expr") {
                auto x = parse_expression(text);
                c.require(parse_expression(pretty_print(x)) == x, name + " round-trip");
                ++n;
            } else if (ext == ".hg") {
                auto g = parse_grammar(text);
                c.require(print_grammar(parse_grammar(print_grammar(g))) == print_grammar(g),
                          name + " round-trip");
                ++n;
            }
        } catch (const std::exception& ex) {
            c.require(false, name + ": " + ex.what());
        }
    }
    c.require(n >= 35, "corpus has only " + std::to_string(n) + " statements");
    return c;
}

// 2. verdicts on the movie table
Check criterion2() {
    Check c;
    const Table& t = table("movies.csv");
    c.require(verdict_of("Rating[Title='The Godfather'] = 9.1", t) == Verdict::True,
              "godfather rating");
    c.require(verdict_of("AVG(Rating)[Genre='Comedy'] > AVG(Rating)[Genre='Action']", t) ==
                  Verdict::False,
              "comedy vs action (both average 8.7)");
    c.require(verdict_of("count() > 1 [Year=1999 & Genre='Action']", t) == Verdict::False,
              "1999 action count");

    GrammarSpec g = ground(load_grammar("movies_year_split.hg"), t);
    auto sentences = enumerate_sentences(g);
    c.require(sentences.size() == 4, "year grammar should yield 4 hypotheses");
    for (const auto& s : sentences) {
        Verdict v = eval_hypothesis(parse_hypothesis(s), t).verdict;
        c.require(v != Verdict::True, "year split unexpectedly true: " + s);
    }
    return c;
}

// 3. static rejection of ill-typed and misaligned comparisons
Check criterion3() {
    Check c;
    const Table& t = table("relation1.csv");
    c.require(!typecheck(parse_hypothesis("KL(market, price) < 1"), t).ok(),
              "KL over a string column must not typecheck");
    c.require(!typecheck(parse_hypothesis("cost[market='US'] < price[market='EU']"), t).ok(),
              "comparison across disjoint row sets must not typecheck");
    return c;
}

// 4. grammar-space operations: ground, size, containment, shared copies
Check criterion4() {
    Check c;
    const Table& t = table("relation1.csv");
    GrammarSpec sim = ground(load_grammar("sim.hg"), t);
    auto sz = size(sim);
    c.require(sz.exact && sz.n == 12, "similarity space must contain exactly 12 sentences");

    GrammarSpec base = load_grammar("base.hg");
    for (const auto& s : enumerate_sentences(sim))
        c.require(member(base, s), "not in the base space: " + s);

    GrammarSpec narrow = ground(load_grammar("sim_funcs.hg"), t);
    GrammarSpec kl_only = parse_grammar(
        "hyp :- func \"(\" \"cost\" \",\" \"price\" \")\" \"<\" 10\nfunc :- KL\n");
    c.require(contains(kl_only, narrow), "KL-only space must be contained in KL|CORR|EMD");
    c.require(!contains(narrow, kl_only), "containment must not hold in reverse");

    GrammarSpec years = ground(load_grammar("movies_year_split.hg"), table("movies.csv"));
    auto sentences = enumerate_sentences(years);
    c.require(sentences.size() == 4, "year space must contain 4 sentences");
    for (const auto& s : sentences) {
        auto h = parse_hypothesis(s);
        const auto& lhs = h.clauses[0].lhs.args[0];
        const auto& rhs = h.clauses[0].rhs.args[0];
        bool shared = lhs.pred && rhs.pred &&
                      lhs.pred->conjuncts[0].value.front().value.num ==
                          rhs.pred->conjuncts[0].value.front().value.num;
        c.require(shared, "constant copies differ within: " + s);
    }
    return c;
}

// 5. sensor fixture: odd entrance counts found by the hypothesis space
Check criterion5() {
    Check c;
    const Table& t = table("vast_sensor.csv");

    // brute-force recount straight off the raw cells
    int car_col = t.attr_index("Car-id");
    int gate_col = t.attr_index("Gate-name");
    std::map<std::string, int> entries;
    std::set<std::string> cars;
    for (std::size_t r = 0; r < t.rows; ++r) {
        std::string car = num_to_string(t.cols[car_col].nums[r]);
        cars.insert(car);
        if (t.cols[gate_col].strs[r].rfind("entrance", 0) == 0) ++entries[car];
    }
    std::set<std::string> odd;
    for (const auto& [car, n] : entries)
        if (n % 2 == 1) odd.insert(car);
    c.require(cars.size() == 200, "fixture must contain 200 distinct cars");
    c.require(odd.size() == 3, "fixture must plant exactly 3 odd-count cars, found " +
                                   std::to_string(odd.size()));

    GrammarSpec g = ground(load_grammar("vast_h1.hg"), t);
    auto sz = size(g);
    c.require(sz.exact && sz.n == 200, "grounded space must have one sentence per car");

    std::set<std::string> flagged;
    for (const auto& s : enumerate_sentences(g)) {
        auto h = parse_hypothesis(s);
        if (eval_hypothesis(h, t).verdict != Verdict::True) continue;
        for (const auto& cj : h.clauses[0].pred->conjuncts)
            if (cj.attr == "Car-id")
                flagged.insert(num_to_string(cj.value.front().value.num));
    }
    c.require(flagged == odd, "hypothesis space must flag exactly the planted cars");
    return c;
}

// 6. engine verdicts agree with a naive reference interpreter
Check criterion6() {
    Check c;
    const Table& t = table("relation1.csv");
    std::vector<std::string> grammars = {
        "hyp :- func1 \"(\" attr1 \")\" op1 func2 \"(\" attr2 \")\"\n"
        "func1 :- AVG | SUM | MAX | MIN | STDEV\n"
        "func2 :- AVG | SUM | MAX | MIN | STDEV\n"
        "attr1 :- month | cost | price\n"
        "attr2 :- month | cost | price\n"
        "op1 :- ...\n",
        "hyp :- AVG \"(\" attr1 \"[\" month op1 const1 \"]\" \")\" op2 func1 \"(\" attr1 \")\"\n"
        "func1 :- AVG | MIN | count\n"
        "attr1 :- cost | price\n"
        "op1 :- = | < | > | <= | >=\n"
        "op2 :- ...\n"
        "const1 :- number\n",
    };
    int compared = 0, agreed = 0;
    for (const auto& text : grammars) {
        GrammarSpec g = ground(parse_grammar(text), t);
        SpaceLimits lim;
        lim.limit = 1u << 20;
        for (const auto& s : enumerate_sentences(g, lim)) {
            auto h = parse_hypothesis(s);
            if (!typecheck(h, t).ok()) continue;
            auto expect = refinterp::ref_verdict(h, t);
            if (!expect) continue;
            ++compared;
            if (eval_hypothesis(h, t).verdict == *expect)
                ++agreed;
            else
                c.require(false, "disagrees with reference: " + s);
        }
    }
    c.require(compared >= 1000,
              "only " + std::to_string(compared) + " hypotheses compared, need >= 1000");
    c.require(agreed == compared, std::to_string(compared - agreed) + " disagreements");
    return c;
}

// 7. numeric identities of the statistics library
Check criterion7() {
    Check c;
    std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    c.require(std::abs(fcall("KL", {vec(xs), vec(xs)}).num) <= kTolRel, "KL(x,x) != 0");
    c.require(std::abs(fcall("EMD", {vec(xs), vec(xs)}).num) <= kTolRel, "EMD(x,x) != 0");

    std::vector<double> ys{2.0, 3.9, 6.1, 8.2, 9.8, 12.3, 13.7, 16.4, 17.9, 20.2};
    double ab = fcall("CORR", {vec(xs), vec(ys)}).num;
    double ba = fcall("CORR", {vec(ys), vec(xs)}).num;
    c.require(std::abs(ab - ba) <= kSymTol, "CORR is order-sensitive");

    std::vector<double> line;
    for (double x : xs) line.push_back(2.5 * x - 7.0);
    Model m = fcall("fit_LM", {vec(xs), vec(line)}).model;
    c.require(std::abs(m.slope - 2.5) <= kFitTol && std::abs(m.intercept + 7.0) <= kFitTol &&
                  std::abs(m.r_squared - 1.0) <= kFitTol,
              "exact line not recovered");

    // 21 points on a line, with one planted outlier at the end
    std::vector<double> px, py;
    for (int i = 0; i <= 19; ++i) {
        px.push_back(i);
        py.push_back(2.0 * i + 1.0 + ((i % 2) ? 0.05 : -0.05));
    }
    px.push_back(20);
    py.push_back(2.0 * 20 + 1.0 + 30.0);
    Value model = fcall("fit_LM", {vec(px), vec(py)});
    Value res = fcall("SRES", {model, vec(px), vec(py)});
    for (std::size_t i = 0; i < res.nums.size(); ++i) {
        bool outside = res.nums[i] < -2.0 || res.nums[i] > 2.0;
        c.require(outside == (i == 20),
                  "standardized residual misclassifies point " + std::to_string(i));
    }
    return c;
}

// 8. repeated CLI runs are byte-identical
Check criterion8() {
    Check c;
    std::string data = kFix + "/relation1.csv";
    std::string sim = kFix + "/corpus/sim.hg";
    std::vector<std::string> cmds = {
        "enumerate --grammar " + sim + " --data " + data,
        "sample --grammar " + sim + " --data " + data + " -n 5 --seed 7",
        "eval --data " + data + " 'avg(cost) < avg(price)' --format json",
        "size --grammar " + sim + " --data " + data,
    };
    for (const auto& cmd : cmds) {
        std::string a = run_cli(cmd);
        std::string b = run_cli(cmd);
        c.require(!a.empty(), "no output from: " + cmd);
        c.require(a == b, "output differs between runs of: " + cmd);
    }
    return c;
}
}  // namespace

int main() {
    struct Row {
        const char* label;
        Check (*fn)();
    };
    const Row rows[] = {
        {"1 corpus parses and round-trips", criterion1},
        {"2 movie-table verdicts", criterion2},
        {"3 ill-typed comparisons rejected", criterion3},
        {"4 grammar spaces: size, containment, shared copies", criterion4},
        {"5 sensor anomalies found by the hypothesis space", criterion5},
        {"6 agreement with the reference interpreter", criterion6},
        {"7 statistics identities", criterion7},
        {"8 deterministic command-line output", criterion8},
    };
    int failures = 0;
    for (const auto& row : rows) {
        Check c;
        try {
            c = row.fn();
        } catch (const std::exception& ex) {
            c.ok = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        std::cout << (c.ok ? "PASS" : "FAIL") << "  criterion " << row.label;
        if (!c.ok) std::cout << "  [" << c.detail << "]";
        std::cout << "\n";
        if (!c.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
