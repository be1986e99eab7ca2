// hypgram: evaluate data hypotheses and explore hypothesis spaces from the
// command line. Exit codes: 0 true/success, 1 false, 2 vacuous, 3 parse
// error, 4 type error, 5 evaluation error, 6 space too large or unbounded,
// 7 I/O or configuration error.

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hypgram/hypgram.hpp"

using nlohmann::json;
namespace hg = hypgram;

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitVacuous = 2;
constexpr int kExitParse = 3;
constexpr int kExitType = 4;
constexpr int kExitEval = 5;
constexpr int kExitSpace = 6;
constexpr int kExitIo = 7;

struct Options {
    std::string data;
    std::string schema;
    std::vector<std::string> grammars;
    std::string hypothesis;
    std::string hyp_file;
    std::string format = "text";
    std::size_t limit = 100000;
    std::size_t n = 10;
    unsigned long long seed = 0;
    int depth = 3;
    int bins = 10;
    int k = 3;
    bool sample_stdev = false;
    bool vacuous_as_true = false;
    bool as_expr = false;
    bool trace = false;
};

bool use_color() {
    static bool c = [] {
        if (std::getenv("NO_COLOR")) return false;
        return isatty(fileno(stdout)) != 0;
    }();
    return c;
}

std::string paint(const std::string& s, const char* code) {
    if (!use_color()) return s;
    return std::string("\033[") + code + "m" + s + "\033[0m";
}

std::string verdict_colored(hg::Verdict v) {
    switch (v) {
        case hg::Verdict::True: return paint("true", "32");
        case hg::Verdict::False: return paint("false", "31");
        case hg::Verdict::Vacuous: return paint("vacuous", "33");
    }
    return "?";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hg::IoError("io", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hypothesis_text(const Options& o) {
    if (!o.hyp_file.empty()) return read_file(o.hyp_file);
    if (!o.hypothesis.empty()) return o.hypothesis;
    throw hg::IoError("config", "a hypothesis is required (inline or via --file)");
}

hg::Table load_table(const Options& o) {
    if (o.data.empty()) throw hg::IoError("config", "--data is required for this command");
    return hg::load_csv(o.data, o.schema);
}

hg::GrammarSpec load_grammar(const Options& o, std::size_t i = 0) {
    if (o.grammars.size() <= i)
        throw hg::IoError("config", "this command needs " + std::to_string(i + 1) +
                                        " --grammar file(s)");
    return hg::parse_grammar(read_file(o.grammars[i]));
}

hg::GrammarSpec load_grounded(const Options& o, std::size_t i = 0) {
    hg::GrammarSpec g = load_grammar(o, i);
    if (!o.data.empty()) {
        hg::Table t = load_table(o);
        g = hg::ground(g, t);
    }
    return g;
}

hg::EvalOptions eval_options(const Options& o) {
    hg::EvalOptions e;
    e.funcs.bins = o.bins;
    e.funcs.k = o.k;
    e.funcs.sample_stdev = o.sample_stdev;
    e.vacuous_as_true = o.vacuous_as_true;
    return e;
}

hg::SpaceLimits space_limits(const Options& o) {
    hg::SpaceLimits lim;
    lim.limit = o.limit;
    lim.depth = o.depth;
    return lim;
}

void emit(const Options& o, const json& j, const std::string& text) {
    if (o.format == "json")
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text;
}

json issues_json(const hg::TypeReport& rep) {
    json a = json::array();
    for (const auto& i : rep.issues)
        a.push_back({{"message", i.message}, {"begin", i.span.begin}, {"end", i.span.end}});
    return a;
}

void print_issues(const hg::TypeReport& rep) {
    for (const auto& i : rep.issues) std::cerr << "type error: " << i.message << "\n";
}

json trace_json(const hg::TraceNode& n) {
    json j{{"label", n.label}};
    if (!n.value.empty()) j["value"] = n.value;
    if (!n.children.empty()) {
        json kids = json::array();
        for (const auto& c : n.children) kids.push_back(trace_json(c));
        j["children"] = kids;
    }
    return j;
}

void print_trace(const hg::TraceNode& n, int indent = 0) {
    std::cout << std::string(static_cast<std::size_t>(indent) * 2, ' ') << n.label;
    if (!n.value.empty()) std::cout << " = " << n.value;
    std::cout << "\n";
    for (const auto& c : n.children) print_trace(c, indent + 1);
}

int verdict_exit(hg::Verdict v) {
    switch (v) {
        case hg::Verdict::True: return kExitTrue;
        case hg::Verdict::False: return kExitFalse;
        case hg::Verdict::Vacuous: return kExitVacuous;
    }
    return kExitEval;
}

// ---------------------------------------------------------------- commands

int cmd_parse(const Options& o) {
    if (!o.grammars.empty()) {
        hg::GrammarSpec g = load_grammar(o);
        std::string printed = hg::print_grammar(g);
        emit(o, {{"ok", true}, {"kind", "grammar"}, {"pretty", printed}}, printed);
        return kExitTrue;
    }
    std::string text = hypothesis_text(o);
    std::string pretty;
    if (o.as_expr)
        pretty = hg::pretty_print(hg::parse_expression(text));
    else
        pretty = hg::pretty_print(hg::parse_hypothesis(text));
    emit(o, {{"ok", true}, {"kind", o.as_expr ? "expression" : "hypothesis"}, {"pretty", pretty}},
         pretty + "\n");
    return kExitTrue;
}

int cmd_check(const Options& o) {
    hg::Table t = load_table(o);
    hg::TypeReport rep;
    std::string pretty;
    if (o.as_expr) {
        auto e = hg::parse_expression(hypothesis_text(o));
        pretty = hg::pretty_print(e);
        rep = hg::typecheck(e, t);
    } else {
        auto h = hg::parse_hypothesis(hypothesis_text(o));
        pretty = hg::pretty_print(h);
        rep = hg::typecheck(h, t);
    }
    emit(o, {{"ok", rep.ok()}, {"pretty", pretty}, {"issues", issues_json(rep)}},
         rep.ok() ? "ok\n" : "");
    if (!rep.ok() && o.format != "json") print_issues(rep);
    return rep.ok() ? kExitTrue : kExitType;
}

int cmd_eval(const Options& o) {
    hg::Table t = load_table(o);
    hg::EvalOptions opts = eval_options(o);
    std::string text = hypothesis_text(o);
    if (o.as_expr) {
        auto e = hg::parse_expression(text);
        hg::TypeReport rep = hg::typecheck(e, t);
        if (!rep.ok()) {
            emit(o, {{"ok", false}, {"issues", issues_json(rep)}}, "");
            if (o.format != "json") print_issues(rep);
            return kExitType;
        }
        hg::Value v = hg::eval_expr(e, t, opts);
        emit(o, {{"ok", true}, {"value", v.to_string()}}, v.to_string() + "\n");
        return kExitTrue;
    }
    auto h = hg::parse_hypothesis(text);
    hg::TypeReport rep = hg::typecheck(h, t);
    if (!rep.ok()) {
        emit(o, {{"ok", false}, {"issues", issues_json(rep)}}, "");
        if (o.format != "json") print_issues(rep);
        return kExitType;
    }
    hg::EvalOutcome out = hg::eval_hypothesis(h, t, opts);
    json clauses = json::array();
    for (auto v : out.clause_results) clauses.push_back(hg::verdict_name(v));
    json j{{"ok", true},
           {"verdict", hg::verdict_name(out.verdict)},
           {"clauses", clauses},
           {"hypothesis", hg::pretty_print(h)}};
    if (o.trace) j["trace"] = trace_json(out.trace);
    emit(o, j, verdict_colored(out.verdict) + "\n");
    if (o.trace && o.format != "json") print_trace(out.trace);
    return verdict_exit(out.verdict);
}

int cmd_ground(const Options& o) {
    hg::GrammarSpec g = load_grammar(o);
    hg::Table t = load_table(o);
    hg::GrammarSpec gd = hg::ground(g, t);
    std::string printed = hg::print_grammar(gd);
    emit(o, {{"ok", true}, {"pretty", printed}}, printed);
    return kExitTrue;
}

int cmd_size(const Options& o) {
    hg::GrammarSpec g = load_grounded(o);
    hg::SpaceSize s = hg::size(g);
    if (s.exact) {
        emit(o, {{"ok", true}, {"exact", true}, {"size", s.n}}, std::to_string(s.n) + "\n");
        return kExitTrue;
    }
    std::string names;
    for (const auto& n : s.offenders) names += (names.empty() ? "" : ", ") + n;
    emit(o, {{"ok", true}, {"exact", false}, {"offenders", s.offenders}},
         "unbounded (" + names + ")\n");
    return kExitSpace;
}

int cmd_enumerate(const Options& o) {
    hg::GrammarSpec g = load_grounded(o);
    auto sentences = hg::enumerate_sentences(g, space_limits(o));
    std::string text;
    for (const auto& s : sentences) text += s + "\n";
    emit(o, {{"ok", true}, {"count", sentences.size()}, {"sentences", sentences}}, text);
    return kExitTrue;
}

int cmd_sample(const Options& o) {
    hg::GrammarSpec g = load_grounded(o);
    auto sentences = hg::sample_space(g, o.n, o.seed, space_limits(o));
    std::string text;
    for (const auto& s : sentences) text += s + "\n";
    emit(o, {{"ok", true}, {"count", sentences.size()}, {"sentences", sentences}}, text);
    return kExitTrue;
}

int cmd_member(const Options& o) {
    hg::GrammarSpec g = load_grounded(o);
    std::optional<hg::Table> t;
    if (!o.data.empty()) t = load_table(o);
    bool in = hg::member(g, hypothesis_text(o), t ? &*t : nullptr);
    emit(o, {{"ok", true}, {"member", in}}, std::string(in ? "true" : "false") + "\n");
    return in ? kExitTrue : kExitFalse;
}

int cmd_contains(const Options& o) {
    hg::GrammarSpec g1 = load_grammar(o, 0);
    hg::GrammarSpec g2 = load_grammar(o, 1);
    if (!o.data.empty()) {
        hg::Table t = load_table(o);
        g1 = hg::ground(g1, t);
        g2 = hg::ground(g2, t);
    }
    bool in = hg::contains(g1, g2, space_limits(o));
    emit(o, {{"ok", true}, {"contains", in}}, std::string(in ? "true" : "false") + "\n");
    return in ? kExitTrue : kExitFalse;
}

int cmd_intersect(const Options& o) {
    hg::GrammarSpec g1 = load_grammar(o, 0);
    hg::GrammarSpec g2 = load_grammar(o, 1);
    if (!o.data.empty()) {
        hg::Table t = load_table(o);
        g1 = hg::ground(g1, t);
        g2 = hg::ground(g2, t);
    }
    hg::IntersectResult r = hg::intersect(g1, g2, space_limits(o));
    json j{{"ok", true},
           {"count", r.card_intersection},
           {"sentences", r.sentences}};
    j["card_left"] = r.card_left ? json(*r.card_left) : json(nullptr);
    j["card_right"] = r.card_right ? json(*r.card_right) : json(nullptr);
    std::string text;
    for (const auto& s : r.sentences) text += s + "\n";
    text += "-- " + std::to_string(r.card_intersection) + " sentence(s) in the intersection\n";
    emit(o, j, text);
    return kExitTrue;
}

int cmd_list_functions(const Options& o) {
    const auto& reg = hg::FunctionRegistry::instance();
    json a = json::array();
    std::string text;
    for (const auto& sig : reg.all()) {
        a.push_back({{"name", sig.name},
                     {"min_arity", sig.min_arity},
                     {"max_arity", sig.max_arity},
                     {"result", sig.result}});
        std::string arity = sig.min_arity == sig.max_arity
                                ? std::to_string(sig.min_arity)
                                : std::to_string(sig.min_arity) + ".." + std::to_string(sig.max_arity);
        text += sig.name + "/" + arity + " -> " + sig.result + "\n";
    }
    emit(o, {{"ok", true}, {"functions", a}}, text);
    return kExitTrue;
}

void add_common(CLI::App* cmd, Options& o, bool wants_hyp, bool wants_grammar) {
    cmd->add_option("--data", o.data, "CSV table to evaluate against");
    cmd->add_option("--schema", o.schema, "schema sidecar (default: <data>.json)");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));
    if (wants_hyp) {
        cmd->add_option("hypothesis", o.hypothesis, "hypothesis text");
        cmd->add_option("--file", o.hyp_file, "read the hypothesis from a file");
        cmd->add_flag("--expr", o.as_expr, "treat the input as a bare expression");
    }
    if (wants_grammar)
        cmd->add_option("--grammar", o.grammars, "grammar file (repeat for two-grammar commands)");
}

void add_eval_knobs(CLI::App* cmd, Options& o) {
    cmd->add_option("--bins", o.bins, "histogram bins for KL/EMD")->check(CLI::PositiveNumber);
    cmd->add_option("--clusters", o.k, "k for clustering fits")->check(CLI::PositiveNumber);
    cmd->add_flag("--sample-stdev", o.sample_stdev, "use the N-1 divisor in STDEV/VAR");
    cmd->add_flag("--vacuous-as-true", o.vacuous_as_true, "report vacuous clauses as true");
}

void add_space_knobs(CLI::App* cmd, Options& o) {
    cmd->add_option("--limit", o.limit, "max sentences materialized")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--depth", o.depth, "recursion depth cap for sampling")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypothesis grammar engine"};
    app.require_subcommand(1);
    Options o;

    auto* parse = app.add_subcommand("parse", "parse and pretty-print a hypothesis or grammar");
    add_common(parse, o, true, true);

    auto* check = app.add_subcommand("check", "type-check a hypothesis against a table");
    add_common(check, o, true, false);

    auto* eval = app.add_subcommand("eval", "evaluate a hypothesis against a table");
    add_common(eval, o, true, false);
    add_eval_knobs(eval, o);
    eval->add_flag("--trace", o.trace, "print the evaluation trace");

    auto* ground = app.add_subcommand("ground", "bind a grammar to a table");
    add_common(ground, o, false, true);

    auto* size = app.add_subcommand("size", "count a grammar's hypothesis space");
    add_common(size, o, false, true);

    auto* enumerate = app.add_subcommand("enumerate", "list every sentence of a finite grammar");
    add_common(enumerate, o, false, true);
    add_space_knobs(enumerate, o);

    auto* sample = app.add_subcommand("sample", "sample sentences without replacement");
    add_common(sample, o, false, true);
    add_space_knobs(sample, o);
    sample->add_option("--n", o.n, "number of samples")->check(CLI::PositiveNumber);
    sample->add_option("--seed", o.seed, "RNG seed");

    auto* member = app.add_subcommand("member", "test whether a grammar generates a hypothesis");
    add_common(member, o, true, true);

    auto* contains = app.add_subcommand("contains", "test first ⊆ second for two grammars");
    add_common(contains, o, false, true);
    add_space_knobs(contains, o);

    auto* intersect = app.add_subcommand("intersect", "intersect two grammars");
    add_common(intersect, o, false, true);
    add_space_knobs(intersect, o);

    auto* listfn = app.add_subcommand("list-functions", "list registered functions");
    listfn->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitIo;
    }

    try {
        if (*parse) return cmd_parse(o);
        if (*check) return cmd_check(o);
        if (*eval) return cmd_eval(o);
        if (*ground) return cmd_ground(o);
        if (*size) return cmd_size(o);
        if (*enumerate) return cmd_enumerate(o);
        if (*sample) return cmd_sample(o);
        if (*member) return cmd_member(o);
        if (*contains) return cmd_contains(o);
        if (*intersect) return cmd_intersect(o);
        if (*listfn) return cmd_list_functions(o);
    } catch (const hypgram::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        if (!e.expected.empty()) {
            std::cerr << "  expected:";
            for (const auto& x : e.expected) std::cerr << " " << x;
            std::cerr << "\n";
        }
        return kExitParse;
    } catch (const hypgram::SpaceError& e) {
        std::cerr << "space error: " << e.what() << "\n";
        return e.code() == "undefined-nonterminal" ? kExitParse : kExitSpace;
    } catch (const hypgram::EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return kExitEval;
    } catch (const hypgram::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitIo;
    } catch (const hypgram::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitIo;
}
