#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hypgram/ast.hpp"
#include "hypgram/grammar.hpp"
#include "hypgram/lexer.hpp"

namespace hypgram {
namespace detail {

/// Recursive-descent PEG parser over the token stream. Ordered choice: the
/// first matching alternative wins; the furthest failure position is kept for
/// error reporting.
class HypParser {
public:
    explicit HypParser(const std::vector<Token>& toks) : t_(toks) {}

    HypothesisAst hypothesis() {
        HypothesisAst h;
        clause_into(h);
        while (accept_punct("&")) clause_into(h);
        expect_end();
        return h;
    }

    ExprNode expression_only() {
        ExprNode e = expr();
        expect_end();
        return e;
    }

private:
    const std::vector<Token>& t_;
    std::size_t pos_ = 0;
    std::size_t furthest_ = 0;
    std::vector<std::string> expected_;

    const Token& cur() const { return t_[pos_]; }
    bool at_end() const { return cur().kind == Token::Kind::End; }

    [[noreturn]] void fail(const std::string& what) {
        note(what);
        std::string got = token_text(t_[furthest_]);
        throw ParseError("expected " + join_expected() + ", got " + got, t_[furthest_].span,
                         expected_);
    }

    void note(const std::string& what) {
        if (pos_ > furthest_) {
            furthest_ = pos_;
            expected_.clear();
        }
        if (pos_ == furthest_) {
            for (const auto& e : expected_)
                if (e == what) return;
            expected_.push_back(what);
        }
    }

    std::string join_expected() const {
        std::string out;
        for (std::size_t i = 0; i < expected_.size(); ++i) {
            if (i) out += " or ";
            out += expected_[i];
        }
        return out;
    }

    bool accept_punct(const std::string& p) {
        if (cur().kind == Token::Kind::Punct && cur().text == p) {
            ++pos_;
            return true;
        }
        note("'" + p + "'");
        return false;
    }

    bool accept_ident(const std::string& w) {
        if (cur().kind == Token::Kind::Ident && cur().text == w) {
            ++pos_;
            return true;
        }
        note("'" + w + "'");
        return false;
    }

    void expect_punct(const std::string& p) {
        if (!accept_punct(p)) fail("'" + p + "'");
    }

    void expect_end() {
        if (!at_end()) {
            note("end of input");
            fail("end of input");
        }
    }

    void clause_into(HypothesisAst& h) {
        std::size_t begin = h.clauses.size();
        // Parenthesized clause with a hypothesis-level predicate:
        // (expr op expr)[pred]. Falls back to a plain expression on failure.
        if (cur().kind == Token::Kind::Punct && cur().text == "(") {
            std::size_t save = pos_;
            try {
                ++pos_;
                ExprNode lhs = expr();
                OpKind op = comparison_op();
                ExprNode rhs = expr();
                expect_punct(")");
                expect_punct("[");
                PredNode p = predicate();
                expect_punct("]");
                Clause cl;
                cl.lhs = std::move(lhs);
                cl.op = op;
                cl.rhs = std::move(rhs);
                cl.pred = std::move(p);
                h.clauses.push_back(std::move(cl));
                return;
            } catch (const ParseError&) {
                pos_ = save;
            }
        }
        ExprNode lhs = expr();
        OpKind op = comparison_op();
        ExprNode rhs = expr();
        Clause cl;
        cl.lhs = std::move(lhs);
        cl.op = op;
        cl.rhs = rhs;
        h.clauses.push_back(std::move(cl));
        // Chained comparisons (a = b = c) flatten into adjacent clauses.
        while (auto next = try_comparison_op()) {
            ExprNode mid = std::move(rhs);
            rhs = expr();
            Clause link;
            link.lhs = std::move(mid);
            link.op = *next;
            link.rhs = rhs;
            h.clauses.push_back(std::move(link));
        }
        if (accept_punct("[")) {
            PredNode p = predicate();
            expect_punct("]");
            h.clauses.back().pred = std::move(p);
        }
        (void)begin;
    }

    std::optional<OpKind> try_comparison_op() {
        const Token& c = cur();
        if (c.kind == Token::Kind::Punct) {
            OpKind op;
            if (c.text == "=") op = OpKind::Eq;
            else if (c.text == "!=") op = OpKind::Neq;
            else if (c.text == "<") op = OpKind::Lt;
            else if (c.text == "<=") op = OpKind::Le;
            else if (c.text == ">") op = OpKind::Gt;
            else if (c.text == ">=") op = OpKind::Ge;
            else if (c.text == "~") op = OpKind::RegexMatch;
            else { note("comparison operator"); return std::nullopt; }
            ++pos_;
            return op;
        }
        if (c.kind == Token::Kind::Ident && c.text == "in") {
            ++pos_;
            return OpKind::In;
        }
        if (c.kind == Token::Kind::Ident && c.text == "not" &&
            t_[pos_ + 1].kind == Token::Kind::Ident && t_[pos_ + 1].text == "in") {
            pos_ += 2;
            return OpKind::NotIn;
        }
        note("comparison operator");
        return std::nullopt;
    }

    OpKind comparison_op() {
        if (auto op = try_comparison_op()) return *op;
        fail("comparison operator");
    }

    // expr := mul (("+"|"-") mul)*   -- infix sugar for the arithmetic funcs
    ExprNode expr() {
        ExprNode lhs = mul();
        while (cur().kind == Token::Kind::Punct && (cur().text == "+" || cur().text == "-")) {
            std::string fn = cur().text;
            ++pos_;
            ExprNode rhs = mul();
            lhs = ExprNode::call(fn, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    ExprNode mul() {
        ExprNode lhs = postfix();
        while (cur().kind == Token::Kind::Punct && (cur().text == "*" || cur().text == "/")) {
            std::string fn = cur().text;
            ++pos_;
            ExprNode rhs = postfix();
            lhs = ExprNode::call(fn, {std::move(lhs), std::move(rhs)});
        }
        return lhs;
    }

    // A trailing [pred] binds to the variable or function call it follows.
    ExprNode postfix() {
        ExprNode e = primary();
        if ((e.kind == ExprNode::Kind::VarRef || e.kind == ExprNode::Kind::FuncCall) &&
            !e.pred && accept_punct("[")) {
            e.pred = predicate();
            expect_punct("]");
        }
        return e;
    }

    ExprNode primary() {
        const Token& c = cur();
        std::size_t start = c.span.begin;
        if (c.kind == Token::Kind::Number) {
            ++pos_;
            return ExprNode::constant(ConstValue::number(c.num));
        }
        if (c.kind == Token::Kind::String) {
            ++pos_;
            return ExprNode::constant(ConstValue::string(c.text));
        }
        if (c.kind == Token::Kind::Ident) {
            if (c.text == "true" || c.text == "false") {
                ++pos_;
                return ExprNode::constant(ConstValue::boolean_(c.text == "true"));
            }
            std::string name = c.text;
            ++pos_;
            if (accept_punct("(")) {
                std::vector<ExprNode> args;
                if (!accept_punct(")")) {
                    args.push_back(expr());
                    while (accept_punct(",")) args.push_back(expr());
                    expect_punct(")");
                }
                if (args.size() > 3) fail("at most 3 function arguments");
                ExprNode e = ExprNode::call(std::move(name), std::move(args));
                e.span = Span{start, prev_end()};
                return e;
            }
            if (accept_punct(".")) {
                // rN.attr desugars to attr[id=N]
                if (cur().kind != Token::Kind::Ident) fail("attribute name");
                std::string attr = cur().text;
                ++pos_;
                std::optional<double> row = row_id(name);
                if (!row) fail("row reference of the form r<id>");
                PredNode p;
                PredNode::Conjunct cj;
                cj.attr = "id";
                cj.op = OpKind::Eq;
                cj.value.push_back(ExprNode::constant(ConstValue::number(*row)));
                p.conjuncts.push_back(std::move(cj));
                ExprNode e = ExprNode::var(std::move(attr), std::move(p));
                e.span = Span{start, prev_end()};
                return e;
            }
            ExprNode e = ExprNode::var(std::move(name));
            e.span = Span{start, prev_end()};
            return e;
        }
        if (c.kind == Token::Kind::Punct && c.text == "-") {
            ++pos_;
            if (cur().kind == Token::Kind::Number) {
                double v = cur().num;
                ++pos_;
                return ExprNode::constant(ConstValue::number(-v));
            }
            // prefix form: -(a) negation or -(a, b) subtraction
            if (cur().kind == Token::Kind::Punct && cur().text == "(") {
                ++pos_;
                std::vector<ExprNode> args;
                args.push_back(expr());
                if (accept_punct(",")) args.push_back(expr());
                expect_punct(")");
                ExprNode e = ExprNode::call("-", std::move(args));
                if (accept_punct("[")) {
                    e.pred = predicate();
                    expect_punct("]");
                }
                return e;
            }
            ExprNode arg = postfix();
            return ExprNode::call("-", {std::move(arg)});
        }
        if (c.kind == Token::Kind::Punct &&
            (c.text == "+" || c.text == "*" || c.text == "/") && pos_ + 1 < t_.size() &&
            t_[pos_ + 1].kind == Token::Kind::Punct && t_[pos_ + 1].text == "(") {
            std::string fn = c.text;
            pos_ += 2;
            std::vector<ExprNode> args;
            args.push_back(expr());
            if (accept_punct(",")) args.push_back(expr());
            expect_punct(")");
            ExprNode e = ExprNode::call(fn, std::move(args));
            if (accept_punct("[")) {
                e.pred = predicate();
                expect_punct("]");
            }
            return e;
        }
        if (c.kind == Token::Kind::Punct && c.text == "(") {
            // `(lo, hi]` / `(lo, hi)` is an interval open at the low end;
            // anything else after `(` is a parenthesized expression.
            if (auto iv = try_open_interval()) return ExprNode::constant(std::move(*iv));
            ++pos_;
            ExprNode inner = expr();
            expect_punct(")");
            return inner;
        }
        if (c.kind == Token::Kind::Punct && (c.text == "[" || c.text == "{"))
            return ExprNode::constant(bracket_const());
        note("expression");
        fail("expression");
    }

    std::size_t prev_end() const { return pos_ > 0 ? t_[pos_ - 1].span.end : 0; }

    static std::optional<double> row_id(const std::string& name) {
        std::size_t i = 0;
        if (i < name.size() && (name[i] == 'r' || name[i] == 'R')) ++i;
        if (i >= name.size()) return std::nullopt;
        double v = 0;
        for (; i < name.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(name[i]))) return std::nullopt;
            v = v * 10 + (name[i] - '0');
        }
        return v;
    }

    // [x, y] / [x, y) with two numbers is an interval (bracket chooses the
    // bound); any other bracketed or braced list is an array constant.
    ConstValue bracket_const() {
        bool brace = cur().text == "{";
        ++pos_;
        std::vector<ConstValue> elems;
        if (!(cur().kind == Token::Kind::Punct &&
              (cur().text == "]" || cur().text == "}" || cur().text == ")"))) {
            elems.push_back(scalar_const());
            while (accept_punct(",")) elems.push_back(scalar_const());
        }
        bool hi_closed;
        if (brace) {
            expect_punct("}");
            hi_closed = true;
        } else if (accept_punct("]")) {
            hi_closed = true;
        } else if (accept_punct(")")) {
            hi_closed = false;
        } else {
            fail("']' or ')'");
        }
        if (!brace && elems.size() == 2 && elems[0].kind == ConstValue::Kind::Number &&
            elems[1].kind == ConstValue::Kind::Number)
            return ConstValue::interval(elems[0].num, elems[1].num, true, hi_closed);
        for (const auto& e : elems)
            if (e.kind != elems.front().kind)
                fail("homogeneous array elements");
        return ConstValue::array(std::move(elems));
    }

    std::optional<ConstValue> try_open_interval() {
        std::size_t save = pos_;
        ++pos_;  // consume '('
        auto num = [&]() -> std::optional<double> {
            bool neg = cur().kind == Token::Kind::Punct && cur().text == "-";
            std::size_t p = pos_ + (neg ? 1 : 0);
            if (t_[p].kind != Token::Kind::Number) return std::nullopt;
            pos_ = p + 1;
            return neg ? -t_[p].num : t_[p].num;
        };
        auto lo = num();
        if (lo && accept_punct(",")) {
            if (auto hi = num()) {
                bool closed_hi = false;
                if (accept_punct("]")) closed_hi = true;
                else if (!accept_punct(")")) { pos_ = save; return std::nullopt; }
                if (*lo <= *hi) return ConstValue::interval(*lo, *hi, false, closed_hi);
            }
        }
        pos_ = save;
        return std::nullopt;
    }

    ConstValue scalar_const() {
        const Token& c = cur();
        if (c.kind == Token::Kind::Number) { ++pos_; return ConstValue::number(c.num); }
        if (c.kind == Token::Kind::String) { ++pos_; return ConstValue::string(c.text); }
        if (c.kind == Token::Kind::Punct && c.text == "-" &&
            t_[pos_ + 1].kind == Token::Kind::Number) {
            double v = t_[pos_ + 1].num;
            pos_ += 2;
            return ConstValue::number(-v);
        }
        if (c.kind == Token::Kind::Ident) {
            ++pos_;
            if (c.text == "true" || c.text == "false") return ConstValue::boolean_(c.text == "true");
            return ConstValue::string(c.text);
        }
        fail("constant");
    }

    PredNode predicate() {
        PredNode p;
        p.conjuncts.push_back(conjunct());
        while (accept_punct("&")) p.conjuncts.push_back(conjunct());
        return p;
    }

    PredNode::Conjunct conjunct() {
        PredNode::Conjunct cj;
        cj.span.begin = cur().span.begin;
        if (accept_punct("!")) {
            cj.negated = true;
            bool paren = accept_punct("(");
            conjunct_body(cj);
            if (paren) expect_punct(")");
        } else {
            conjunct_body(cj);
        }
        cj.span.end = prev_end();
        return cj;
    }

    void conjunct_body(PredNode::Conjunct& cj) {
        if (cur().kind != Token::Kind::Ident) fail("attribute name");
        cj.attr = cur().text;
        ++pos_;
        cj.op = comparison_op();
        cj.value.push_back(pred_value());
        if (cj.value.front().kind == ExprNode::Kind::Const) {
            auto k = cj.value.front().value.kind;
            if (cj.op == OpKind::In || cj.op == OpKind::NotIn) {
                if (k != ConstValue::Kind::Interval && k != ConstValue::Kind::Array)
                    fail("interval or array after 'in'");
            }
        }
    }

    // Predicate values are constants (bare words read as strings), except a
    // name followed by '(' which is a function call (AwardsWon = MAX(AwardsWon)).
    ExprNode pred_value() {
        const Token& c = cur();
        if (c.kind == Token::Kind::Ident && t_[pos_ + 1].kind == Token::Kind::Punct &&
            t_[pos_ + 1].text == "(")
            return expr();
        if (c.kind == Token::Kind::Punct && (c.text == "[" || c.text == "{"))
            return ExprNode::constant(bracket_const());
        if (c.kind == Token::Kind::Punct && c.text == "(")
            if (auto iv = try_open_interval()) return ExprNode::constant(std::move(*iv));
        return ExprNode::constant(scalar_const());
    }
};

}  // namespace detail

/// Parses one hypothesis statement into its AST.
inline HypothesisAst parse_hypothesis(std::string_view text) {
    auto toks = lex(text);
    detail::HypParser p(toks);
    return p.hypothesis();
}

/// Parses a bare expression (an operation/query, not a hypothesis).
inline ExprNode parse_expression(std::string_view text) {
    auto toks = lex(text);
    detail::HypParser p(toks);
    return p.expression_only();
}

namespace detail {

// Grammar-vocabulary base names: a bare identifier built from one of these
// (plus an optional copy index) is always a nonterminal reference; anything
// else unquoted and undefined reads as a terminal, so grammar authors can
// omit quotes when the meaning is clear.
inline bool vocabulary_name(const std::string& base) {
    static const std::set<std::string> kVocab = {"hyp", "expr", "var", "pred",
                                                 "func", "op", "attr", "const"};
    return kVocab.count(base) > 0;
}

class GrammarFileParser {
public:
    GrammarSpec parse(std::string_view text) {
        GrammarSpec g;
        std::vector<std::pair<std::string, std::vector<Token>>> raw;
        for (auto line : split_lines(text)) {
            auto toks = lex(line);
            toks.pop_back();  // strip End
            if (toks.empty()) continue;
            bool rule_start = toks.size() >= 2 && toks[1].kind == Token::Kind::Punct &&
                              toks[1].text == ":-";
            if (rule_start) {
                if (toks[0].kind != Token::Kind::Ident)
                    throw ParseError("rule name must be an identifier", toks[0].span);
                raw.emplace_back(toks[0].text, std::vector<Token>(toks.begin() + 2, toks.end()));
            } else {
                if (raw.empty())
                    throw ParseError("expected 'name :- body'", toks[0].span);
                auto& body = raw.back().second;
                body.insert(body.end(), toks.begin(), toks.end());
            }
        }
        for (auto& [name, body] : raw) {
            if (g.find(name))
                throw ParseError("duplicate rule '" + name + "'", {});
            GrammarRule r;
            r.name = name;
            std::size_t i = 0;
            r.alts = alternatives(body, i, /*in_group=*/false);
            if (i != body.size())
                throw ParseError("unbalanced ')' in rule '" + name + "'", body[i].span);
            g.rules.push_back(std::move(r));
        }
        resolve(g);
        return g;
    }

private:
    static std::vector<std::string_view> split_lines(std::string_view text) {
        std::vector<std::string_view> lines;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= text.size(); ++i) {
            if (i == text.size() || text[i] == '\n') {
                lines.push_back(text.substr(start, i - start));
                start = i + 1;
            }
        }
        return lines;
    }

    std::vector<GrammarAlt> alternatives(const std::vector<Token>& toks, std::size_t& i,
                                         bool in_group) {
        std::vector<GrammarAlt> alts;
        GrammarAlt cur;
        auto flush = [&] { alts.push_back(std::move(cur)); cur.clear(); };
        while (i < toks.size()) {
            const Token& t = toks[i];
            if (t.kind == Token::Kind::Punct && t.text == "|") {
                flush();
                ++i;
                continue;
            }
            if (t.kind == Token::Kind::Punct && t.text == ")" && in_group) break;
            cur.push_back(symbol(toks, i));
        }
        flush();
        return alts;
    }

    GrammarSymbol symbol(const std::vector<Token>& toks, std::size_t& i) {
        GrammarSymbol s;
        const Token& t = toks[i];
        if (t.kind == Token::Kind::Punct && t.text == "(") {
            ++i;
            s.kind = GrammarSymbol::Kind::Group;
            s.alts = alternatives(toks, i, /*in_group=*/true);
            if (i >= toks.size())
                throw ParseError("missing ')' in grammar rule", t.span);
            ++i;  // consume ')'
        } else if (t.kind == Token::Kind::Ellipsis) {
            s.kind = GrammarSymbol::Kind::Ellipsis;
            ++i;
        } else if (t.kind == Token::Kind::String && t.quote == '"') {
            // Double-quoted: grammar terminal. Its content is hypothesis
            // tokens when it lexes cleanly, otherwise one opaque string.
            s.kind = GrammarSymbol::Kind::Terminal;
            s.quoted = true;
            try {
                auto inner = lex(t.text);
                inner.pop_back();
                if (inner.empty()) throw ParseError("empty terminal", t.span);
                s.tokens = std::move(inner);
                if (s.tokens.size() == 1 && s.tokens[0].kind == Token::Kind::String)
                    s.tokens[0].quote = '\'';
            } catch (const ParseError&) {
                Token lit;
                lit.kind = Token::Kind::String;
                lit.text = t.text;
                lit.quote = '\'';
                s.tokens = {lit};
            }
            ++i;
        } else if (t.kind == Token::Kind::Ident) {
            // Classified against rule names later; store as Ref for now.
            s.kind = GrammarSymbol::Kind::Ref;
            s.name = t.text;
            ++i;
        } else {
            s.kind = GrammarSymbol::Kind::Terminal;
            s.tokens = {t};
            ++i;
        }
        if (i < toks.size() && toks[i].kind == Token::Kind::Punct && toks[i].text == "?") {
            s.optional = true;
            ++i;
        }
        return s;
    }

    void resolve(GrammarSpec& g) {
        std::vector<std::string> synth;
        for (auto& rule : g.rules)
            for (auto& alt : rule.alts) resolve_alt(g, alt, synth);
        for (const auto& name : synth) {
            if (g.find(name)) continue;
            GrammarRule r;
            r.name = name;
            r.synthesized = true;
            std::string base = GrammarSpec::copy_base(name);
            if (auto b = builtin_class(base)) {
                GrammarSymbol s;
                s.kind = GrammarSymbol::Kind::Builtin;
                s.builtin = *b;
                r.alts.push_back({s});
            } else {
                // const copy with no explicit rule: any scalar constant
                for (auto b2 : {BuiltinClass::Number, BuiltinClass::Str, BuiltinClass::Datetime,
                                BuiltinClass::Boolean}) {
                    GrammarSymbol s;
                    s.kind = GrammarSymbol::Kind::Builtin;
                    s.builtin = b2;
                    r.alts.push_back({s});
                }
            }
            g.rules.push_back(std::move(r));
        }
    }

    void resolve_alt(GrammarSpec& g, GrammarAlt& alt, std::vector<std::string>& synth) {
        for (auto& s : alt) {
            if (s.kind == GrammarSymbol::Kind::Group) {
                for (auto& inner : s.alts) resolve_alt(g, inner, synth);
                continue;
            }
            if (s.kind != GrammarSymbol::Kind::Ref) continue;
            const std::string& name = s.name;
            if (auto b = builtin_class(name)) {
                s.kind = GrammarSymbol::Kind::Builtin;
                s.builtin = *b;
                continue;
            }
            if (g.find(name) || g.resolve(name)) continue;
            std::string base = GrammarSpec::copy_base(name);
            if (!base.empty() && (builtin_class(base) || base == "const")) {
                synth.push_back(name);
                continue;
            }
            if (vocabulary_name(name) || (!base.empty() && vocabulary_name(base)))
                throw SpaceError("undefined-nonterminal",
                                 "rule body references undefined nonterminal '" + name + "'",
                                 {name});
            // Unquoted content word: treat as a terminal.
            Token lit;
            lit.kind = Token::Kind::Ident;
            lit.text = name;
            s.kind = GrammarSymbol::Kind::Terminal;
            s.tokens = {lit};
            s.name.clear();
        }
    }
};

}  // namespace detail

/// Parses a `.hg` grammar file: one `name :- alt | alt` rule per line, with
/// continuation lines attached to the rule above them.
inline GrammarSpec parse_grammar(std::string_view text) {
    detail::GrammarFileParser p;
    return p.parse(text);
}

}  // namespace hypgram
