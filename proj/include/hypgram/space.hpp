#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hypgram/dataset.hpp"
#include "hypgram/errors.hpp"
#include "hypgram/evaluator.hpp"
#include "hypgram/funcs.hpp"
#include "hypgram/grammar.hpp"
#include "hypgram/parser.hpp"

namespace hypgram {

struct SpaceSize {
    bool exact = true;
    unsigned long long n = 0;
    std::vector<std::string> offenders;  // infinite builtins / recursive rules

    static SpaceSize exactly(unsigned long long n) { return {true, n, {}}; }
    static SpaceSize unbounded(std::vector<std::string> names) {
        return {false, 0, std::move(names)};
    }
};

struct SpaceLimits {
    std::size_t limit = 100000;  // max sentences materialized
    int depth = 3;               // recursion cap for depth-bounded sampling
};

namespace detail {

inline Token ident_token(std::string text) {
    Token t;
    t.kind = Token::Kind::Ident;
    t.text = std::move(text);
    return t;
}

inline Token punct_token(std::string text) {
    Token t;
    t.kind = Token::Kind::Punct;
    t.text = std::move(text);
    return t;
}

inline GrammarSymbol term_sym(std::vector<Token> toks, bool quoted = false) {
    GrammarSymbol s;
    s.kind = GrammarSymbol::Kind::Terminal;
    s.tokens = std::move(toks);
    s.quoted = quoted;
    return s;
}

inline GrammarSymbol term_text(std::string_view text) {
    auto toks = lex(text);
    toks.pop_back();
    return term_sym(std::move(toks));
}

inline GrammarSymbol ref_sym(std::string name) {
    GrammarSymbol s;
    s.kind = GrammarSymbol::Kind::Ref;
    s.name = std::move(name);
    return s;
}

inline GrammarSymbol builtin_sym(BuiltinClass b) {
    GrammarSymbol s;
    s.kind = GrammarSymbol::Kind::Builtin;
    s.builtin = b;
    return s;
}

inline GrammarSymbol group_sym(std::vector<GrammarAlt> alts, bool optional = false) {
    GrammarSymbol s;
    s.kind = GrammarSymbol::Kind::Group;
    s.alts = std::move(alts);
    s.optional = optional;
    return s;
}

inline GrammarSymbol opt(GrammarSymbol s) {
    s.optional = true;
    return s;
}

inline const std::vector<std::string>& op_terminals() {
    static const std::vector<std::string> ops = {"=", "!=", "<", "<=", ">",
                                                 ">=", "~", "in", "not in"};
    return ops;
}

inline bool alt_has_ellipsis(const GrammarAlt& alt) {
    for (const auto& s : alt)
        if (s.kind == GrammarSymbol::Kind::Ellipsis) return true;
    return false;
}

// A parenthesized run with one alternative and no trailing `?` is not a
// choice, it is literal parentheses in the derived sentence (grammar files
// reuse `(` for both).
inline bool literal_paren_group(const GrammarSymbol& s) {
    return s.kind == GrammarSymbol::Kind::Group && !s.optional && s.alts.size() == 1;
}

// --------------------------------------------------------------------------
// Size: DP over expansion counts. Shared copies contribute a factor of 1
// inside the start count and one global factor per distinct copy.

class SizeCounter {
public:
    explicit SizeCounter(const GrammarSpec& g) : g_(g) {}

    SpaceSize run() {
        Buckets b = count_ref(g_.start, {});
        if (!ok_) return SpaceSize::unbounded({offenders_.begin(), offenders_.end()});
        unsigned long long total = 0;
        for (const auto& [bound, n] : b) total = add(total, n);
        return SpaceSize::exactly(total);
    }

private:
    const GrammarSpec& g_;
    bool ok_ = true;
    std::set<std::string> offenders_;
    std::vector<std::string> stack_;

    // Counts are bucketed by the set of copies bound so far on the derivation
    // path: the first occurrence of a copy multiplies by its expansion count,
    // later occurrences contribute a factor of 1 (they must repeat it).
    using Bound = std::set<std::string>;
    using Buckets = std::map<Bound, unsigned long long>;

    void offend(const std::string& name) {
        ok_ = false;
        offenders_.insert(name);
    }

    static unsigned long long cap_(unsigned long long v) {
        const unsigned long long cap = 1ull << 62;
        return v > cap ? cap : v;
    }
    static unsigned long long add(unsigned long long a, unsigned long long b) {
        return cap_(a + b);
    }
    static unsigned long long mul(unsigned long long a, unsigned long long b) {
        return cap_(static_cast<unsigned long long>(
            std::min<__uint128_t>(static_cast<__uint128_t>(a) * b, __uint128_t(1) << 62)));
    }

    static void merge(Buckets& into, const Bound& bound, unsigned long long n) {
        auto [it, fresh] = into.try_emplace(bound, n);
        if (!fresh) it->second = add(it->second, n);
    }

    Buckets count_ref(const std::string& name, const Bound& bound) {
        if (GrammarSpec::is_copy(name) && bound.count(name))
            return {{bound, 1}};
        if (std::find(stack_.begin(), stack_.end(), name) != stack_.end()) {
            offend(name);
            return {};
        }
        const GrammarRule* r = g_.resolve(name);
        if (!r) {
            offend(name);
            return {};
        }
        Bound inner = bound;
        if (GrammarSpec::is_copy(name)) inner.insert(name);
        stack_.push_back(name);
        Buckets out;
        bool any = false;
        for (const auto& alt : r->alts) {
            if (alt_has_ellipsis(alt)) continue;
            any = true;
            for (const auto& [b2, n] : count_seq(alt, inner)) merge(out, b2, n);
        }
        stack_.pop_back();
        if (!any) offend(name);
        return out;
    }

    Buckets count_seq(const GrammarAlt& alt, const Bound& bound) {
        Buckets cur{{bound, 1}};
        for (const auto& s : alt) {
            Buckets next;
            for (const auto& [b, n] : cur)
                for (const auto& [b2, m] : count_symbol(s, b)) merge(next, b2, mul(n, m));
            cur = std::move(next);
            if (!ok_) return {};
        }
        return cur;
    }

    Buckets count_symbol(const GrammarSymbol& s, const Bound& bound) {
        Buckets out;
        switch (s.kind) {
            case GrammarSymbol::Kind::Terminal:
            case GrammarSymbol::Kind::Ellipsis:
                out = {{bound, 1}};
                break;
            case GrammarSymbol::Kind::Builtin:
                offend(builtin_name(s.builtin));
                return {};
            case GrammarSymbol::Kind::Ref:
                out = count_ref(s.name, bound);
                break;
            case GrammarSymbol::Kind::Group:
                for (const auto& alt : s.alts) {
                    if (alt_has_ellipsis(alt)) continue;
                    for (const auto& [b2, n] : count_seq(alt, bound)) merge(out, b2, n);
                }
                break;
        }
        if (s.optional) merge(out, bound, 1);
        return out;
    }
};

// --------------------------------------------------------------------------
// Enumeration: recursive expansion threading a copy-binding environment.

using CopyEnv = std::map<std::string, std::vector<Token>>;

struct Sentence {
    std::vector<Token> tokens;
    CopyEnv env;
};

class Enumerator {
public:
    Enumerator(const GrammarSpec& g, std::size_t limit, int depth)
        : g_(g), limit_(limit), depth_(depth) {}

    std::vector<std::vector<Token>> run() {
        auto sents = expand_ref(g_.start, {}, {});
        std::vector<std::vector<Token>> out;
        out.reserve(sents.size());
        for (auto& s : sents) out.push_back(std::move(s.tokens));
        return out;
    }

private:
    const GrammarSpec& g_;
    std::size_t limit_;
    int depth_;
    std::size_t produced_ = 0;

    void check_budget(std::size_t n) {
        if (n > limit_)
            throw SpaceError("space-too-large",
                             "enumeration exceeds the limit of " + std::to_string(limit_) +
                                 " sentences",
                             {});
    }

    std::vector<Sentence> expand_ref(const std::string& name, CopyEnv env,
                                     std::map<std::string, int> depth) {
        bool copy = GrammarSpec::is_copy(name);
        if (copy) {
            if (auto it = env.find(name); it != env.end())
                return {Sentence{it->second, std::move(env)}};
        }
        const GrammarRule* r = g_.resolve(name);
        if (!r)
            throw SpaceError("undefined-nonterminal", "undefined nonterminal '" + name + "'",
                             {name});
        int& d = depth[name];
        if (++d > depth_) return {};  // recursion cap (depth-bounded sampling)
        std::vector<Sentence> out;
        for (const auto& alt : r->alts) {
            if (alt_has_ellipsis(alt)) continue;
            for (auto& s : expand_seq(alt, 0, env, depth)) {
                if (copy) s.env[name] = s.tokens;
                out.push_back(std::move(s));
                check_budget(out.size());
            }
        }
        return out;
    }

    std::vector<Sentence> expand_seq(const GrammarAlt& alt, std::size_t i, CopyEnv env,
                                     const std::map<std::string, int>& depth) {
        if (i == alt.size()) return {Sentence{{}, std::move(env)}};
        std::vector<Sentence> heads = expand_symbol(alt[i], env, depth);
        std::vector<Sentence> out;
        for (auto& h : heads) {
            for (auto& tail : expand_seq(alt, i + 1, h.env, depth)) {
                Sentence s;
                s.tokens = h.tokens;
                s.tokens.insert(s.tokens.end(), tail.tokens.begin(), tail.tokens.end());
                s.env = std::move(tail.env);
                out.push_back(std::move(s));
                check_budget(out.size());
            }
        }
        return out;
    }

    std::vector<Sentence> expand_symbol(const GrammarSymbol& sym, CopyEnv env,
                                        const std::map<std::string, int>& depth) {
        std::vector<Sentence> out;
        switch (sym.kind) {
            case GrammarSymbol::Kind::Terminal:
                out.push_back({sym.tokens, env});
                break;
            case GrammarSymbol::Kind::Ellipsis:
                break;  // derives nothing
            case GrammarSymbol::Kind::Builtin:
                throw SpaceError("unbounded-space",
                                 "cannot enumerate the infinite class '" +
                                     builtin_name(sym.builtin) + "'",
                                 {builtin_name(sym.builtin)});
            case GrammarSymbol::Kind::Ref:
                out = expand_ref(sym.name, env, depth);
                break;
            case GrammarSymbol::Kind::Group: {
                bool paren = literal_paren_group(sym);
                for (const auto& alt : sym.alts) {
                    if (alt_has_ellipsis(alt)) continue;
                    for (auto& s : expand_seq(alt, 0, env, depth)) {
                        if (paren) {
                            s.tokens.insert(s.tokens.begin(), punct_token("("));
                            s.tokens.push_back(punct_token(")"));
                        }
                        out.push_back(std::move(s));
                        check_budget(out.size());
                    }
                }
                break;
            }
        }
        if (sym.optional) {
            std::vector<Sentence> with_empty;
            with_empty.push_back({{}, std::move(env)});
            for (auto& s : out) with_empty.push_back(std::move(s));
            return with_empty;
        }
        return out;
    }
};

// --------------------------------------------------------------------------
// Membership: token-level match with full backtracking across alternatives
// and a consistent copy environment.

class Matcher {
public:
    Matcher(const GrammarSpec& g, const std::vector<Token>& toks) : g_(g), t_(toks) {}

    bool matches() {
        for (const auto& st : match_ref(g_.start, 0, {}))
            if (t_[st.first].kind == Token::Kind::End) return true;
        return false;
    }

private:
    const GrammarSpec& g_;
    const std::vector<Token>& t_;
    using State = std::pair<std::size_t, CopyEnv>;
    std::set<std::pair<std::string, std::size_t>> active_;

    std::vector<State> match_ref(const std::string& name, std::size_t pos, CopyEnv env) {
        bool copy = GrammarSpec::is_copy(name);
        if (copy) {
            if (auto it = env.find(name); it != env.end()) {
                const auto& bound = it->second;
                if (pos + bound.size() >= t_.size()) return {};
                for (std::size_t i = 0; i < bound.size(); ++i)
                    if (!t_[pos + i].same(bound[i])) return {};
                return {{pos + bound.size(), std::move(env)}};
            }
        }
        const GrammarRule* r = g_.resolve(name);
        if (!r) return {};
        auto key = std::make_pair(name, pos);
        if (active_.count(key)) return {};  // left recursion guard
        active_.insert(key);
        std::vector<State> out;
        for (const auto& alt : r->alts) {
            if (alt_has_ellipsis(alt)) continue;
            for (auto& st : match_seq(alt, 0, pos, env)) {
                if (copy) {
                    CopyEnv e = st.second;
                    e[name] = std::vector<Token>(t_.begin() + static_cast<std::ptrdiff_t>(pos),
                                                 t_.begin() + static_cast<std::ptrdiff_t>(st.first));
                    out.push_back({st.first, std::move(e)});
                } else {
                    out.push_back(std::move(st));
                }
            }
        }
        active_.erase(key);
        return out;
    }

    std::vector<State> match_seq(const GrammarAlt& alt, std::size_t i, std::size_t pos,
                                 CopyEnv env) {
        if (i == alt.size()) return {{pos, std::move(env)}};
        std::vector<State> out;
        for (auto& st : match_symbol(alt[i], pos, env))
            for (auto& rest : match_seq(alt, i + 1, st.first, st.second))
                out.push_back(std::move(rest));
        return out;
    }

    std::vector<State> match_symbol(const GrammarSymbol& sym, std::size_t pos, CopyEnv env) {
        std::vector<State> out;
        switch (sym.kind) {
            case GrammarSymbol::Kind::Terminal: {
                bool ok = pos + sym.tokens.size() < t_.size();
                for (std::size_t i = 0; ok && i < sym.tokens.size(); ++i)
                    if (!t_[pos + i].same(sym.tokens[i])) ok = false;
                if (ok) out.push_back({pos + sym.tokens.size(), env});
                break;
            }
            case GrammarSymbol::Kind::Ellipsis:
                break;
            case GrammarSymbol::Kind::Builtin:
                out = match_builtin(sym.builtin, pos, env);
                break;
            case GrammarSymbol::Kind::Ref:
                out = match_ref(sym.name, pos, env);
                break;
            case GrammarSymbol::Kind::Group: {
                bool paren = literal_paren_group(sym);
                std::size_t start = pos;
                if (paren) {
                    if (!(t_[start].kind == Token::Kind::Punct && t_[start].text == "("))
                        break;
                    ++start;
                }
                for (const auto& alt : sym.alts) {
                    if (alt_has_ellipsis(alt)) continue;
                    for (auto& st : match_seq(alt, 0, start, env)) {
                        if (paren) {
                            if (t_[st.first].kind == Token::Kind::Punct && t_[st.first].text == ")")
                                out.push_back({st.first + 1, std::move(st.second)});
                        } else {
                            out.push_back(std::move(st));
                        }
                    }
                }
                break;
            }
        }
        if (sym.optional) out.push_back({pos, std::move(env)});
        return out;
    }

    std::vector<State> match_builtin(BuiltinClass b, std::size_t pos, CopyEnv env) {
        const Token& t = t_[pos];
        switch (b) {
            case BuiltinClass::Number:
                if (t.kind == Token::Kind::Number) return {{pos + 1, std::move(env)}};
                return {};
            case BuiltinClass::Str:
                if (t.kind == Token::Kind::String ||
                    (t.kind == Token::Kind::Ident && t.text != "true" && t.text != "false"))
                    return {{pos + 1, std::move(env)}};
                return {};
            case BuiltinClass::Datetime:
                if (t.kind == Token::Kind::String && parse_date_any(t.text, ""))
                    return {{pos + 1, std::move(env)}};
                return {};
            case BuiltinClass::Boolean:
                if (t.kind == Token::Kind::Ident && (t.text == "true" || t.text == "false"))
                    return {{pos + 1, std::move(env)}};
                return {};
            case BuiltinClass::Array: {
                // Balanced {...} or [...] constant.
                if (t.kind != Token::Kind::Punct || (t.text != "{" && t.text != "["))
                    return {};
                std::string close = t.text == "{" ? "}" : "";
                std::size_t p = pos + 1;
                while (t_[p].kind != Token::Kind::End) {
                    if (t_[p].kind == Token::Kind::Punct &&
                        ((close == "}" && t_[p].text == "}") ||
                         (close.empty() && (t_[p].text == "]" || t_[p].text == ")"))))
                        return {{p + 1, std::move(env)}};
                    ++p;
                }
                return {};
            }
        }
        return {};
    }
};

}  // namespace detail

/// The full hypothesis grammar with infinite builtin classes; every valid
/// hypothesis statement is a member of this space.
inline GrammarSpec base_grammar(const FunctionRegistry& reg = FunctionRegistry::instance()) {
    using namespace detail;
    GrammarSpec g;
    g.provenance = Provenance::H;

    GrammarRule hyp{"hyp",
                    {
                        {term_text("("), ref_sym("expr"), ref_sym("op"), ref_sym("expr"),
                         term_text(")"), term_text("["), ref_sym("pred"), term_text("]"),
                         group_sym({{term_text("&"), ref_sym("hyp")}}, true)},
                        {ref_sym("expr"), ref_sym("op"), ref_sym("expr"),
                         group_sym({{term_text("["), ref_sym("pred"), term_text("]")}}, true),
                         group_sym({{term_text("&"), ref_sym("hyp")}}, true)},
                    },
                    false};

    GrammarRule expr{"expr",
                     {
                         {ref_sym("func"), term_text("("),
                          group_sym({{ref_sym("expr"),
                                      group_sym({{term_text(","), ref_sym("expr"),
                                                  group_sym({{term_text(","), ref_sym("expr")}},
                                                            true)}},
                                                true)}},
                                    true),
                          term_text(")"),
                          group_sym({{term_text("["), ref_sym("pred"), term_text("]")}}, true)},
                         {ref_sym("var")},
                     },
                     false};

    GrammarRule var{"var",
                    {
                        {ref_sym("attr"),
                         group_sym({{term_text("["), ref_sym("pred"), term_text("]")}}, true)},
                        {ref_sym("const")},
                    },
                    false};

    GrammarRule pred{"pred",
                     {
                         {group_sym({{term_text("!")}}, true), ref_sym("attr"), ref_sym("op"),
                          ref_sym("const"),
                          group_sym({{term_text("&"), ref_sym("pred")}}, true)},
                     },
                     false};

    GrammarRule attr{"attr", {{builtin_sym(BuiltinClass::Str)}}, false};

    GrammarRule func{"func", {}, false};
    for (const auto& sig : reg.all()) func.alts.push_back({term_text(sig.name)});

    GrammarRule op{"op", {}, false};
    for (const auto& o : op_terminals()) op.alts.push_back({term_text(o)});

    GrammarRule cst{"const",
                    {{builtin_sym(BuiltinClass::Number)},
                     {builtin_sym(BuiltinClass::Str)},
                     {builtin_sym(BuiltinClass::Datetime)},
                     {builtin_sym(BuiltinClass::Boolean)},
                     {builtin_sym(BuiltinClass::Array)}},
                    false};

    g.rules = {hyp, expr, var, pred, attr, func, op, cst};
    return g;
}

inline SpaceSize size(const GrammarSpec& g) {
    detail::SizeCounter c(g);
    return c.run();
}

inline GrammarSpec ground(const GrammarSpec& g, const Table& t,
                          const FunctionRegistry& reg = FunctionRegistry::instance()) {
    using detail::ident_token;
    if (t.data_attrs().empty())
        throw DataError("empty-table", "cannot ground a grammar on a table with no attributes");
    GrammarSpec out = g;
    bool was_base = g == base_grammar(reg);

    auto replace_open_alts = [](GrammarRule& r, const std::vector<GrammarAlt>& grounded) {
        std::vector<GrammarAlt> keep;
        bool open = false;
        for (auto& alt : r.alts) {
            bool has_open = detail::alt_has_ellipsis(alt);
            for (const auto& s : alt)
                if (s.kind == GrammarSymbol::Kind::Builtin) has_open = true;
            if (has_open) open = true;
            else keep.push_back(alt);
        }
        if (!open) return;
        for (const auto& galt : grounded)
            if (std::find(keep.begin(), keep.end(), galt) == keep.end()) keep.push_back(galt);
        r.alts = std::move(keep);
    };

    std::vector<GrammarAlt> attr_alts;
    for (const auto& a : t.data_attrs())
        attr_alts.push_back({detail::term_sym({ident_token(a)})});
    std::vector<GrammarAlt> func_alts;
    for (const auto& sig : reg.all()) func_alts.push_back({detail::term_text(sig.name)});
    std::vector<GrammarAlt> op_alts;
    for (const auto& o : detail::op_terminals()) op_alts.push_back({detail::term_text(o)});

    for (auto& r : out.rules) {
        std::string base = GrammarSpec::copy_base(r.name);
        if (base.empty()) base = r.name;
        if (base == "attr") replace_open_alts(r, attr_alts);
        else if (base == "func") replace_open_alts(r, func_alts);
        else if (base == "op") replace_open_alts(r, op_alts);
    }

    // Restrict const copies that sit next to a concrete `attr op` (or the
    // reverse) to that attribute's observed distinct values.
    std::map<std::string, std::set<std::string>> bound_to;  // copy -> attr names
    auto is_op_token = [](const Token& tok) {
        if (tok.kind == Token::Kind::Punct)
            return tok.text == "=" || tok.text == "!=" || tok.text == "<" || tok.text == "<=" ||
                   tok.text == ">" || tok.text == ">=" || tok.text == "~";
        return tok.kind == Token::Kind::Ident && tok.text == "in";
    };

    struct Atom {
        enum class K { Attr, Op, ConstCopy, Other } k;
        std::string text;  // attribute name or copy name
    };
    auto scan = [&](const std::vector<Atom>& atoms) {
        for (std::size_t i = 0; i + 2 < atoms.size(); ++i) {
            const Atom& a = atoms[i];
            const Atom& o = atoms[i + 1];
            const Atom& b = atoms[i + 2];
            if (o.k != Atom::K::Op) continue;
            if (a.k == Atom::K::Attr && b.k == Atom::K::ConstCopy)
                bound_to[b.text].insert(a.text);
            if (a.k == Atom::K::ConstCopy && b.k == Atom::K::Attr)
                bound_to[a.text].insert(b.text);
        }
    };
    // Flattens one alternative into a linear atom list; single-alternative
    // groups spill their content, branching groups are scanned separately.
    std::function<void(const GrammarAlt&, std::vector<Atom>&)> flatten =
        [&](const GrammarAlt& alt, std::vector<Atom>& atoms) {
            for (const auto& s : alt) {
                switch (s.kind) {
                    case GrammarSymbol::Kind::Terminal:
                        for (const auto& tok : s.tokens) {
                            if (is_op_token(tok)) atoms.push_back({Atom::K::Op, tok.text});
                            else if (tok.kind == Token::Kind::Ident && t.attr_index(tok.text) >= 0)
                                atoms.push_back({Atom::K::Attr, tok.text});
                            else atoms.push_back({Atom::K::Other, ""});
                        }
                        break;
                    case GrammarSymbol::Kind::Ref: {
                        std::string b = GrammarSpec::copy_base(s.name);
                        if (b == "const") atoms.push_back({Atom::K::ConstCopy, s.name});
                        else if (b == "op" || s.name == "op") atoms.push_back({Atom::K::Op, ""});
                        else atoms.push_back({Atom::K::Other, ""});
                        break;
                    }
                    case GrammarSymbol::Kind::Group:
                        if (s.alts.size() == 1 && !s.optional) {
                            flatten(s.alts[0], atoms);
                        } else {
                            for (const auto& inner : s.alts) {
                                std::vector<Atom> sub;
                                flatten(inner, sub);
                                scan(sub);
                            }
                            atoms.push_back({Atom::K::Other, ""});
                        }
                        break;
                    default:
                        atoms.push_back({Atom::K::Other, ""});
                }
            }
        };

    for (const auto& r : out.rules)
        for (const auto& alt : r.alts) {
            std::vector<Atom> atoms;
            flatten(alt, atoms);
            scan(atoms);
        }

    for (const auto& [copy, attrs] : bound_to) {
        // Restriction applies to open rules only; an explicit concrete list
        // is the author's choice and stands.
        if (const GrammarRule* existing = out.resolve(copy)) {
            bool open = existing->synthesized;
            for (const auto& alt : existing->alts) {
                if (detail::alt_has_ellipsis(alt)) open = true;
                for (const auto& s : alt)
                    if (s.kind == GrammarSymbol::Kind::Builtin) open = true;
            }
            if (!open) continue;
        }
        std::vector<GrammarAlt> alts;
        for (const auto& an : attrs) {
            for (const auto& cv : distinct_values(t, an)) {
                Token tok;
                switch (cv.kind) {
                    case ConstValue::Kind::Number:
                        tok.kind = Token::Kind::Number;
                        tok.num = cv.num;
                        tok.text = num_to_string(cv.num);
                        break;
                    case ConstValue::Kind::Str:
                        tok.kind = Token::Kind::String;
                        tok.text = cv.str;
                        tok.quote = '\'';
                        break;
                    case ConstValue::Kind::Date: {
                        tok.kind = Token::Kind::String;
                        std::string p = pretty_print(cv);
                        tok.text = p.substr(1, p.size() - 2);
                        tok.quote = '\'';
                        break;
                    }
                    case ConstValue::Kind::Bool:
                        tok.kind = Token::Kind::Ident;
                        tok.text = cv.boolean ? "true" : "false";
                        break;
                    default:
                        continue;
                }
                GrammarAlt alt{detail::term_sym({tok})};
                if (std::find(alts.begin(), alts.end(), alt) == alts.end())
                    alts.push_back(std::move(alt));
            }
        }
        if (GrammarRule* r = out.find(copy)) {
            r->alts = std::move(alts);
            r->synthesized = false;
        } else {
            out.rules.push_back({copy, std::move(alts), false});
        }
    }

    if (was_base) out.provenance = Provenance::H_D;
    return out;
}

/// All sentences of a finite grammar, rendered as text, in deterministic
/// alternative-index order.
inline std::vector<std::string> enumerate_sentences(const GrammarSpec& g,
                                                    const SpaceLimits& lim = {}) {
    SpaceSize sz = size(g);
    if (!sz.exact)
        throw SpaceError("unbounded-space", "space is unbounded via: " + [&] {
            std::string s;
            for (const auto& n : sz.offenders) s += (s.empty() ? "" : ", ") + n;
            return s;
        }(), sz.offenders);
    if (sz.n > lim.limit)
        throw SpaceError("space-too-large",
                         "space has " + std::to_string(sz.n) + " sentences, limit is " +
                             std::to_string(lim.limit),
                         {});
    detail::Enumerator e(g, lim.limit, 1 << 20);
    std::vector<std::string> out;
    for (auto& toks : e.run()) out.push_back(render_tokens(toks));
    return out;
}

inline std::vector<HypothesisAst> enumerate_space(const GrammarSpec& g,
                                                  const SpaceLimits& lim = {}) {
    std::vector<HypothesisAst> out;
    for (const auto& s : enumerate_sentences(g, lim)) out.push_back(parse_hypothesis(s));
    return out;
}

/// k sentences drawn uniformly without replacement; recursion is cut at
/// lim.depth so self-recursive rules stay finite.
inline std::vector<std::string> sample_space(const GrammarSpec& g, std::size_t k,
                                             std::uint64_t seed, const SpaceLimits& lim = {}) {
    detail::Enumerator e(g, lim.limit, lim.depth);
    std::vector<std::string> all;
    for (auto& toks : e.run()) all.push_back(render_tokens(toks));
    if (k > all.size()) k = all.size();
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with modulo draws keeps output identical across
    // standard library implementations.
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (all.size() - i));
        std::swap(all[i], all[j]);
    }
    all.resize(k);
    return all;
}

inline bool member(const GrammarSpec& g, std::string_view text, const Table* t = nullptr) {
    std::vector<Token> toks;
    try {
        toks = lex(text);
    } catch (const ParseError&) {
        return false;
    }
    detail::Matcher m(g, toks);
    if (!m.matches()) return false;
    if (t) {
        try {
            HypothesisAst h = parse_hypothesis(text);
            return typecheck(h, *t).ok();
        } catch (const ParseError&) {
            return false;
        }
    }
    return true;
}

inline bool member(const GrammarSpec& g, const HypothesisAst& h, const Table* t = nullptr) {
    return member(g, pretty_print(h), t);
}

/// g1 ⊆ g2 by enumerate-and-test; g2 may be infinite.
inline bool contains(const GrammarSpec& g1, const GrammarSpec& g2, const SpaceLimits& lim = {}) {
    for (const auto& s : enumerate_sentences(g1, lim))
        if (!member(g2, s)) return false;
    return true;
}

struct IntersectResult {
    std::vector<std::string> sentences;
    std::optional<unsigned long long> card_left;
    std::optional<unsigned long long> card_right;
    unsigned long long card_intersection = 0;
};

inline IntersectResult intersect(const GrammarSpec& g1, const GrammarSpec& g2,
                                 const SpaceLimits& lim = {}) {
    SpaceSize s1 = size(g1), s2 = size(g2);
    IntersectResult res;
    if (s1.exact) res.card_left = s1.n;
    if (s2.exact) res.card_right = s2.n;
    bool use1 = s1.exact && s1.n <= lim.limit;
    bool use2 = s2.exact && s2.n <= lim.limit;
    if (!use1 && !use2)
        throw SpaceError("space-too-large",
                         "neither side is enumerable within the limit of " +
                             std::to_string(lim.limit),
                         {});
    const GrammarSpec& fin = use1 ? g1 : g2;
    const GrammarSpec& other = use1 ? g2 : g1;
    for (const auto& s : enumerate_sentences(fin, lim))
        if (member(other, s)) res.sentences.push_back(s);
    res.card_intersection = res.sentences.size();
    return res;
}

}  // namespace hypgram
