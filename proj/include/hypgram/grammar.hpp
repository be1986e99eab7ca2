#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypgram/errors.hpp"
#include "hypgram/lexer.hpp"

namespace hypgram {

/// Which well-known space a grammar denotes. Informational only.
enum class Provenance { H, H_D, H_A, H_V, Custom };

inline std::string provenance_text(Provenance p) {
    switch (p) {
        case Provenance::H: return "H";
        case Provenance::H_D: return "H_D";
        case Provenance::H_A: return "H_A";
        case Provenance::H_V: return "H_V";
        case Provenance::Custom: return "custom";
    }
    return "custom";
}

/// Built-in terminal classes with infinite domains.
enum class BuiltinClass { Number, Str, Datetime, Boolean, Array };

inline std::optional<BuiltinClass> builtin_class(const std::string& name) {
    if (name == "number" || name == "int" || name == "float") return BuiltinClass::Number;
    if (name == "str" || name == "string") return BuiltinClass::Str;
    if (name == "datetime" || name == "date") return BuiltinClass::Datetime;
    if (name == "boolean" || name == "bool") return BuiltinClass::Boolean;
    if (name == "array") return BuiltinClass::Array;
    return std::nullopt;
}

inline std::string builtin_name(BuiltinClass b) {
    switch (b) {
        case BuiltinClass::Number: return "number";
        case BuiltinClass::Str: return "str";
        case BuiltinClass::Datetime: return "datetime";
        case BuiltinClass::Boolean: return "boolean";
        case BuiltinClass::Array: return "array";
    }
    return "?";
}

struct GrammarSymbol;
using GrammarAlt = std::vector<GrammarSymbol>;  // one alternative: a symbol sequence

/// A grammar symbol: terminal token run, nonterminal reference (possibly a
/// numbered copy), builtin class, parenthesized group, or the `...`
/// elision marker. A trailing `?` makes any symbol optional.
struct GrammarSymbol {
    enum class Kind { Terminal, Ref, Builtin, Group, Ellipsis };
    Kind kind = Kind::Terminal;
    bool optional = false;
    std::vector<Token> tokens;          // Terminal
    std::string name;                   // Ref: as written (copy index included)
    BuiltinClass builtin = BuiltinClass::Str;  // Builtin
    std::vector<GrammarAlt> alts;       // Group
    bool quoted = false;                // Terminal came from a double-quoted run

    bool operator==(const GrammarSymbol& o) const {
        if (kind != o.kind || optional != o.optional) return false;
        switch (kind) {
            case Kind::Terminal: {
                if (tokens.size() != o.tokens.size()) return false;
                for (std::size_t i = 0; i < tokens.size(); ++i)
                    if (!tokens[i].same(o.tokens[i])) return false;
                return true;
            }
            case Kind::Ref: return name == o.name;
            case Kind::Builtin: return builtin == o.builtin;
            case Kind::Group: return alts == o.alts;
            case Kind::Ellipsis: return true;
        }
        return false;
    }
};

struct GrammarRule {
    std::string name;
    std::vector<GrammarAlt> alts;  // ordered: PEG choice tries them in order
    bool synthesized = false;      // implicit rule (const copy etc.), not printed
    bool operator==(const GrammarRule& o) const {
        return name == o.name && alts == o.alts;
    }
};

/// A set of production rules over named nonterminals; doubles as a hypothesis
/// space. Copy indices (const1, attr2) are distinct nonterminals: within one
/// derived sentence every occurrence of the same copy binds to the same
/// expansion.
struct GrammarSpec {
    std::vector<GrammarRule> rules;  // file order
    std::string start = "hyp";
    Provenance provenance = Provenance::Custom;

    const GrammarRule* find(const std::string& name) const {
        for (const auto& r : rules)
            if (r.name == name) return &r;
        return nullptr;
    }
    GrammarRule* find(const std::string& name) {
        for (auto& r : rules)
            if (r.name == name) return &r;
        return nullptr;
    }

    /// Resolves a reference, falling back from a copy name (const1) to its
    /// base rule (const). Returns nullptr when neither exists.
    const GrammarRule* resolve(const std::string& name) const {
        if (const auto* r = find(name)) return r;
        std::string base = copy_base(name);
        if (!base.empty())
            if (const auto* r = find(base)) return r;
        return nullptr;
    }

    /// "const1" -> "const"; empty string when the name carries no copy index.
    static std::string copy_base(const std::string& name) {
        std::size_t i = name.size();
        while (i > 0 && std::isdigit(static_cast<unsigned char>(name[i - 1]))) --i;
        if (i == name.size() || i == 0) return "";
        return name.substr(0, i);
    }

    static bool is_copy(const std::string& name) { return !copy_base(name).empty(); }

    bool operator==(const GrammarSpec& o) const {
        if (start != o.start) return false;
        auto visible = [](const GrammarSpec& g) {
            std::vector<GrammarRule> v;
            for (const auto& r : g.rules)
                if (!r.synthesized) v.push_back(r);
            return v;
        };
        return visible(*this) == visible(o);
    }
};

// ---------------------------------------------------------------------------
// Grammar printer: one rule per line, `name :- alt | alt`.

inline std::string print_symbol(const GrammarSymbol& s) {
    std::string out;
    switch (s.kind) {
        case GrammarSymbol::Kind::Terminal:
            if (s.quoted || s.tokens.size() > 1 ||
                (s.tokens.size() == 1 && s.tokens[0].kind == Token::Kind::Punct))
                out = "\"" + render_tokens(s.tokens) + "\"";
            else
                out = render_tokens(s.tokens);
            break;
        case GrammarSymbol::Kind::Ref: out = s.name; break;
        case GrammarSymbol::Kind::Builtin: out = builtin_name(s.builtin); break;
        case GrammarSymbol::Kind::Ellipsis: out = "..."; break;
        case GrammarSymbol::Kind::Group: {
            out = "(";
            for (std::size_t a = 0; a < s.alts.size(); ++a) {
                if (a) out += " | ";
                for (std::size_t i = 0; i < s.alts[a].size(); ++i) {
                    if (i) out += " ";
                    out += print_symbol(s.alts[a][i]);
                }
            }
            out += ")";
            break;
        }
    }
    if (s.optional) out += "?";
    return out;
}

inline std::string print_grammar(const GrammarSpec& g) {
    std::string out;
    for (const auto& r : g.rules) {
        if (r.synthesized) continue;
        out += r.name + " :- ";
        for (std::size_t a = 0; a < r.alts.size(); ++a) {
            if (a) out += " | ";
            for (std::size_t i = 0; i < r.alts[a].size(); ++i) {
                if (i) out += " ";
                out += print_symbol(r.alts[a][i]);
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace hypgram
