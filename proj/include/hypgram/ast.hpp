#pragma once

#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "hypgram/errors.hpp"
#include "hypgram/lexer.hpp"

namespace hypgram {

/// Comparison operators usable between expressions and inside predicates.
enum class OpKind { Eq, Neq, Lt, Le, Gt, Ge, RegexMatch, In, NotIn };

inline std::string op_text(OpKind op) {
    switch (op) {
        case OpKind::Eq: return "=";
        case OpKind::Neq: return "!=";
        case OpKind::Lt: return "<";
        case OpKind::Le: return "<=";
        case OpKind::Gt: return ">";
        case OpKind::Ge: return ">=";
        case OpKind::RegexMatch: return "~";
        case OpKind::In: return "in";
        case OpKind::NotIn: return "not in";
    }
    return "?";
}

/// A literal appearing in hypothesis text: scalar, array, or interval.
struct ConstValue {
    enum class Kind { Number, Str, Date, Bool, Array, Interval };
    Kind kind = Kind::Number;
    double num = 0.0;      // Number / Date (epoch seconds)
    std::string str;       // Str, and the original text of a Date
    bool boolean = false;
    std::vector<ConstValue> elems;  // Array (homogeneous scalars)
    double lo = 0.0, hi = 0.0;      // Interval
    bool lo_closed = true, hi_closed = true;

    static ConstValue number(double v) { ConstValue c; c.kind = Kind::Number; c.num = v; return c; }
    static ConstValue string(std::string s) { ConstValue c; c.kind = Kind::Str; c.str = std::move(s); return c; }
    static ConstValue boolean_(bool b) { ConstValue c; c.kind = Kind::Bool; c.boolean = b; return c; }
    static ConstValue interval(double lo, double hi, bool lc, bool hc) {
        if (lo > hi) throw ParseError("interval requires lo <= hi", {});
        ConstValue c; c.kind = Kind::Interval; c.lo = lo; c.hi = hi; c.lo_closed = lc; c.hi_closed = hc;
        return c;
    }
    static ConstValue array(std::vector<ConstValue> elems) {
        ConstValue c; c.kind = Kind::Array; c.elems = std::move(elems); return c;
    }

    bool operator==(const ConstValue& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
            case Kind::Number: case Kind::Date: return num == o.num;
            case Kind::Str: return str == o.str;
            case Kind::Bool: return boolean == o.boolean;
            case Kind::Array: return elems == o.elems;
            case Kind::Interval:
                return lo == o.lo && hi == o.hi && lo_closed == o.lo_closed && hi_closed == o.hi_closed;
        }
        return false;
    }
};

struct ExprNode;

/// Conjunction of row-level conditions: attr op const, optionally negated.
/// The right-hand value is usually a constant but may be a full expression
/// (e.g. AwardsWon = MAX(AwardsWon)); constants parse to Const expr nodes.
struct PredNode {
    struct Conjunct {
        bool negated = false;
        std::string attr;
        OpKind op = OpKind::Eq;
        std::vector<ExprNode> value;  // exactly one element (vector breaks the type cycle)
        Span span;
        bool operator==(const Conjunct& o) const;
    };
    std::vector<Conjunct> conjuncts;  // non-empty; '&' is the only connective
    bool operator==(const PredNode&) const = default;
};

/// Expression tree: function call, attribute reference, or constant.
/// Function calls may carry a trailing predicate which scopes the rows the
/// call evaluates over (count()[Gate-name~'^ranger']).
struct ExprNode {
    enum class Kind { FuncCall, VarRef, Const };
    Kind kind = Kind::Const;
    std::string name;               // function or attribute name
    std::vector<ExprNode> args;     // FuncCall arguments
    std::optional<PredNode> pred;   // VarRef / FuncCall row restriction
    ConstValue value;               // Const
    Span span;

    bool operator==(const ExprNode& o) const {
        if (kind != o.kind) return false;
        switch (kind) {
            case Kind::FuncCall: return name == o.name && args == o.args && pred == o.pred;
            case Kind::VarRef: return name == o.name && pred == o.pred;
            case Kind::Const: return value == o.value;
        }
        return false;
    }

    static ExprNode constant(ConstValue v) {
        ExprNode e; e.kind = Kind::Const; e.value = std::move(v); return e;
    }
    static ExprNode var(std::string attr, std::optional<PredNode> p = std::nullopt) {
        ExprNode e; e.kind = Kind::VarRef; e.name = std::move(attr); e.pred = std::move(p); return e;
    }
    static ExprNode call(std::string fn, std::vector<ExprNode> args,
                         std::optional<PredNode> p = std::nullopt) {
        ExprNode e; e.kind = Kind::FuncCall; e.name = std::move(fn);
        e.args = std::move(args); e.pred = std::move(p);
        return e;
    }
};

inline bool PredNode::Conjunct::operator==(const Conjunct& o) const {
    return negated == o.negated && attr == o.attr && op == o.op && value == o.value;
}

/// One comparison `lhs op rhs` with an optional hypothesis-level predicate
/// restricting both sides to the same rows.
struct Clause {
    ExprNode lhs;
    OpKind op = OpKind::Eq;
    ExprNode rhs;
    std::optional<PredNode> pred;
    Span span;
    bool operator==(const Clause& o) const {
        return lhs == o.lhs && op == o.op && rhs == o.rhs && pred == o.pred;
    }
};

/// A hypothesis statement. Conjoined hypotheses (`... & ...`) are stored as a
/// flat clause list; the statement holds iff every clause holds.
struct HypothesisAst {
    std::vector<Clause> clauses;  // at least one
    bool operator==(const HypothesisAst&) const = default;
};

// ---------------------------------------------------------------------------
// Canonical printer. Output re-parses to a structurally equal AST.

std::string pretty_print(const ExprNode& e);

inline std::string quoted(const std::string& s) {
    // the lexer has no escapes; pick whichever quote the text doesn't use
    char q = s.find('\'') == std::string::npos ? '\'' : '"';
    return q + s + q;
}

inline std::string pretty_print(const ConstValue& c) {
    switch (c.kind) {
        case ConstValue::Kind::Number: return num_to_string(c.num);
        case ConstValue::Kind::Str: return quoted(c.str);
        case ConstValue::Kind::Date: {
            if (!c.str.empty()) return "'" + c.str + "'";
            std::time_t tt = static_cast<std::time_t>(c.num);
            std::tm tm{};
            gmtime_r(&tt, &tm);
            char buf[32];
            bool midnight = tm.tm_hour == 0 && tm.tm_min == 0 && tm.tm_sec == 0;
            std::strftime(buf, sizeof buf, midnight ? "%Y-%m-%d" : "%Y-%m-%d %H:%M:%S", &tm);
            return std::string("'") + buf + "'";
        }
        case ConstValue::Kind::Bool: return c.boolean ? "true" : "false";
        case ConstValue::Kind::Array: {
            std::string out = "{";
            for (std::size_t i = 0; i < c.elems.size(); ++i) {
                if (i) out += ", ";
                out += pretty_print(c.elems[i]);
            }
            return out + "}";
        }
        case ConstValue::Kind::Interval: {
            std::string out = c.lo_closed ? "[" : "(";
            out += num_to_string(c.lo) + ", " + num_to_string(c.hi);
            out += c.hi_closed ? "]" : ")";
            return out;
        }
    }
    return "";
}

inline std::string pretty_print(const PredNode& p) {
    std::string out;
    for (std::size_t i = 0; i < p.conjuncts.size(); ++i) {
        const auto& c = p.conjuncts[i];
        if (i) out += " & ";
        std::string body = c.attr + " " + op_text(c.op) + " " + pretty_print(c.value.front());
        out += c.negated ? "!(" + body + ")" : body;
    }
    return out;
}

inline std::string pretty_print(const ExprNode& e) {
    switch (e.kind) {
        case ExprNode::Kind::Const: return pretty_print(e.value);
        case ExprNode::Kind::VarRef:
            return e.pred ? e.name + "[" + pretty_print(*e.pred) + "]" : e.name;
        case ExprNode::Kind::FuncCall: {
            std::string out = e.name + "(";
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                out += pretty_print(e.args[i]);
            }
            out += ")";
            if (e.pred) out += "[" + pretty_print(*e.pred) + "]";
            return out;
        }
    }
    return "";
}

inline std::string pretty_print(const Clause& cl) {
    std::string body = pretty_print(cl.lhs) + " " + op_text(cl.op) + " " + pretty_print(cl.rhs);
    if (!cl.pred) return body;
    // A trailing [pred] would re-attach to a var/func rhs, so parenthesize.
    bool rhs_captures = cl.rhs.kind != ExprNode::Kind::Const;
    if (rhs_captures) return "(" + body + ")[" + pretty_print(*cl.pred) + "]";
    return body + " [" + pretty_print(*cl.pred) + "]";
}

inline std::string pretty_print(const HypothesisAst& h) {
    std::string out;
    for (std::size_t i = 0; i < h.clauses.size(); ++i) {
        if (i) out += " & ";
        out += pretty_print(h.clauses[i]);
    }
    return out;
}

}  // namespace hypgram
