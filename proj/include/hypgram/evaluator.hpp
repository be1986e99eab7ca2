#pragma once

#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "hypgram/ast.hpp"
#include "hypgram/dataset.hpp"
#include "hypgram/errors.hpp"
#include "hypgram/funcs.hpp"
#include "hypgram/value.hpp"

namespace hypgram {

enum class Verdict { True, False, Vacuous };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::True: return "true";
        case Verdict::False: return "false";
        case Verdict::Vacuous: return "vacuous";
    }
    return "?";
}

struct TraceNode {
    std::string label;
    std::string value;
    std::vector<TraceNode> children;
};

struct EvalOutcome {
    Verdict verdict = Verdict::True;
    std::vector<Verdict> clause_results;
    TraceNode trace;
    bool trace_elided = false;
};

struct TypeIssue {
    Span span;
    std::string message;
};

struct TypeReport {
    std::vector<TypeIssue> issues;
    bool ok() const { return issues.empty(); }
};

struct EvalOptions {
    FuncConfig funcs;
    bool vacuous_as_true = false;
    std::size_t trace_cap = 10000;
};

namespace detail {

// --------------------------------------------------------------------------
// Type checking

enum class TyKind { ScalarNumber, ScalarString, ScalarBool, VectorNumber, VectorString, Model,
                    ArrayTy, IntervalTy, Unknown };

inline bool numeric_attr(AttrType t) { return t != AttrType::Str; }

class TypeChecker {
public:
    TypeChecker(const Table& t, const FunctionRegistry& reg) : t_(t), reg_(reg) {}

    TypeReport check(const HypothesisAst& h) {
        for (const auto& cl : h.clauses) {
            if (cl.pred) check_pred(*cl.pred);
            TyKind l = check_expr(cl.lhs);
            TyKind r = check_expr(cl.rhs);
            check_comparison(cl, l, r);
        }
        return std::move(report_);
    }

    TypeReport check(const ExprNode& e) {
        check_expr(e);
        return std::move(report_);
    }

private:
    const Table& t_;
    const FunctionRegistry& reg_;
    TypeReport report_;

    void issue(Span s, std::string msg) { report_.issues.push_back({s, std::move(msg)}); }

    void check_pred(const PredNode& p) {
        for (const auto& cj : p.conjuncts) {
            int ci = t_.attr_index(cj.attr);
            if (ci < 0) {
                issue(cj.span, "unknown attribute '" + cj.attr + "'");
                continue;
            }
            AttrType at = t_.attrs[static_cast<std::size_t>(ci)].type;
            const ExprNode& v = cj.value.front();
            if (v.kind == ExprNode::Kind::Const) {
                check_op_const(cj.op, at, v.value, cj.span, cj.attr);
            } else {
                TyKind k = check_expr(v);
                if (at == AttrType::Str && k != TyKind::ScalarString && k != TyKind::Unknown)
                    issue(cj.span, "'" + cj.attr + "' is a string attribute but the predicate "
                                   "value is numeric");
                if (numeric_attr(at) && k == TyKind::ScalarString)
                    issue(cj.span, "'" + cj.attr + "' is numeric but the predicate value is a string");
            }
        }
    }

    void check_op_const(OpKind op, AttrType at, const ConstValue& v, Span s,
                        const std::string& attr) {
        if (op == OpKind::RegexMatch) {
            if (at != AttrType::Str)
                issue(s, "'~' needs a string attribute, '" + attr + "' is " + attr_type_name(at));
            else if (v.kind != ConstValue::Kind::Str)
                issue(s, "'~' needs a string pattern");
            else {
                try {
                    std::regex re(v.str);
                } catch (const std::regex_error&) {
                    issue(s, "invalid regex '" + v.str + "'");
                }
            }
            return;
        }
        if (op == OpKind::In || op == OpKind::NotIn) {
            if (v.kind == ConstValue::Kind::Interval && at == AttrType::Str)
                issue(s, "interval membership needs a numeric attribute, '" + attr + "' is a string");
            if (v.kind != ConstValue::Kind::Interval && v.kind != ConstValue::Kind::Array)
                issue(s, "'in' needs an interval or array on the right");
            return;
        }
        bool rel = op == OpKind::Lt || op == OpKind::Le || op == OpKind::Gt || op == OpKind::Ge;
        if (at == AttrType::Str && v.kind == ConstValue::Kind::Number && rel)
            issue(s, "ordering a string attribute '" + attr + "' against a number");
        if (numeric_attr(at) && at != AttrType::Date && v.kind == ConstValue::Kind::Str &&
            !parse_number(v.str))
            issue(s, "comparing numeric attribute '" + attr + "' against a string");
    }

    TyKind const_kind(const ConstValue& v) {
        switch (v.kind) {
            case ConstValue::Kind::Number:
            case ConstValue::Kind::Date: return TyKind::ScalarNumber;
            case ConstValue::Kind::Str: return TyKind::ScalarString;
            case ConstValue::Kind::Bool: return TyKind::ScalarBool;
            case ConstValue::Kind::Array: return TyKind::ArrayTy;
            case ConstValue::Kind::Interval: return TyKind::IntervalTy;
        }
        return TyKind::Unknown;
    }

    TyKind check_expr(const ExprNode& e) {
        switch (e.kind) {
            case ExprNode::Kind::Const:
                return const_kind(e.value);
            case ExprNode::Kind::VarRef: {
                int ci = t_.attr_index(e.name);
                if (ci < 0) {
                    issue(e.span, "unknown attribute '" + e.name + "'");
                    return TyKind::Unknown;
                }
                if (e.pred) check_pred(*e.pred);
                AttrType at = t_.attrs[static_cast<std::size_t>(ci)].type;
                return at == AttrType::Str ? TyKind::VectorString : TyKind::VectorNumber;
            }
            case ExprNode::Kind::FuncCall: {
                if (e.pred) check_pred(*e.pred);
                const FunctionSignature* sig = reg_.find(e.name);
                if (!sig) {
                    issue(e.span, "unknown function '" + e.name + "'");
                    for (const auto& a : e.args) check_expr(a);
                    return TyKind::Unknown;
                }
                int n = static_cast<int>(e.args.size());
                if (n < sig->min_arity || n > sig->max_arity) {
                    issue(e.span, sig->name + " takes " + std::to_string(sig->min_arity) +
                                      (sig->min_arity == sig->max_arity
                                           ? ""
                                           : ".." + std::to_string(sig->max_arity)) +
                                      " arguments, got " + std::to_string(n));
                }
                for (int i = 0; i < n; ++i) {
                    TyKind got = check_expr(e.args[static_cast<std::size_t>(i)]);
                    if (i >= static_cast<int>(sig->params.size())) continue;
                    ParamKind want = sig->params[static_cast<std::size_t>(i)];
                    check_param(sig->name, i, want, got,
                                e.args[static_cast<std::size_t>(i)].span);
                }
                if (sig->result == "model") return TyKind::Model;
                if (sig->result == "vector") return TyKind::VectorNumber;
                // Arithmetic over vectors stays a vector; treat "scalar"
                // results from the elementwise ops as scalar for checking.
                return TyKind::ScalarNumber;
            }
        }
        return TyKind::Unknown;
    }

    void check_param(const std::string& fn, int idx, ParamKind want, TyKind got, Span s) {
        if (got == TyKind::Unknown) return;
        auto bad = [&](const std::string& expect, const std::string& gotname) {
            issue(s, fn + " argument " + std::to_string(idx + 1) + ": " + expect +
                         " expected, got " + gotname);
        };
        switch (want) {
            case ParamKind::VectorNumber:
                if (got == TyKind::VectorString) bad("vector-number", "string column");
                else if (got == TyKind::ScalarString) bad("vector-number", "string");
                else if (got == TyKind::Model) bad("vector-number", "model");
                else if (got == TyKind::ArrayTy || got == TyKind::IntervalTy)
                    bad("vector-number", "constant collection");
                break;
            case ParamKind::ScalarNumber:
            case ParamKind::AnyNumber:
                if (got == TyKind::ScalarString || got == TyKind::VectorString)
                    bad("number", "string");
                else if (got == TyKind::Model && want == ParamKind::ScalarNumber)
                    bad("number", "model");
                else if (got == TyKind::ArrayTy || got == TyKind::IntervalTy)
                    bad("number", "constant collection");
                break;
            case ParamKind::ModelParam:
                if (got != TyKind::Model) bad("model", "non-model value");
                break;
            case ParamKind::VectorString:
                if (got != TyKind::VectorString) bad("vector-string", "non-string column");
                break;
        }
    }

    void check_comparison(const Clause& cl, TyKind l, TyKind r) {
        if (l == TyKind::Unknown || r == TyKind::Unknown) return;
        if (cl.op == OpKind::RegexMatch) {
            if (l == TyKind::ScalarNumber || l == TyKind::VectorNumber)
                issue(cl.span, "'~' applied to a numeric left-hand side");
            if (r != TyKind::ScalarString)
                issue(cl.span, "'~' needs a string pattern on the right");
            return;
        }
        if (cl.op == OpKind::In || cl.op == OpKind::NotIn) {
            if (r != TyKind::ArrayTy && r != TyKind::IntervalTy)
                issue(cl.span, "'in' needs an interval or array on the right");
            else if (r == TyKind::IntervalTy &&
                     (l == TyKind::ScalarString || l == TyKind::VectorString))
                issue(cl.span, "interval membership applied to strings");
            return;
        }
        bool lstr = l == TyKind::ScalarString || l == TyKind::VectorString;
        bool rstr = r == TyKind::ScalarString || r == TyKind::VectorString;
        bool lnum = l == TyKind::ScalarNumber || l == TyKind::VectorNumber || l == TyKind::Model;
        bool rnum = r == TyKind::ScalarNumber || r == TyKind::VectorNumber || r == TyKind::Model;
        if ((lstr && rnum) || (lnum && rstr)) {
            issue(cl.span, "comparing " + std::string(lstr ? "string" : "number") + " against " +
                               std::string(rstr ? "string" : "number"));
            return;
        }
        if (r == TyKind::ArrayTy || r == TyKind::IntervalTy || l == TyKind::ArrayTy ||
            l == TyKind::IntervalTy)
            issue(cl.span, "collections compare only via 'in'");
        check_alignment(cl);
    }

    // Both sides direct column vectors: their per-variable predicates must
    // select the same rows of the table, or the comparison cannot align.
    void check_alignment(const Clause& cl) {
        const ExprNode& a = cl.lhs;
        const ExprNode& b = cl.rhs;
        if (a.kind != ExprNode::Kind::VarRef || b.kind != ExprNode::Kind::VarRef) return;
        if (!a.pred && !b.pred) return;
        auto mask_of = [&](const ExprNode& e) -> std::optional<RowMask> {
            RowMask m = RowMask::all(t_.rows);
            if (!e.pred) return m;
            for (const auto& cj : e.pred->conjuncts) {
                if (cj.value.front().kind != ExprNode::Kind::Const) return std::nullopt;
                if (t_.attr_index(cj.attr) < 0) return std::nullopt;
                m = m & mask_where(t_, cj.attr, cj.op, cj.value.front().value, cj.negated);
            }
            return m;
        };
        std::optional<RowMask> ma, mb;
        try {
            ma = mask_of(a);
            mb = mask_of(b);
        } catch (const Error&) {
            return;  // the predicate itself was already reported
        }
        if (!ma || !mb) return;
        if (ma->bits != mb->bits)
            issue(cl.span, "'" + pretty_print(a) + "' and '" + pretty_print(b) +
                               "' select different rows; move the predicate to the hypothesis "
                               "level: (" + a.name + " " + op_text(cl.op) + " " + b.name + ")[...]");
    }
};

// --------------------------------------------------------------------------
// Evaluation

class Evaluator {
public:
    Evaluator(const Table& t, const EvalOptions& opt)
        : t_(t), opt_(opt), reg_(FunctionRegistry::instance()) {}

    EvalOutcome eval(const HypothesisAst& h) {
        EvalOutcome out;
        out.trace.label = "hypothesis";
        for (const auto& cl : h.clauses) {
            TraceNode node;
            node.label = pretty_print(cl);
            Verdict v = eval_clause(cl, node);
            out.clause_results.push_back(v);
            push_trace(out, std::move(node));
        }
        bool any_false = false, any_vac = false;
        for (Verdict v : out.clause_results) {
            if (v == Verdict::False) any_false = true;
            if (v == Verdict::Vacuous) any_vac = true;
        }
        out.verdict = any_false ? Verdict::False : any_vac ? Verdict::Vacuous : Verdict::True;
        if (out.verdict == Verdict::Vacuous && opt_.vacuous_as_true) out.verdict = Verdict::True;
        return out;
    }

    Value eval_expr(const ExprNode& e, const RowMask& ctx) {
        TraceNode scratch;
        return expr(e, ctx, scratch);
    }

    RowMask eval_pred(const PredNode& p, const RowMask& base) {
        RowMask m = base;
        for (const auto& cj : p.conjuncts) {
            ConstValue v = pred_const(cj, base);
            m = m & mask_where(t_, cj.attr, cj.op, v, cj.negated);
        }
        return m;
    }

private:
    const Table& t_;
    EvalOptions opt_;
    const FunctionRegistry& reg_;
    std::size_t trace_nodes_ = 0;

    void push_trace(EvalOutcome& out, TraceNode node) {
        std::size_t n = count_nodes(node);
        if (trace_nodes_ + n > opt_.trace_cap) {
            out.trace_elided = true;
            return;
        }
        trace_nodes_ += n;
        out.trace.children.push_back(std::move(node));
    }

    static std::size_t count_nodes(const TraceNode& n) {
        std::size_t c = 1;
        for (const auto& ch : n.children) c += count_nodes(ch);
        return c;
    }

    // Predicate values are constants or scalar expressions (resolved against
    // the predicate's own base context).
    ConstValue pred_const(const PredNode::Conjunct& cj, const RowMask& base) {
        const ExprNode& v = cj.value.front();
        if (v.kind == ExprNode::Kind::Const) return v.value;
        TraceNode scratch;
        Value val = expr(v, base, scratch);
        if (val.shape == Value::Shape::Scalar) {
            if (val.elem == AttrType::Str) return ConstValue::string(val.str);
            return ConstValue::number(val.num);
        }
        throw EvalError("precondition", "predicate value must be a scalar");
    }

    Verdict eval_clause(const Clause& cl, TraceNode& node) {
        RowMask ctx = RowMask::all(t_.rows);
        if (cl.pred) {
            ctx = eval_pred(*cl.pred, ctx);
            node.children.push_back({"rows", std::to_string(ctx.count())});
        }
        if (cl.pred && ctx.empty() && needs_rows(cl)) return Verdict::Vacuous;
        bool vacuous = false;
        Value l, r;
        try {
            l = expr(cl.lhs, ctx, node);
            r = expr(cl.rhs, ctx, node);
        } catch (const EvalError& e) {
            if (std::string(e.code()) == "empty-operand") return Verdict::Vacuous;
            throw;
        }
        if ((l.shape == Value::Shape::Vector && l.size() == 0) ||
            (r.shape == Value::Shape::Vector && r.size() == 0))
            return Verdict::Vacuous;
        bool res = compare(l, cl.op, r);
        node.children.push_back({"verdict", res ? "true" : "false"});
        if (vacuous) return Verdict::Vacuous;
        return res ? Verdict::True : Verdict::False;
    }

    // A clause over a constant-only body (2 = 2) is unaffected by an empty
    // selection; anything touching columns or count() is.
    static bool needs_rows(const Clause& cl) {
        return touches_data(cl.lhs) || touches_data(cl.rhs);
    }
    static bool touches_data(const ExprNode& e) {
        if (e.kind == ExprNode::Kind::VarRef) return true;
        if (e.kind == ExprNode::Kind::FuncCall) {
            if (e.args.empty()) return false;  // count() of an empty context is a plain 0
            for (const auto& a : e.args)
                if (touches_data(a)) return true;
        }
        return false;
    }

    Value expr(const ExprNode& e, const RowMask& ctx, TraceNode& parent) {
        switch (e.kind) {
            case ExprNode::Kind::Const:
                return Value::of_const(e.value);
            case ExprNode::Kind::VarRef: {
                RowMask m = ctx;
                if (e.pred) m = eval_pred(*e.pred, m);
                const Column& c = t_.column(e.name);
                const Attribute& a = t_.attribute(e.name);
                Value v;
                if (a.type == AttrType::Str) {
                    std::vector<std::string> vals;
                    for (std::size_t r = 0; r < t_.rows; ++r)
                        if (m.bits[r]) vals.push_back(c.strs[r]);
                    v = Value::str_vector(std::move(vals), t_.ids_where(m));
                } else {
                    std::vector<double> vals;
                    for (std::size_t r = 0; r < t_.rows; ++r)
                        if (m.bits[r]) vals.push_back(c.nums[r]);
                    v = Value::vector(std::move(vals), t_.ids_where(m), a.type);
                }
                parent.children.push_back({pretty_print(e), v.to_string()});
                return v;
            }
            case ExprNode::Kind::FuncCall: {
                RowMask m = ctx;
                if (e.pred) m = eval_pred(*e.pred, m);
                std::vector<Value> args;
                TraceNode node{pretty_print(e), "", {}};
                for (const auto& a : e.args) args.push_back(expr(a, m, node));
                FuncContext fc{&t_, m, opt_.funcs};
                Value v = reg_.call(e.name, args, fc);
                node.value = v.to_string();
                parent.children.push_back(std::move(node));
                return v;
            }
        }
        throw EvalError("precondition", "malformed expression");
    }

    // Numbers compare exactly unless either side was computed, in which case
    // equality gets a 1e-9 relative tolerance. Models coerce to r².
    bool compare(const Value& lv, OpKind op, const Value& rv) {
        if (lv.shape == Value::Shape::Vector || rv.shape == Value::Shape::Vector)
            return compare_flatten(lv, op, rv);
        return compare_scalar(lv, op, rv);
    }

    static double coerce_num(const Value& v) {
        if (v.shape == Value::Shape::Model) return v.model.r_squared;
        return v.num;
    }

    bool compare_scalar(const Value& lv, OpKind op, const Value& rv) {
        if (op == OpKind::In || op == OpKind::NotIn) {
            bool inside = member_of(lv, rv);
            return op == OpKind::In ? inside : !inside;
        }
        if (op == OpKind::RegexMatch) {
            if (lv.elem != AttrType::Str || rv.elem != AttrType::Str)
                throw EvalError("precondition", "'~' over non-strings");
            std::regex re(rv.str);
            return std::regex_search(lv.str, re);
        }
        if (lv.elem == AttrType::Str && rv.elem == AttrType::Str &&
            lv.shape == Value::Shape::Scalar && rv.shape == Value::Shape::Scalar)
            return str_rel(lv.str, op, rv.str);
        double a = coerce_num(lv), b = coerce_num(rv);
        bool tol = lv.aggregate || rv.aggregate || lv.shape == Value::Shape::Model ||
                   rv.shape == Value::Shape::Model;
        return num_rel(a, op, b, tol);
    }

    static bool str_rel(const std::string& a, OpKind op, const std::string& b) {
        switch (op) {
            case OpKind::Eq: return a == b;
            case OpKind::Neq: return a != b;
            case OpKind::Lt: return a < b;
            case OpKind::Le: return a <= b;
            case OpKind::Gt: return a > b;
            case OpKind::Ge: return a >= b;
            default: throw EvalError("precondition", "unsupported string comparison");
        }
    }

    static bool num_eq(double a, double b, bool tol) {
        if (a == b) return true;
        if (!tol) return false;
        double scale = std::max({std::abs(a), std::abs(b), 1.0});
        return std::abs(a - b) <= 1e-9 * scale;
    }

    static bool num_rel(double a, OpKind op, double b, bool tol) {
        switch (op) {
            case OpKind::Eq: return num_eq(a, b, tol);
            case OpKind::Neq: return !num_eq(a, b, tol);
            case OpKind::Lt: return a < b && !num_eq(a, b, tol);
            case OpKind::Le: return a <= b || num_eq(a, b, tol);
            case OpKind::Gt: return a > b && !num_eq(a, b, tol);
            case OpKind::Ge: return a >= b || num_eq(a, b, tol);
            default: throw EvalError("precondition", "unsupported numeric comparison");
        }
    }

    bool member_of(const Value& lv, const Value& rv) {
        if (rv.shape == Value::Shape::Interval) {
            double x = coerce_num(lv);
            const ConstValue& c = rv.cv;
            return (c.lo_closed ? x >= c.lo : x > c.lo) && (c.hi_closed ? x <= c.hi : x < c.hi);
        }
        if (rv.shape == Value::Shape::Array) {
            for (const auto& e : rv.cv.elems) {
                if (e.kind == ConstValue::Kind::Str) {
                    if (lv.elem == AttrType::Str && lv.str == e.str) return true;
                } else if (e.kind == ConstValue::Kind::Number || e.kind == ConstValue::Kind::Date) {
                    if (lv.elem != AttrType::Str && lv.num == e.num) return true;
                } else if (e.kind == ConstValue::Kind::Bool) {
                    if (lv.elem == AttrType::Bool && (lv.num != 0) == e.boolean) return true;
                }
            }
            return false;
        }
        throw EvalError("precondition", "'in' needs an interval or array");
    }

    // Flattening: vector operands compare per shared row id; all rows must hold.
    bool compare_flatten(const Value& lv, OpKind op, const Value& rv) {
        bool lvec = lv.shape == Value::Shape::Vector;
        bool rvec = rv.shape == Value::Shape::Vector;
        if (lvec && rvec && (op != OpKind::In && op != OpKind::NotIn)) {
            if (lv.ids != rv.ids) {
                std::vector<double> a = lv.ids, b = rv.ids;
                std::sort(a.begin(), a.end());
                std::sort(b.begin(), b.end());
                if (a != b)
                    throw EvalError("row-alignment",
                                    "compared vectors select different rows; move the predicate "
                                    "to the hypothesis level");
            }
            std::map<double, std::size_t> rpos;
            for (std::size_t i = 0; i < rv.ids.size(); ++i) rpos[rv.ids[i]] = i;
            for (std::size_t i = 0; i < lv.ids.size(); ++i) {
                std::size_t j = rpos[lv.ids[i]];
                Value a = element(lv, i), b = element(rv, j);
                if (!compare_scalar(a, op, b)) return false;
            }
            return true;
        }
        const Value& vec = lvec ? lv : rv;
        const Value& sc = lvec ? rv : lv;
        for (std::size_t i = 0; i < vec.size(); ++i) {
            Value el = element(vec, i);
            bool ok = lvec ? compare_scalar(el, op, sc) : compare_scalar(sc, op, el);
            if (!ok) return false;
        }
        return true;
    }

    static Value element(const Value& v, std::size_t i) {
        Value e;
        e.elem = v.elem;
        e.aggregate = v.aggregate;
        if (v.elem == AttrType::Str) e.str = v.strs[i];
        else e.num = v.nums[i];
        return e;
    }
};

}  // namespace detail

inline TypeReport typecheck(const HypothesisAst& h, const Table& t,
                            const FunctionRegistry& reg = FunctionRegistry::instance()) {
    detail::TypeChecker tc(t, reg);
    return tc.check(h);
}

inline TypeReport typecheck(const ExprNode& e, const Table& t,
                            const FunctionRegistry& reg = FunctionRegistry::instance()) {
    detail::TypeChecker tc(t, reg);
    return tc.check(e);
}

inline EvalOutcome eval_hypothesis(const HypothesisAst& h, const Table& t,
                                   const EvalOptions& opt = {}) {
    detail::Evaluator ev(t, opt);
    return ev.eval(h);
}

inline Value eval_expr(const ExprNode& e, const Table& t, const RowMask& ctx,
                       const EvalOptions& opt = {}) {
    detail::Evaluator ev(t, opt);
    return ev.eval_expr(e, ctx);
}

inline Value eval_expr(const ExprNode& e, const Table& t, const EvalOptions& opt = {}) {
    return eval_expr(e, t, RowMask::all(t.rows), opt);
}

}  // namespace hypgram
