#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "hypgram/dataset.hpp"
#include "hypgram/errors.hpp"
#include "hypgram/value.hpp"

namespace hypgram {

struct FuncConfig {
    int bins = 10;           // histogram bins for KL / EMD
    double eps = 1e-9;       // histogram smoothing
    int k = 3;               // clusters for fit_Kmeans / fit_Hierarchical
    bool sample_stdev = false;  // STDEV divisor: N (population, default) or N-1
};

/// Context threaded through every call: the table being evaluated and the
/// rows currently selected, so nullary count() can see its predicate.
struct FuncContext {
    const Table* table = nullptr;
    RowMask mask;
    FuncConfig config;
};

enum class ParamKind { ScalarNumber, VectorNumber, VectorString, ModelParam, AnyNumber };

struct FunctionSignature {
    std::string name;  // canonical casing for display
    int min_arity = 1;
    int max_arity = 1;
    std::vector<ParamKind> params;  // by position; last repeats if arity exceeds
    std::string result;             // "scalar", "vector", "model"
    std::function<Value(const std::vector<Value>&, const FuncContext&)> impl;
};

namespace detail {

inline const std::vector<double>& vec_of(const Value& v, const std::string& fn) {
    if (v.shape != Value::Shape::Vector || v.elem == AttrType::Str)
        throw EvalError("precondition", fn + " needs a numeric vector, got " + v.shape_name());
    return v.nums;
}

inline std::vector<double> nums_of(const Value& v, const std::string& fn) {
    if (v.shape == Value::Shape::Scalar && v.elem != AttrType::Str) return {v.num};
    return vec_of(v, fn);
}

inline double scalar_of(const Value& v, const std::string& fn) {
    if (v.shape == Value::Shape::Scalar && v.elem != AttrType::Str) return v.num;
    if (v.shape == Value::Shape::Vector && v.elem != AttrType::Str && v.nums.size() == 1)
        return v.nums[0];
    throw EvalError("precondition", fn + " needs a numeric scalar, got " + v.shape_name());
}

inline void require_nonempty(const std::vector<double>& v, const std::string& fn) {
    if (v.empty()) throw EvalError("empty-operand", fn + " over an empty selection");
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v, bool sample) {
    double m = mean(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    double n = static_cast<double>(v.size());
    if (sample && v.size() < 2) throw EvalError("precondition", "sample variance needs >= 2 values");
    return ss / (sample ? n - 1 : n);
}

/// Two aligned numeric vectors sorted into a common row-id order. Vector-vs-
/// vector operations require identical id sets.
inline std::pair<std::vector<double>, std::vector<double>> aligned(const Value& a, const Value& b,
                                                                   const std::string& fn) {
    const auto& x = vec_of(a, fn);
    const auto& y = vec_of(b, fn);
    if (a.ids.size() != x.size() || b.ids.size() != y.size() || x.size() != y.size())
        throw EvalError("row-alignment", fn + ": operand row counts differ (" +
                                             std::to_string(x.size()) + " vs " +
                                             std::to_string(y.size()) + ")");
    std::map<double, double> bm;
    for (std::size_t i = 0; i < y.size(); ++i) bm[b.ids[i]] = y[i];
    std::vector<double> xs, ys;
    xs.reserve(x.size());
    ys.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto it = bm.find(a.ids[i]);
        if (it == bm.end())
            throw EvalError("row-alignment", fn + ": operands select different rows");
        xs.push_back(x[i]);
        ys.push_back(it->second);
    }
    return {std::move(xs), std::move(ys)};
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = mean(x), my = mean(y), sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0)
        throw EvalError("degenerate-variance", "correlation of a constant vector");
    return sxy / std::sqrt(sxx * syy);
}

/// Equal-width histogram over [lo, hi] normalized after ε smoothing.
inline std::vector<double> histogram(const std::vector<double>& v, double lo, double hi, int bins,
                                     double eps) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    double width = hi - lo;
    for (double x : v) {
        int b = width == 0 ? 0 : static_cast<int>((x - lo) / width * bins);
        if (b >= bins) b = bins - 1;
        if (b < 0) b = 0;
        h[static_cast<std::size_t>(b)] += 1.0;
    }
    double total = 0;
    for (auto& p : h) { p += eps; total += p; }
    for (auto& p : h) p /= total;
    return h;
}

inline std::pair<std::vector<double>, double> histo_pair_width(const std::vector<double>& x,
                                                               const std::vector<double>& y,
                                                               const FuncConfig& cfg,
                                                               std::vector<double>& hy) {
    double lo = std::min(*std::min_element(x.begin(), x.end()),
                         *std::min_element(y.begin(), y.end()));
    double hi = std::max(*std::max_element(x.begin(), x.end()),
                         *std::max_element(y.begin(), y.end()));
    auto hx = histogram(x, lo, hi, cfg.bins, cfg.eps);
    hy = histogram(y, lo, hi, cfg.bins, cfg.eps);
    double width = (hi - lo) / cfg.bins;
    return {std::move(hx), width};
}

inline Model ols(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = mean(x), my = mean(y), sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw EvalError("degenerate-variance", "fit_LM with constant x");
    Model m;
    m.slope = sxy / sxx;
    m.intercept = my - m.slope * mx;
    m.r_squared = syy == 0 ? 0.0 : (sxy * sxy) / (sxx * syy);
    return m;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// One-sample K-S distance between the empirical CDF of v and a reference CDF.
inline double ks_distance(std::vector<double> v, const std::function<double(double)>& cdf) {
    std::sort(v.begin(), v.end());
    double n = static_cast<double>(v.size());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double f = cdf(v[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// Asymptotic two-sided K-S p-value, Q(λ) = 2 Σ (-1)^(j-1) exp(-2 j² λ²).
inline double ks_pvalue(double d, std::size_t n) {
    double sn = std::sqrt(static_cast<double>(n));
    double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double sum = 0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * std::pow(-1.0, j - 1) * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// Within-cluster variance / total variance for a labeled 1-D clustering.
inline double cluster_loss(const std::vector<double>& v, const std::vector<int>& label, int k) {
    double total = 0, m = mean(v);
    for (double x : v) total += (x - m) * (x - m);
    if (total == 0) throw EvalError("degenerate-variance", "clustering constant values");
    double within = 0;
    for (int c = 0; c < k; ++c) {
        std::vector<double> members;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (label[i] == c) members.push_back(v[i]);
        if (members.empty()) continue;
        double mc = mean(members);
        for (double x : members) within += (x - mc) * (x - mc);
    }
    return within / total;
}

inline std::vector<int> kmeans_1d(const std::vector<double>& v, int k) {
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> centers(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        // Quantile initialization keeps the fit deterministic.
        double q = (c + 0.5) / k;
        centers[static_cast<std::size_t>(c)] =
            sorted[std::min(sorted.size() - 1, static_cast<std::size_t>(q * sorted.size()))];
    }
    std::vector<int> label(v.size(), 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < v.size(); ++i) {
            int best = 0;
            double bd = std::abs(v[i] - centers[0]);
            for (int c = 1; c < k; ++c) {
                double d = std::abs(v[i] - centers[static_cast<std::size_t>(c)]);
                if (d < bd) { bd = d; best = c; }
            }
            if (label[i] != best) { label[i] = best; changed = true; }
        }
        for (int c = 0; c < k; ++c) {
            std::vector<double> members;
            for (std::size_t i = 0; i < v.size(); ++i)
                if (label[i] == c) members.push_back(v[i]);
            if (!members.empty()) centers[static_cast<std::size_t>(c)] = mean(members);
        }
        if (!changed) break;
    }
    return label;
}

inline std::vector<int> hierarchical_1d(const std::vector<double>& v, int k) {
    // Complete-linkage agglomeration over 1-D points, cut at k clusters.
    std::vector<std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < v.size(); ++i) clusters.push_back({i});
    auto linkage = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double d = 0;
        for (auto i : a)
            for (auto j : b) d = std::max(d, std::abs(v[i] - v[j]));
        return d;
    };
    while (clusters.size() > static_cast<std::size_t>(k)) {
        std::size_t bi = 0, bj = 1;
        double bd = linkage(clusters[0], clusters[1]);
        for (std::size_t i = 0; i < clusters.size(); ++i)
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double d = linkage(clusters[i], clusters[j]);
                if (d < bd) { bd = d; bi = i; bj = j; }
            }
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    std::vector<int> label(v.size(), 0);
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (auto i : clusters[c]) label[i] = static_cast<int>(c);
    return label;
}

inline void check_finite(double v, const std::string& fn) {
    if (!std::isfinite(v)) throw EvalError("domain", fn + " produced a non-finite result");
}

}  // namespace detail

class FunctionRegistry {
public:
    static const FunctionRegistry& instance() {
        static FunctionRegistry reg;
        return reg;
    }

    const FunctionSignature* find(std::string_view name) const {
        auto it = by_name_.find(lower(name));
        return it == by_name_.end() ? nullptr : &sigs_[it->second];
    }

    const std::vector<FunctionSignature>& all() const { return sigs_; }

    Value call(std::string_view name, const std::vector<Value>& args,
               const FuncContext& ctx) const {
        const FunctionSignature* sig = find(name);
        if (!sig) throw EvalError("unknown-function", "no function named '" + std::string(name) + "'");
        int n = static_cast<int>(args.size());
        if (n < sig->min_arity || n > sig->max_arity)
            throw EvalError("precondition", sig->name + " takes " + std::to_string(sig->min_arity) +
                                                (sig->min_arity == sig->max_arity
                                                     ? ""
                                                     : ".." + std::to_string(sig->max_arity)) +
                                                " arguments, got " + std::to_string(n));
        return sig->impl(args, ctx);
    }

private:
    std::vector<FunctionSignature> sigs_;
    std::map<std::string, std::size_t> by_name_;

    void add(FunctionSignature s) {
        by_name_[lower(s.name)] = sigs_.size();
        sigs_.push_back(std::move(s));
    }

    FunctionRegistry() {
        using detail::nums_of;
        using detail::require_nonempty;
        using detail::scalar_of;

        auto agg = [&](const std::string& name, auto fn) {
            add({name, 1, 1, {ParamKind::VectorNumber}, "scalar",
                 [name, fn](const std::vector<Value>& a, const FuncContext&) {
                     auto v = nums_of(a[0], name);
                     require_nonempty(v, name);
                     double r = fn(v);
                     detail::check_finite(r, name);
                     return Value::scalar(r, true);
                 }});
        };
        agg("AVG", [](const std::vector<double>& v) { return detail::mean(v); });
        agg("SUM", [](const std::vector<double>& v) {
            return std::accumulate(v.begin(), v.end(), 0.0);
        });
        agg("MAX", [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); });
        agg("MIN", [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); });

        add({"STDEV", 1, 1, {ParamKind::VectorNumber}, "scalar",
             [](const std::vector<Value>& a, const FuncContext& ctx) {
                 auto v = nums_of(a[0], "STDEV");
                 require_nonempty(v, "STDEV");
                 return Value::scalar(std::sqrt(detail::variance(v, ctx.config.sample_stdev)), true);
             }});
        add({"VAR", 1, 1, {ParamKind::VectorNumber}, "scalar",
             [](const std::vector<Value>& a, const FuncContext& ctx) {
                 auto v = nums_of(a[0], "VAR");
                 require_nonempty(v, "VAR");
                 return Value::scalar(detail::variance(v, ctx.config.sample_stdev), true);
             }});

        add({"count", 0, 0, {}, "scalar",
             [](const std::vector<Value>&, const FuncContext& ctx) {
                 return Value::scalar(static_cast<double>(ctx.mask.count()), true);
             }});

        add({"mod", 2, 2, {ParamKind::ScalarNumber, ParamKind::ScalarNumber}, "scalar",
             [](const std::vector<Value>& a, const FuncContext&) {
                 double x = scalar_of(a[0], "mod"), y = scalar_of(a[1], "mod");
                 if (y == 0) throw EvalError("divide-by-zero", "mod by zero");
                 double r = x - std::floor(x / y) * y;
                 return Value::scalar(r, true);
             }});

        auto elementwise = [&](const std::string& name, auto op) {
            add({name, name == "-" ? 1 : 2, 2, {ParamKind::AnyNumber, ParamKind::AnyNumber},
                 "scalar",
                 [name, op](const std::vector<Value>& a, const FuncContext&) -> Value {
                     if (a.size() == 1) {  // unary minus
                         if (a[0].shape == Value::Shape::Vector) {
                             Value r = a[0];
                             for (auto& x : r.nums) x = -x;
                             r.aggregate = true;
                             return r;
                         }
                         return Value::scalar(-scalar_of(a[0], name), true);
                     }
                     bool va = a[0].shape == Value::Shape::Vector;
                     bool vb = a[1].shape == Value::Shape::Vector;
                     if (va && vb) {
                         auto [x, y] = detail::aligned(a[0], a[1], name);
                         Value r = Value::vector({}, a[0].ids);
                         r.aggregate = true;
                         for (std::size_t i = 0; i < x.size(); ++i) r.nums.push_back(op(x[i], y[i]));
                         return r;
                     }
                     if (va || vb) {
                         const Value& vec = va ? a[0] : a[1];
                         double s = scalar_of(va ? a[1] : a[0], name);
                         Value r = vec;
                         r.aggregate = true;
                         for (auto& x : r.nums) x = va ? op(x, s) : op(s, x);
                         return r;
                     }
                     double r = op(scalar_of(a[0], name), scalar_of(a[1], name));
                     detail::check_finite(r, name);
                     return Value::scalar(r, true);
                 }});
        };
        elementwise("-", [](double x, double y) { return x - y; });
        elementwise("+", [](double x, double y) { return x + y; });
        elementwise("*", [](double x, double y) { return x * y; });
        elementwise("/", [](double x, double y) {
            if (y == 0) throw EvalError("divide-by-zero", "division by zero");
            return x / y;
        });

        add({"ABS", 1, 1, {ParamKind::AnyNumber}, "scalar",
             [](const std::vector<Value>& a, const FuncContext&) -> Value {
                 if (a[0].shape == Value::Shape::Vector) {
                     Value r = a[0];
                     for (auto& x : r.nums) x = std::abs(x);
                     r.aggregate = true;
                     return r;
                 }
                 return Value::scalar(std::abs(scalar_of(a[0], "ABS")), true);
             }});

        add({"CORR", 2, 2, {ParamKind::VectorNumber, ParamKind::VectorNumber}, "scalar",
             [](const std::vector<Value>& a, const FuncContext&) {
                 auto [x, y] = detail::aligned(a[0], a[1], "CORR");
                 if (x.size() < 2) throw EvalError("precondition", "CORR needs >= 2 rows");
                 return Value::scalar(detail::pearson(x, y), true);
             }});

        auto dist = [&](const std::string& name, bool kl) {
            add({name, 2, 2, {ParamKind::VectorNumber, ParamKind::VectorNumber}, "scalar",
                 [name, kl](const std::vector<Value>& a, const FuncContext& ctx) {
                     auto x = nums_of(a[0], name);
                     auto y = nums_of(a[1], name);
                     require_nonempty(x, name);
                     require_nonempty(y, name);
                     std::vector<double> hy;
                     auto [hx, width] = detail::histo_pair_width(x, y, ctx.config, hy);
                     double r = 0;
                     if (kl) {
                         for (std::size_t i = 0; i < hx.size(); ++i)
                             r += hx[i] * std::log(hx[i] / hy[i]);
                     } else {
                         double cum = 0;
                         for (std::size_t i = 0; i < hx.size(); ++i) {
                             cum += hx[i] - hy[i];
                             r += std::abs(cum) * width;
                         }
                     }
                     detail::check_finite(r, name);
                     return Value::scalar(r, true);
                 }});
        };
        dist("KL", true);
        dist("EMD", false);

        add({"KS_normal", 1, 1, {ParamKind::VectorNumber}, "scalar",
             [](const std::vector<Value>& a, const FuncContext&) {
                 auto v = nums_of(a[0], "KS_normal");
                 if (v.size() < 3) throw EvalError("precondition", "KS_normal needs >= 3 values");
                 double m = detail::mean(v);
                 double sd = std::sqrt(detail::variance(v, /*sample=*/true));
                 if (sd == 0) throw EvalError("degenerate-variance", "KS_normal on constant values");
                 double d = detail::ks_distance(
                     v, [&](double x) { return detail::normal_cdf((x - m) / sd); });
                 return Value::scalar(detail::ks_pvalue(d, v.size()), true);
             }});

        add({"fit_LM", 2, 2, {ParamKind::VectorNumber, ParamKind::VectorNumber}, "model",
             [](const std::vector<Value>& a, const FuncContext&) {
                 auto [x, y] = detail::aligned(a[0], a[1], "fit_LM");
                 if (x.size() < 2) throw EvalError("precondition", "fit_LM needs >= 2 rows");
                 return Value::of_model(detail::ols(x, y));
             }});

        add({"SRES", 3, 3,
             {ParamKind::ModelParam, ParamKind::VectorNumber, ParamKind::VectorNumber}, "vector",
             [](const std::vector<Value>& a, const FuncContext&) {
                 if (a[0].shape != Value::Shape::Model)
                     throw EvalError("precondition", "SRES needs a model as its first argument");
                 auto [x, y] = detail::aligned(a[1], a[2], "SRES");
                 if (x.size() < 3) throw EvalError("precondition", "SRES needs >= 3 rows");
                 const Model& m = a[0].model;
                 std::vector<double> res;
                 for (std::size_t i = 0; i < x.size(); ++i)
                     res.push_back(y[i] - (m.slope * x[i] + m.intercept));
                 double sd = std::sqrt(detail::variance(res, /*sample=*/false));
                 Value out = Value::vector({}, a[1].ids);
                 out.aggregate = true;
                 for (double r : res) out.nums.push_back(sd == 0 ? 0.0 : r / sd);
                 return out;
             }});

        auto fit_dist = [&](const std::string& name, int which) {
            add({name, 1, 1, {ParamKind::VectorNumber}, "scalar",
                 [name, which](const std::vector<Value>& a, const FuncContext&) {
                     auto v = nums_of(a[0], name);
                     if (v.size() < 3) throw EvalError("precondition", name + " needs >= 3 values");
                     double lo = *std::min_element(v.begin(), v.end());
                     double hi = *std::max_element(v.begin(), v.end());
                     if (lo == hi)
                         throw EvalError("degenerate-variance", name + " on constant values");
                     std::function<double(double)> cdf;
                     if (which == 0) {  // Gaussian by sample moments
                         double m = detail::mean(v);
                         double sd = std::sqrt(detail::variance(v, /*sample=*/true));
                         cdf = [m, sd](double x) { return detail::normal_cdf((x - m) / sd); };
                     } else if (which == 1) {  // Powerlaw, MLE exponent
                         if (lo <= 0)
                             throw EvalError("domain", name + " requires positive values");
                         double s = 0;
                         for (double x : v) s += std::log(x / lo);
                         if (s == 0)
                             throw EvalError("degenerate-variance", name + " on constant values");
                         double alpha = 1.0 + static_cast<double>(v.size()) / s;
                         cdf = [lo, alpha](double x) {
                             return x <= lo ? 0.0 : 1.0 - std::pow(x / lo, 1.0 - alpha);
                         };
                     } else {  // uniform over [min, max]
                         cdf = [lo, hi](double x) {
                             return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
                         };
                     }
                     return Value::scalar(detail::ks_distance(v, cdf), true);
                 }});
        };
        fit_dist("fit_Gaussian", 0);
        fit_dist("fit_Powerlaw", 1);
        fit_dist("fit_Linear", 2);

        auto fit_cluster = [&](const std::string& name, bool kmeans) {
            add({name, 1, 1, {ParamKind::VectorNumber}, "scalar",
                 [name, kmeans](const std::vector<Value>& a, const FuncContext& ctx) {
                     auto v = nums_of(a[0], name);
                     int k = ctx.config.k;
                     if (static_cast<int>(v.size()) < k)
                         throw EvalError("precondition",
                                         name + " needs at least k=" + std::to_string(k) + " values");
                     if (k <= 1) return Value::scalar(1.0, true);
                     auto label = kmeans ? detail::kmeans_1d(v, k) : detail::hierarchical_1d(v, k);
                     return Value::scalar(detail::cluster_loss(v, label, k), true);
                 }});
        };
        fit_cluster("fit_Kmeans", true);
        fit_cluster("fit_Hierarchical", false);
    }
};

}  // namespace hypgram
