#pragma once

#include <string>
#include <vector>

#include "hypgram/ast.hpp"
#include "hypgram/dataset.hpp"
#include "hypgram/errors.hpp"
#include "hypgram/lexer.hpp"

namespace hypgram {

/// Goodness-of-fit model produced by fit_LM.
struct Model {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Runtime value: a typed scalar, a row-aligned column vector, a fitted
/// model, or a constant array/interval flowing through from the AST.
/// `aggregate` marks computed numbers, which get a relative tolerance in
/// comparisons; raw cells and literals compare exactly.
struct Value {
    enum class Shape { Scalar, Vector, Model, Array, Interval };
    Shape shape = Shape::Scalar;
    AttrType elem = AttrType::Number;

    double num = 0.0;          // Scalar payload (Number/Date/Bool)
    std::string str;           // Scalar payload (Str)
    std::vector<double> nums;  // Vector payload
    std::vector<std::string> strs;
    std::vector<double> ids;   // row ids backing a Vector
    Model model;
    ConstValue cv;             // Array / Interval payload
    bool aggregate = false;

    std::size_t size() const { return elem == AttrType::Str ? strs.size() : nums.size(); }

    static Value scalar(double v, bool agg = false) {
        Value x;
        x.num = v;
        x.aggregate = agg;
        return x;
    }
    static Value scalar_str(std::string s) {
        Value x;
        x.elem = AttrType::Str;
        x.str = std::move(s);
        return x;
    }
    static Value vector(std::vector<double> v, std::vector<double> row_ids,
                        AttrType t = AttrType::Number) {
        Value x;
        x.shape = Shape::Vector;
        x.elem = t;
        x.nums = std::move(v);
        x.ids = std::move(row_ids);
        return x;
    }
    static Value str_vector(std::vector<std::string> v, std::vector<double> row_ids) {
        Value x;
        x.shape = Shape::Vector;
        x.elem = AttrType::Str;
        x.strs = std::move(v);
        x.ids = std::move(row_ids);
        return x;
    }
    static Value of_model(Model m) {
        Value x;
        x.shape = Shape::Model;
        x.model = m;
        x.aggregate = true;
        return x;
    }
    static Value of_const(const ConstValue& c) {
        Value x;
        switch (c.kind) {
            case ConstValue::Kind::Number: x.num = c.num; break;
            case ConstValue::Kind::Date: x.elem = AttrType::Date; x.num = c.num; break;
            case ConstValue::Kind::Bool: x.elem = AttrType::Bool; x.num = c.boolean ? 1 : 0; break;
            case ConstValue::Kind::Str: x.elem = AttrType::Str; x.str = c.str; break;
            case ConstValue::Kind::Array: x.shape = Shape::Array; x.cv = c; break;
            case ConstValue::Kind::Interval: x.shape = Shape::Interval; x.cv = c; break;
        }
        return x;
    }

    std::string shape_name() const {
        switch (shape) {
            case Shape::Scalar: return "scalar-" + attr_type_name(elem);
            case Shape::Vector: return "vector-" + attr_type_name(elem);
            case Shape::Model: return "model";
            case Shape::Array: return "array";
            case Shape::Interval: return "interval";
        }
        return "?";
    }

    std::string to_string() const {
        switch (shape) {
            case Shape::Scalar:
                if (elem == AttrType::Str) return str;
                if (elem == AttrType::Bool) return num != 0 ? "true" : "false";
                return num_to_string(num);
            case Shape::Vector: {
                std::string out = "[";
                std::size_t n = size();
                for (std::size_t i = 0; i < n; ++i) {
                    if (i) out += ", ";
                    out += elem == AttrType::Str ? strs[i] : num_to_string(nums[i]);
                }
                return out + "]";
            }
            case Shape::Model:
                return "linear(slope=" + num_to_string(model.slope) +
                       ", intercept=" + num_to_string(model.intercept) +
                       ", r2=" + num_to_string(model.r_squared) + ")";
            case Shape::Array:
            case Shape::Interval:
                return pretty_print(ExprNode::constant(cv));
        }
        return "?";
    }
};

}  // namespace hypgram
