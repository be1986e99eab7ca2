#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hypgram/ast.hpp"
#include "hypgram/errors.hpp"

#include "json.hpp"

namespace hypgram {

enum class AttrType { Number, Str, Date, Bool };

inline std::string attr_type_name(AttrType t) {
    switch (t) {
        case AttrType::Number: return "number";
        case AttrType::Str: return "str";
        case AttrType::Date: return "date";
        case AttrType::Bool: return "bool";
    }
    return "?";
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

struct Attribute {
    std::string name;
    AttrType type = AttrType::Str;
};

/// Boolean row selection over one table.
struct RowMask {
    std::vector<char> bits;

    static RowMask all(std::size_t n) { return RowMask{std::vector<char>(n, 1)}; }
    static RowMask none(std::size_t n) { return RowMask{std::vector<char>(n, 0)}; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
    }
    bool empty() const { return count() == 0; }

    RowMask operator&(const RowMask& o) const {
        RowMask r = *this;
        for (std::size_t i = 0; i < bits.size(); ++i) r.bits[i] = bits[i] && o.bits[i];
        return r;
    }
    RowMask operator~() const {
        RowMask r = *this;
        for (auto& b : r.bits) b = !b;
        return r;
    }
};

/// One column of typed cells. Numbers and dates live in `nums` (dates as
/// seconds since the epoch, UTC), booleans as 0/1 in `nums`, strings in `strs`.
struct Column {
    AttrType type = AttrType::Str;
    std::vector<double> nums;
    std::vector<std::string> strs;

    std::size_t size() const { return type == AttrType::Str ? strs.size() : nums.size(); }
};

inline std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<double> parse_date(const std::string& s, const std::string& fmt) {
    std::tm tm{};
    std::istringstream in(s);
    in >> std::get_time(&tm, fmt.c_str());
    if (in.fail()) return std::nullopt;
    in >> std::ws;
    if (!in.eof()) return std::nullopt;
    tm.tm_isdst = 0;
    return static_cast<double>(timegm(&tm));
}

inline std::optional<double> parse_date_any(const std::string& s, const std::string& preferred) {
    if (!preferred.empty())
        if (auto v = parse_date(s, preferred)) return v;
    for (const char* fmt : {"%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d", "%m/%d/%Y %H:%M:%S",
                            "%m/%d/%Y"})
        if (auto v = parse_date(s, fmt)) return v;
    return std::nullopt;
}

struct Table {
    std::string name;
    std::vector<Attribute> attrs;
    std::vector<Column> cols;
    std::size_t rows = 0;
    std::string date_format;  // preferred sidecar format, used for echoing dates

    int attr_index(std::string_view name) const {
        for (std::size_t i = 0; i < attrs.size(); ++i)
            if (iequals(attrs[i].name, name)) return static_cast<int>(i);
        return -1;
    }

    const Column& column(std::string_view name) const {
        int i = attr_index(name);
        if (i < 0) throw DataError("unknown-attribute", "no attribute named '" + std::string(name) + "'");
        return cols[static_cast<std::size_t>(i)];
    }

    const Attribute& attribute(std::string_view name) const {
        int i = attr_index(name);
        if (i < 0) throw DataError("unknown-attribute", "no attribute named '" + std::string(name) + "'");
        return attrs[static_cast<std::size_t>(i)];
    }

    /// Attribute names excluding the row identifier, in schema order.
    std::vector<std::string> data_attrs() const {
        std::vector<std::string> out;
        for (const auto& a : attrs)
            if (!iequals(a.name, "id")) out.push_back(a.name);
        return out;
    }

    /// Row ids selected by a mask, in row order.
    std::vector<double> ids_where(const RowMask& m) const {
        const Column& idc = column("id");
        std::vector<double> out;
        for (std::size_t r = 0; r < rows; ++r)
            if (m.bits[r]) out.push_back(idc.nums[r]);
        return out;
    }
};

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("io", "cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') { cell += '"'; ++i; }
                else quoted = false;
            } else cell += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(cell));
            cell.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(cell));
            cell.clear();
            if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
            row.clear();
        } else cell += c;
    }
    if (!cell.empty() || !row.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty-table", "'" + path + "' has no rows");
    return rows;
}

inline AttrType infer_type(const std::vector<std::string>& cells) {
    bool all_num = true, all_bool = true, all_date = true;
    for (const auto& c : cells) {
        if (all_num && !parse_number(c)) all_num = false;
        if (all_bool) {
            std::string l = lower(c);
            if (l != "true" && l != "false") all_bool = false;
        }
        if (all_date && !parse_date_any(c, "")) all_date = false;
    }
    if (all_bool) return AttrType::Bool;
    if (all_num) return AttrType::Number;
    if (all_date) return AttrType::Date;
    return AttrType::Str;
}

}  // namespace detail

/// Loads a CSV with a header row. A sidecar `<base>.json` may pin attribute
/// types and a date format:
///   {"attrs": [{"name": "Year", "type": "number"}, ...], "date_format": "%m/%d/%Y"}
/// Attributes absent from the sidecar fall back to inference. A table without
/// an `id` attribute gets one synthesized as 1..n.
inline Table load_csv(const std::string& path, const std::string& schema_path = "") {
    auto cells = detail::read_csv(path);
    const auto& header = cells.front();
    std::size_t ncols = header.size();
    for (std::size_t r = 1; r < cells.size(); ++r)
        if (cells[r].size() != ncols)
            throw DataError("schema-mismatch", path + " row " + std::to_string(r) + " has " +
                                                   std::to_string(cells[r].size()) + " cells, expected " +
                                                   std::to_string(ncols));

    Table t;
    t.name = path;
    if (auto slash = path.find_last_of('/'); slash != std::string::npos)
        t.name = path.substr(slash + 1);
    if (auto dot = t.name.find_last_of('.'); dot != std::string::npos) t.name.resize(dot);
    t.rows = cells.size() - 1;
    if (t.rows == 0) throw DataError("empty-table", "'" + path + "' has a header but no rows");

    std::string sidecar = schema_path;
    if (sidecar.empty()) {
        sidecar = path;
        if (auto dot = sidecar.find_last_of('.'); dot != std::string::npos) sidecar.resize(dot);
        sidecar += ".json";
    }
    nlohmann::json meta;
    if (std::ifstream ms(sidecar); ms) {
        try {
            ms >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("io", sidecar + ": " + e.what());
        }
    } else if (!schema_path.empty()) {
        throw IoError("io", "cannot open schema '" + schema_path + "'");
    }
    if (meta.contains("date_format")) t.date_format = meta["date_format"].get<std::string>();

    auto declared_type = [&](const std::string& name) -> std::optional<AttrType> {
        if (!meta.contains("attrs")) return std::nullopt;
        for (const auto& a : meta["attrs"]) {
            if (!iequals(a.value("name", ""), name)) continue;
            std::string ty = lower(a.value("type", ""));
            if (ty == "number" || ty == "int" || ty == "float") return AttrType::Number;
            if (ty == "str" || ty == "string") return AttrType::Str;
            if (ty == "date" || ty == "datetime") return AttrType::Date;
            if (ty == "bool" || ty == "boolean") return AttrType::Bool;
            throw IoError("io", sidecar + ": unknown type '" + ty + "' for '" + name + "'");
        }
        return std::nullopt;
    };

    for (std::size_t c = 0; c < ncols; ++c) {
        std::vector<std::string> raw;
        raw.reserve(t.rows);
        for (std::size_t r = 1; r < cells.size(); ++r) raw.push_back(cells[r][c]);
        AttrType ty = declared_type(header[c]).value_or(detail::infer_type(raw));
        Column col;
        col.type = ty;
        for (std::size_t r = 0; r < raw.size(); ++r) {
            const std::string& s = raw[r];
            if (s.empty())
                throw DataError("missing-value", path + ": empty cell in '" + header[c] +
                                                     "' row " + std::to_string(r + 1));
            switch (ty) {
                case AttrType::Number: {
                    auto v = parse_number(s);
                    if (!v) throw DataError("type-parse", path + ": '" + s + "' in '" + header[c] +
                                                              "' is not a number");
                    col.nums.push_back(*v);
                    break;
                }
                case AttrType::Date: {
                    auto v = parse_date_any(s, t.date_format);
                    if (!v) throw DataError("type-parse", path + ": '" + s + "' in '" + header[c] +
                                                              "' is not a date");
                    col.nums.push_back(*v);
                    break;
                }
                case AttrType::Bool: {
                    std::string l = lower(s);
                    if (l != "true" && l != "false")
                        throw DataError("type-parse", path + ": '" + s + "' in '" + header[c] +
                                                          "' is not a boolean");
                    col.nums.push_back(l == "true" ? 1.0 : 0.0);
                    break;
                }
                case AttrType::Str:
                    col.strs.push_back(s);
                    break;
            }
        }
        t.attrs.push_back({header[c], ty});
        t.cols.push_back(std::move(col));
    }

    if (t.attr_index("id") < 0) {
        Column idc;
        idc.type = AttrType::Number;
        idc.nums.resize(t.rows);
        std::iota(idc.nums.begin(), idc.nums.end(), 1.0);
        t.attrs.insert(t.attrs.begin(), {"id", AttrType::Number});
        t.cols.insert(t.cols.begin(), std::move(idc));
    } else {
        const Column& idc = t.column("id");
        if (idc.type != AttrType::Number)
            throw DataError("type-mismatch", path + ": id attribute must be numeric");
        std::vector<double> seen = idc.nums;
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw DataError("duplicate-id", path + ": duplicate row ids");
    }
    return t;
}

/// Compares a typed cell against a constant. Strings compare against numeric
/// cells never match except via parse, and vice versa; comparisons across
/// incompatible kinds are false rather than errors at the row level (the
/// typechecker flags them before evaluation starts).
inline bool cell_matches(const Table& t, std::size_t col, std::size_t row, OpKind op,
                         const ConstValue& v) {
    const Column& c = t.cols[col];
    auto num_cmp = [&](double cell, double rhs) {
        switch (op) {
            case OpKind::Eq: return cell == rhs;
            case OpKind::Neq: return cell != rhs;
            case OpKind::Lt: return cell < rhs;
            case OpKind::Le: return cell <= rhs;
            case OpKind::Gt: return cell > rhs;
            case OpKind::Ge: return cell >= rhs;
            default: return false;
        }
    };
    auto str_cmp = [&](const std::string& cell, const std::string& rhs) {
        switch (op) {
            case OpKind::Eq: return cell == rhs;
            case OpKind::Neq: return cell != rhs;
            case OpKind::Lt: return cell < rhs;
            case OpKind::Le: return cell <= rhs;
            case OpKind::Gt: return cell > rhs;
            case OpKind::Ge: return cell >= rhs;
            case OpKind::RegexMatch: {
                std::regex re(rhs);
                return std::regex_search(cell, re);
            }
            default: return false;
        }
    };
    auto cell_num = [&]() { return c.nums[row]; };

    if (op == OpKind::In || op == OpKind::NotIn) {
        bool inside = false;
        if (v.kind == ConstValue::Kind::Interval) {
            if (c.type == AttrType::Str) return false;
            double x = cell_num();
            inside = (v.lo_closed ? x >= v.lo : x > v.lo) && (v.hi_closed ? x <= v.hi : x < v.hi);
        } else if (v.kind == ConstValue::Kind::Array) {
            for (const auto& e : v.elems) {
                if (c.type == AttrType::Str) {
                    if (e.kind == ConstValue::Kind::Str && c.strs[row] == e.str) { inside = true; break; }
                } else if (e.kind == ConstValue::Kind::Number || e.kind == ConstValue::Kind::Date) {
                    if (cell_num() == e.num) { inside = true; break; }
                }
            }
        }
        return op == OpKind::In ? inside : !inside;
    }

    switch (c.type) {
        case AttrType::Str:
            if (v.kind == ConstValue::Kind::Str) return str_cmp(c.strs[row], v.str);
            return false;
        case AttrType::Number:
            if (v.kind == ConstValue::Kind::Number) return num_cmp(c.nums[row], v.num);
            if (v.kind == ConstValue::Kind::Str)
                if (auto n = parse_number(v.str)) return num_cmp(c.nums[row], *n);
            return false;
        case AttrType::Date: {
            if (v.kind == ConstValue::Kind::Date || v.kind == ConstValue::Kind::Number)
                return num_cmp(c.nums[row], v.num);
            if (v.kind == ConstValue::Kind::Str)
                if (auto d = parse_date_any(v.str, t.date_format)) return num_cmp(c.nums[row], *d);
            return false;
        }
        case AttrType::Bool: {
            if (v.kind == ConstValue::Kind::Bool) return num_cmp(c.nums[row], v.boolean ? 1.0 : 0.0);
            if (v.kind == ConstValue::Kind::Str) {
                std::string l = lower(v.str);
                if (l == "true" || l == "false") return num_cmp(c.nums[row], l == "true" ? 1.0 : 0.0);
            }
            return false;
        }
    }
    return false;
}

/// Rows matching one `attr op const` condition.
inline RowMask mask_where(const Table& t, std::string_view attr, OpKind op, const ConstValue& v,
                          bool negated = false) {
    int ci = t.attr_index(attr);
    if (ci < 0) throw DataError("unknown-attribute", "no attribute named '" + std::string(attr) + "'");
    RowMask m = RowMask::none(t.rows);
    if (op == OpKind::RegexMatch && t.cols[static_cast<std::size_t>(ci)].type != AttrType::Str)
        throw EvalError("type-mismatch", "'~' requires a string attribute");
    for (std::size_t r = 0; r < t.rows; ++r) {
        bool hit = cell_matches(t, static_cast<std::size_t>(ci), r, op, v);
        m.bits[r] = (hit != negated) ? 1 : 0;
    }
    return m;
}

/// Distinct observed values of one attribute, sorted, rendered as constants.
inline std::vector<ConstValue> distinct_values(const Table& t, std::string_view attr) {
    const Column& c = t.column(attr);
    const Attribute& a = t.attribute(attr);
    std::vector<ConstValue> out;
    if (a.type == AttrType::Str) {
        std::vector<std::string> vals = c.strs;
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (auto& v : vals) out.push_back(ConstValue::string(std::move(v)));
    } else {
        std::vector<double> vals = c.nums;
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (double v : vals) {
            if (a.type == AttrType::Bool) out.push_back(ConstValue::boolean_(v != 0.0));
            else if (a.type == AttrType::Date) {
                ConstValue cv;
                cv.kind = ConstValue::Kind::Date;
                cv.num = v;
                out.push_back(cv);
            } else out.push_back(ConstValue::number(v));
        }
    }
    return out;
}

}  // namespace hypgram
