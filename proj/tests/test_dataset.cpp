#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "hypgram/dataset.hpp"
#include "hypgram/parser.hpp"

using namespace hypgram;

namespace {
const std::string kFix = FIXTURE_DIR;

struct TempCsv {
    std::string path;
    TempCsv(const std::string& name, const std::string& body) {
        path = "/tmp/" + name;
        std::ofstream(path) << body;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("movies fixture loads with sidecar types") {
    Table t = load_csv(kFix + "/movies.csv");
    CHECK(t.rows == 5);
    CHECK(t.attribute("Title").type == AttrType::Str);
    CHECK(t.attribute("Year").type == AttrType::Number);
    CHECK(t.attribute("Rating").type == AttrType::Number);
    CHECK(t.column("Rating").nums[0] == Catch::Approx(9.1));
    // id came from the file
    CHECK(t.column("id").nums == std::vector<double>{1, 2, 3, 4, 5});
}

TEST_CASE("relation1 fixture matches the documented values") {
    Table t = load_csv(kFix + "/relation1.csv");
    CHECK(t.rows == 6);
    CHECK(t.column("month").nums == std::vector<double>{1, 2, 3, 4, 4, 4});
    CHECK(t.column("cost").nums == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(t.column("price").nums == std::vector<double>{7, 8, 9, 10, 11, 12});
    CHECK(t.column("market").strs[0] == "US");
    CHECK(t.column("market").strs[5] == "EU");
}

TEST_CASE("id is synthesized when missing") {
    TempCsv f("noid.csv", "a,b\n10,x\n20,y\n");
    Table t = load_csv(f.path);
    CHECK(t.column("id").nums == std::vector<double>{1, 2});
    // and data attributes exclude it
    auto attrs = t.data_attrs();
    CHECK(std::find(attrs.begin(), attrs.end(), "id") == attrs.end());
}

TEST_CASE("duplicate ids are rejected") {
    TempCsv f("dupid.csv", "id,a\n1,x\n1,y\n");
    CHECK_THROWS_AS(load_csv(f.path), DataError);
}

TEST_CASE("ragged rows are rejected") {
    TempCsv f("ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(load_csv(f.path), DataError);
}

TEST_CASE("empty table is rejected") {
    TempCsv f("empty.csv", "a,b\n");
    CHECK_THROWS_AS(load_csv(f.path), DataError);
}

TEST_CASE("type inference: bool, number, date, then string") {
    TempCsv f("infer.csv",
              "flag,n,d,s\n"
              "true,1.5,2020-01-02,hello\n"
              "false,-2,2021-03-04,world\n");
    Table t = load_csv(f.path);
    CHECK(t.attribute("flag").type == AttrType::Bool);
    CHECK(t.attribute("n").type == AttrType::Number);
    CHECK(t.attribute("d").type == AttrType::Date);
    CHECK(t.attribute("s").type == AttrType::Str);
}

TEST_CASE("quoted csv fields with commas and doubled quotes") {
    TempCsv f("quoted.csv", "a,b\n\"x, y\",\"say \"\"hi\"\"\"\n");
    Table t = load_csv(f.path);
    CHECK(t.column("a").strs[0] == "x, y");
    CHECK(t.column("b").strs[0] == "say \"hi\"");
}

TEST_CASE("attribute lookup is case-insensitive") {
    Table t = load_csv(kFix + "/movies.csv");
    CHECK(t.attr_index("rating") == t.attr_index("Rating"));
    CHECK(t.attr_index("YEAR") == t.attr_index("Year"));
    CHECK(t.attr_index("nope") < 0);
}

TEST_CASE("row masks behave like sets") {
    RowMask a = RowMask::all(4);
    RowMask n = RowMask::none(4);
    CHECK(a.count() == 4);
    CHECK(n.empty());
    CHECK((a & n).empty());
    CHECK((~n).count() == 4);
}

TEST_CASE("mask_where filters typed columns") {
    Table t = load_csv(kFix + "/relation1.csv");
    auto pred = [&](const std::string& text) {
        auto h = parse_hypothesis("cost < 99 [" + text + "]");
        RowMask m = RowMask::all(t.rows);
        for (const auto& cj : h.clauses[0].pred->conjuncts)
            m = m & mask_where(t, cj.attr, cj.op, cj.value.front().value, cj.negated);
        return m;
    };
    CHECK(pred("market='US'").count() == 4);
    CHECK(pred("market='US' & month=2").count() == 1);
    CHECK(pred("month > 3").count() == 3);
    CHECK(pred("!(market='US')").count() == 2);
    CHECK(pred("cost in [2,4]").count() == 3);
    CHECK(pred("cost in [2,4)").count() == 2);
    CHECK(pred("cost not in [2,4]").count() == 3);
    CHECK(pred("month in {1, 3}").count() == 2);
    CHECK(pred("market ~ '^U'").count() == 4);
    CHECK(pred("id = 2").count() == 1);
    CHECK(pred("market = 'XX'").count() == 0);
}

TEST_CASE("regex over a numeric column is an error") {
    Table t = load_csv(kFix + "/relation1.csv");
    CHECK_THROWS_AS(mask_where(t, "month", OpKind::RegexMatch, ConstValue::string("^1")),
                    EvalError);
}

TEST_CASE("string constants compare against number columns by parsing") {
    Table t = load_csv(kFix + "/relation1.csv");
    CHECK(mask_where(t, "month", OpKind::Eq, ConstValue::string("2")).count() == 1);
}

TEST_CASE("date parsing accepts several formats") {
    CHECK(parse_date_any("2015-05-01", "").has_value());
    CHECK(parse_date_any("2015-05-01 07:50:00", "").has_value());
    CHECK(parse_date_any("2015-05-01T07:50:00", "").has_value());
    CHECK(parse_date_any("5/1/2015", "").has_value());
    CHECK(parse_date_any("not a date", "") == std::nullopt);
    // dates order correctly as numbers
    CHECK(*parse_date_any("1985-01-01", "") < *parse_date_any("1994-01-01", ""));
}

TEST_CASE("distinct values are sorted and unique") {
    Table t = load_csv(kFix + "/relation1.csv");
    auto months = distinct_values(t, "month");
    REQUIRE(months.size() == 4);
    CHECK(months[0].num == 1);
    CHECK(months[3].num == 4);
    auto markets = distinct_values(t, "market");
    REQUIRE(markets.size() == 2);
    CHECK(markets[0].str == "EU");
    CHECK(markets[1].str == "US");
}

TEST_CASE("schema sidecar mismatch and missing values are rejected") {
    TempCsv f("missing.csv", "a,b\n1,\n");
    CHECK_THROWS_AS(load_csv(f.path), DataError);
}

TEST_CASE("sidecar can pin a column that would otherwise infer differently") {
    TempCsv f("pin.csv", "code\n1972\n1985\n");
    std::ofstream("/tmp/pin.json") << R"({"attrs":[{"name":"code","type":"str"}]})";
    Table t = load_csv(f.path);
    CHECK(t.attribute("code").type == AttrType::Str);
    std::remove("/tmp/pin.json");
}

TEST_CASE("explicit schema path overrides the sidecar convention") {
    TempCsv f("sch.csv", "v\n1\n2\n");
    std::ofstream("/tmp/other_schema.json") << R"({"attrs":[{"name":"v","type":"str"}]})";
    Table t = load_csv(f.path, "/tmp/other_schema.json");
    CHECK(t.attribute("v").type == AttrType::Str);
    CHECK_THROWS_AS(load_csv(f.path, "/tmp/does_not_exist.json"), IoError);
    std::remove("/tmp/other_schema.json");
}
