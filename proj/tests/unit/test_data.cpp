#include "doctest.h"

#include <sstream>

#include "ldpd/data.hpp"
#include "ldpd/errors.hpp"

using namespace ldpd;

namespace {

Dataset parse(const std::string& text, const CsvSchema& schema = {}) {
    std::istringstream in(text);
    return parse_csv(in, schema);
}

const char* kHeader = "unit_id,item,onset_lo,onset_hi,event_lo,event_hi,intercept,V\n";

}  // namespace

TEST_CASE("direct field mapping of one row") {
    const auto d = parse(std::string(kHeader) + "1, 1, 0, 7.1, 11.0, 12.0, 1, 0\n");
    REQUIRE(d.size() == 1);
    CHECK(d.n_items == 1);
    CHECK(d.p == 2);
    CHECK(d.q == 2);
    const auto& rec = d.units[0].items[0];
    CHECK(d.units[0].unit_id == "1");
    CHECK(rec.present);
    CHECK(rec.onset.left_censored());
    CHECK(rec.onset.upper == 7.1);
    CHECK(rec.event.lower == 11.0);
    CHECK(rec.event.upper == 12.0);
    CHECK(rec.onset_covariates(0) == 1.0);
    CHECK(rec.onset_covariates(1) == 0.0);
}

TEST_CASE("empty or inf upper bound is right censoring") {
    const auto d = parse(std::string(kHeader) + "a,1,7,8,9,,1,1\nb,1,7,8,9,inf,1,1\n");
    CHECK(d.units[0].items[0].event.right_censored());
    CHECK(d.units[1].items[0].event.right_censored());
}

TEST_CASE("interval violations are validation errors naming the unit and item") {
    try {
        parse(std::string(kHeader) + "u7,1,7.1,7.1,9,10,1,0\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("unit u7, item 1") != std::string::npos);
    }
    CHECK_THROWS_AS(parse(std::string(kHeader) + "u,1,-1,7,9,10,1,0\n"), ValidationError);
    // The event interval closes before the onset interval opens.
    CHECK_THROWS_AS(parse(std::string(kHeader) + "u,1,8,9,3,8,1,0\n"), ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "u,1,7,8,9,10,1,0\nu,1,7,8,9,10,1,0\n"), ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "u,1,7,8,9,10,1,inf\n"), ValidationError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "u,1,7,8,9,10,nan,0\n"), ValidationError);
}

TEST_CASE("malformed rows carry their line number") {
    try {
        parse(std::string(kHeader) + "1,1,0,7,9,10,1,0\n2,1,0,x,9,10,1,0\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    try {
        parse(std::string(kHeader) + "1,1,0,7,9\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("id,item\n"), ParseError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "1,0,0,7,9,10,1,0\n"), ParseError);
}

TEST_CASE("units are grouped and missing items marked absent") {
    const auto d = parse(std::string(kHeader) + "A,2,0,7,8,9,1,0\nB,1,6,7,8,9,1,1\nA,1,6,7,8,9,1,0\n");
    REQUIRE(d.size() == 2);
    CHECK(d.n_items == 2);
    CHECK(d.units[0].unit_id == "A");
    CHECK(d.units[0].present_count() == 2);
    CHECK(d.units[1].present_count() == 1);
    CHECK_FALSE(d.units[1].items[1].present);
    CHECK(d.units[1].items[1].onset_covariates.size() == 2);
}

TEST_CASE("schema selects covariate columns per block") {
    CsvSchema schema;
    schema.onset_columns = {"intercept"};
    schema.event_columns = {"intercept", "V"};
    const auto d = parse(std::string(kHeader) + "1,1,0,7,9,10,1,3\n", schema);
    CHECK(d.p == 1);
    CHECK(d.q == 2);
    CHECK(d.units[0].items[0].event_covariates(1) == 3.0);
    schema.onset_columns = {"nope"};
    CHECK_THROWS_AS(parse(std::string(kHeader) + "1,1,0,7,9,10,1,3\n", schema), ValidationError);
}

TEST_CASE("export then ingest reproduces the data set") {
    const auto d = parse(std::string(kHeader) + "1,1,0,7.123456789012345,9,,1,0\n2,1,6.5,7,8.25,9,1,1\n");
    std::stringstream buf;
    write_csv(d, buf);
    const auto back = parse_csv(buf);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& a = d.units[i].items[0];
        const auto& b = back.units[i].items[0];
        CHECK(back.units[i].unit_id == d.units[i].unit_id);
        CHECK(a.onset.lower == b.onset.lower);
        CHECK(a.onset.upper == b.onset.upper);
        CHECK(a.event.lower == b.event.lower);
        CHECK(a.event.upper == b.event.upper);
        CHECK(a.onset_covariates == b.onset_covariates);
    }
    CHECK(format_double(kInf) == "inf");
    CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("design matrix layout") {
    SUBCASE("n = 1 ANCOVA example") {
        IntervalObservation unit;
        ItemRecord rec;
        rec.present = true;
        rec.onset = {0.0, 7.0};
        rec.event = {8.0, 9.0};
        rec.onset_covariates = Vector(2);
        rec.onset_covariates << 1.0, 1.0;
        rec.event_covariates = Vector(3);
        rec.event_covariates << 1.0, 1.0, 3.0;
        unit.items.push_back(rec);
        const auto x = build_design(unit, 2, 3);
        Matrix expected(2, 5);
        expected << 1, 1, 0, 0, 0, 0, 0, 1, 1, 3;
        CHECK(x.values == expected);
    }
    SUBCASE("intercept only") {
        IntervalObservation unit;
        ItemRecord rec;
        rec.present = true;
        rec.onset_covariates = Vector::Ones(1);
        rec.event_covariates = Vector::Ones(1);
        unit.items.push_back(rec);
        CHECK(build_design(unit, 1, 1).values == Matrix::Identity(2, 2));
    }
    SUBCASE("two items are block diagonal, absent items keep their rows") {
        const auto d = parse(std::string(kHeader) + "1,1,0,7,9,10,1,2\n1,2,0,7,9,10,1,5\n2,2,0,7,9,10,1,6\n");
        const auto x = build_designs(d);
        REQUIRE(x.size() == 2);
        CHECK(x[0].rows() == 4);
        CHECK(x[0].cols() == 8);
        Matrix expected = Matrix::Zero(4, 8);
        expected.row(0).segment(0, 2) << 1, 2;
        expected.row(1).segment(2, 2) << 1, 5;
        expected.row(2).segment(4, 2) << 1, 2;
        expected.row(3).segment(6, 2) << 1, 5;
        CHECK(x[0].values == expected);
        CHECK(x[1].values.row(0).isZero());
        CHECK(x[1].values(1, 3) == 6.0);
    }
}
