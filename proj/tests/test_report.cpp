#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "rmf/report.hpp"
#include "rmf/stats.hpp"

using namespace rmf;

TEST_CASE("csv quoting") {
    Table t({"a", "b"});
    t.row().text("plain").text("with,comma");
    t.row().text("with \"quote\"").num(1.5);
    std::ostringstream out;
    t.write(out, OutputFormat::csv);
    CHECK(out.str() ==
          "a,b\n"
          "plain,\"with,comma\"\n"
          "\"with \"\"quote\"\"\",1.5\n");
}

TEST_CASE("json mirrors the table with numeric cells unquoted") {
    Table t({"name", "count", "value"});
    t.row().text("x").num(std::uint64_t{3}).num(0.25);
    t.row().text("y").num(BigInt("123456789012345678901234567890")).num(-1.0);
    std::ostringstream out;
    t.write(out, OutputFormat::json);
    CHECK(out.str() ==
          "[\n"
          "  {\"name\": \"x\", \"count\": 3, \"value\": 0.25},\n"
          "  {\"name\": \"y\", \"count\": 123456789012345678901234567890, \"value\": -1}\n"
          "]\n");
}

TEST_CASE("non-finite numeric cells fall back to strings in json") {
    Table t({"v"});
    t.row().num(std::numeric_limits<double>::infinity());
    std::ostringstream out;
    t.write(out, OutputFormat::json);
    CHECK(out.str() == "[\n  {\"v\": \"inf\"}\n]\n");
}

TEST_CASE("format_double round trips") {
    for (double x : {0.1, 1.0 / 3.0, 6.0 / 9.87, 1e-300, -2.5e17}) {
        const std::string s = format_double(x);
        CHECK(std::stod(s) == x);
    }
}

TEST_CASE("row width is enforced") {
    Table t({"a", "b"});
    CHECK_THROWS_AS(t.push_row({"only-one"}, {false}), std::logic_error);
}

TEST_CASE("statistics helpers") {
    SECTION("wilson interval brackets the point estimate") {
        const auto w = wilson_interval(25, 100);
        CHECK(w.p_hat == 0.25);
        CHECK(w.lo < 0.25);
        CHECK(w.hi > 0.25);
        CHECK(w.lo > 0.0);
        CHECK_THROWS_AS(wilson_interval(0, 0), std::invalid_argument);
    }
    SECTION("quantiles") {
        std::vector<double> xs{5, 1, 4, 2, 3};
        CHECK(quantile(xs, 0.5) == 3.0);
        CHECK(quantile(xs, 1.0) == 5.0);
        CHECK(quantile(xs, 0.0) == 1.0);
    }
    SECTION("mean and se") {
        std::vector<double> xs{1, 1, 1, 1};
        const auto ms = mean_and_se(xs);
        CHECK(ms.mean == 1.0);
        CHECK(ms.se == 0.0);
    }
}
