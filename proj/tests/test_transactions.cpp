#include <doctest.h>

#include <sstream>

#include "embshift/errors.hpp"
#include "embshift/time_utils.hpp"
#include "embshift/transactions.hpp"

using namespace embshift;

TEST_CASE("timestamp parsing round-trips and validates") {
    CHECK(parse_timestamp("2018-01-01T00:00:00Z") == 1514764800);
    CHECK(parse_timestamp("2018-01-01 00:00:00") == 1514764800);
    CHECK(parse_timestamp("2018-01-01") == 1514764800);
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    // leap year rules
    CHECK(parse_timestamp("2020-02-29").has_value());
    CHECK_FALSE(parse_timestamp("2019-02-29").has_value());
    CHECK(parse_timestamp("2000-02-29").has_value());
    CHECK_FALSE(parse_timestamp("1900-02-29").has_value());
    CHECK_FALSE(parse_timestamp("2018-13-01").has_value());
    CHECK_FALSE(parse_timestamp("2018-00-10").has_value());
    CHECK_FALSE(parse_timestamp("2018-01-01T24:00:00Z").has_value());
    CHECK_FALSE(parse_timestamp("garbage").has_value());
    CHECK_FALSE(parse_timestamp("").has_value());

    for (std::int64_t t : {0LL, 1514764800LL, 1893455999LL, 951782400LL}) {
        auto parsed = parse_timestamp(format_timestamp(t));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == t);
    }
}

TEST_CASE("civil date conversions invert each other") {
    for (int y : {1970, 1999, 2000, 2016, 2024}) {
        for (int m = 1; m <= 12; ++m) {
            std::int64_t d = days_from_civil(y, m, 15);
            int yy, mm, dd;
            civil_from_days(d, yy, mm, dd);
            CHECK(yy == y);
            CHECK(mm == m);
            CHECK(dd == 15);
        }
    }
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(month_start_epoch(1970, 1) == 0);
    CHECK(year_month_of(month_start_epoch(2023, 7)) == std::pair{2023, 7});
    CHECK(year_month_of(month_start_epoch(2023, 7) - 1) == std::pair{2023, 6});
}

TEST_CASE("ingest parses valid rows and reports malformed ones") {
    std::istringstream in(
        "a1,m1,2020-01-05T10:00:00Z,groceries\n"
        "a2,m2,2020-01-06,fuel\n"
        "a3,m3,not-a-date,fuel\n"
        "a4,m4\n"
        ",m5,2020-01-07,fuel\n"
        "a6,m6,2020-01-08,travel\n");
    IngestFormat fmt;
    IngestResult result = ingest(in, fmt);
    REQUIRE(result.records.size() == 3);
    REQUIRE(result.errors.size() == 3);
    CHECK(result.records[0].account_id == "a1");
    CHECK(result.records[0].merchant_id == "m1");
    CHECK(result.records[0].category == "groceries");
    CHECK(result.records[2].category == "travel");
    CHECK(result.errors[0].line_number == 3);
    CHECK(result.errors[1].line_number == 4);
    CHECK(result.errors[2].line_number == 5);
}

TEST_CASE("ingest honours header flag, delimiter and column mapping") {
    std::istringstream in(
        "merchant|category|account|ts\n"
        "m1|fuel|a1|2020-03-01\n");
    IngestFormat fmt;
    fmt.delimiter = '|';
    fmt.has_header = true;
    fmt.columns = {.account = 2, .merchant = 0, .timestamp = 3, .category = 1};
    IngestResult result = ingest(in, fmt);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].account_id == "a1");
    CHECK(result.records[0].merchant_id == "m1");
    CHECK(result.records[0].category == "fuel");
    CHECK(result.errors.empty());
}

TEST_CASE("ingest rejects unusable column mappings") {
    std::istringstream in("a,b,c,d\n");
    IngestFormat fmt;
    fmt.columns.account = -1;
    CHECK_THROWS_AS(ingest(in, fmt), ConfigError);

    std::istringstream in2("a,b,c,d\n");
    IngestFormat fmt2;
    fmt2.columns.merchant = fmt2.columns.account;
    CHECK_THROWS_AS(ingest(in2, fmt2), ConfigError);
}

TEST_CASE("monthly window partition covers the span contiguously") {
    auto rec = [](const char *ts) {
        TransactionRecord r;
        r.account_id = "a";
        r.merchant_id = "m";
        r.timestamp = *parse_timestamp(ts);
        r.category = "c";
        return r;
    };
    std::vector<TransactionRecord> records = {
        rec("2020-01-15"), rec("2020-03-20"), rec("2020-01-02"),
        rec("2020-04-01"), rec("2020-03-31T23:59:59Z")};
    WindowSpec spec;  // monthly
    auto windows = window_partition(records, spec);
    REQUIRE(windows.size() == 4);  // Jan..Apr, Feb empty
    CHECK(windows[0].second.size() == 2);
    CHECK(windows[1].second.empty());
    CHECK(windows[2].second.size() == 2);
    CHECK(windows[3].second.size() == 1);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        CHECK(windows[i].first.index == static_cast<int>(i));
        if (i > 0) CHECK(windows[i].first.start == windows[i - 1].first.end);
        for (const auto &r : windows[i].second)
            CHECK(windows[i].first.contains(r.timestamp));
    }
    CHECK(windows[0].first.start == month_start_epoch(2020, 1));
    CHECK(windows[3].first.end == month_start_epoch(2020, 5));
}

TEST_CASE("fixed-duration windows and empty input") {
    auto rec = [](std::int64_t t) {
        return TransactionRecord{"a", "m", t, "c"};
    };
    std::vector<TransactionRecord> records = {rec(0), rec(250), rec(99)};
    WindowSpec spec;
    spec.kind = WindowSpec::Kind::fixed_duration;
    spec.duration_seconds = 100;
    auto windows = window_partition(records, spec);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].second.size() == 2);
    CHECK(windows[1].second.empty());
    CHECK(windows[2].second.size() == 1);

    CHECK_THROWS_AS(window_partition({}, spec), DataError);
}
