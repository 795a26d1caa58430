#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "gvspec/preprocess.hpp"
#include "gvspec/timeseries.hpp"
#include "oracles.hpp"

using namespace gvspec;

namespace {
TimeSeries parse(const std::string& text) {
    std::istringstream in(text);
    return load_series(in);
}
} // namespace

TEST_CASE("load_series parses two-column csv", "[timeseries][io]") {
    const auto ts = parse("0.0,5\n1.0,7");
    REQUIRE(ts.size() == 2);
    CHECK(std::vector<double>(ts.epochs().begin(), ts.epochs().end()) == std::vector<double>{0.0, 1.0});
    CHECK(std::vector<double>(ts.values().begin(), ts.values().end()) == std::vector<double>{5.0, 7.0});
}

TEST_CASE("load_series header and whitespace handling", "[timeseries][io]") {
    const auto ts = parse("epoch,value\r\n 0.5 , 1e3\r\n\n2,-4\r\n");
    REQUIRE(ts.size() == 2);
    CHECK(ts.epochs()[0] == 0.5);
    CHECK(ts.values()[0] == 1000.0);
    CHECK(ts.values()[1] == -4.0);
}

TEST_CASE("load_series errors", "[timeseries][io]") {
    SECTION("duplicate epoch") { REQUIRE_THROWS_AS(parse("0.0,5\n0.0,7"), ValidationError); }
    SECTION("decreasing epoch") { REQUIRE_THROWS_AS(parse("1,5\n0,7"), ValidationError); }
    SECTION("single row") { REQUIRE_THROWS_AS(parse("0,5\n"), ValidationError); }
    SECTION("empty") { REQUIRE_THROWS_AS(parse(""), ValidationError); }
    SECTION("non-finite value") { REQUIRE_THROWS_AS(parse("0,1\n1,nan\n"), ValidationError); }
    SECTION("malformed row reports its line") {
        try {
            parse("t,v\n0,1\n1,abc\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SECTION("three fields") { REQUIRE_THROWS_AS(parse("0,1,2\n1,2,3\n"), ParseError); }
    SECTION("second header-looking row") { REQUIRE_THROWS_AS(parse("0,1\nx,2\n"), ParseError); }
}

TEST_CASE("TimeSeries construction invariants", "[timeseries]") {
    REQUIRE_THROWS_AS(TimeSeries({0.0, 1.0}, {1.0}), ValidationError);
    REQUIRE_THROWS_AS(TimeSeries({0.0, std::numeric_limits<double>::infinity()}, {1.0, 2.0}), ValidationError);
    REQUIRE_NOTHROW(TimeSeries({0.0, 1.0}, {1.0, 2.0}, "kyr"));
}

TEST_CASE("describe counts constant and changing pairs", "[timeseries]") {
    const auto st = describe(TimeSeries({0, 1, 2}, {3, 3, 4}));
    CHECK(st.n == 3);
    CHECK(st.constant_pairs == 1);
    CHECK(st.changing_pairs == 1);
    CHECK(st.span == 2.0);
    CHECK(st.min_gap == 1.0);
    CHECK(st.max_gap == 1.0);

    const auto mono = describe(TimeSeries({0, 1, 5, 6}, {1, 2, 3, 4}));
    CHECK(mono.constant_pairs == 0);
    CHECK(mono.min_gap == 1.0);
    CHECK(mono.max_gap == 4.0);
}

TEST_CASE("replication_ratio", "[timeseries]") {
    CHECK(replication_ratio(TimeSeries({0, 1, 2, 3}, {1, 1, 1, 2})) == 2.0);
    CHECK(replication_ratio(TimeSeries({0, 1, 2}, {1, 2, 3})) == 0.0);
    CHECK(std::isinf(replication_ratio(TimeSeries({0, 1, 2}, {4, 4, 4}))));

    std::vector<double> t(29), v(29, 7.0);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    v.back() = 8.0;
    CHECK(replication_ratio(TimeSeries(t, v)) == 27.0);
}

TEST_CASE("value-hold resampling of a sparse record exceeds 27:1 replication", "[timeseries][preprocess]") {
    // 167 irregular samples over 542 units whose value changes at 70 of the
    // 166 consecutive pairs. With every value distinct the hold would give
    // at most (2168 - 166) / 166, about 12:1.
    std::mt19937_64 gen(167);
    auto t = oracle::random_epochs(gen, 167, 542.0);
    t.front() = 0.0;
    t.back() = 542.0;
    std::vector<std::size_t> pairs(166);
    std::iota(pairs.begin(), pairs.end(), std::size_t{1});
    std::shuffle(pairs.begin(), pairs.end(), gen);
    std::vector<char> changes(167, 0);
    for (std::size_t k = 0; k < 70; ++k) changes[pairs[k]] = 1;
    std::vector<double> v(t.size(), 1000.0);
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + (changes[i] ? 1.0 : 0.0);

    const TimeSeries source(t, v);
    CHECK(describe(source).changing_pairs == 70);
    const auto resampled = step_resample(source, 0.25).series;
    const auto st = describe(resampled);
    INFO("m=" << st.constant_pairs << " p=" << st.changing_pairs);
    CHECK(st.n == 2169);
    CHECK(st.changing_pairs <= 70);
    CHECK(replication_ratio(resampled) > 27.0);

    // Distinct values at every source sample cannot reach 27:1 on this grid.
    std::vector<double> distinct(t.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) distinct[i] = static_cast<double>(i);
    CHECK(replication_ratio(step_resample(TimeSeries(t, distinct), 0.25).series) < 27.0);
}

TEST_CASE("series properties", "[timeseries][property]") {
    std::mt19937_64 gen(42);
    for (int iter = 0; iter < 100; ++iter) {
        const std::size_t n = 2 + gen() % 60;
        const auto t = oracle::random_epochs(gen, n, 100.0);
        std::vector<double> v(n);
        for (double& x : v) x = static_cast<double>(gen() % 4); // plenty of repeats
        const TimeSeries ts(t, v);
        const auto st = describe(ts);
        REQUIRE(st.constant_pairs + st.changing_pairs == n - 1);
        REQUIRE(st.min_gap > 0.0);

        // Affine maps of the epochs leave the ratio unchanged.
        std::vector<double> t2(n);
        for (std::size_t i = 0; i < n; ++i) t2[i] = 3.5 * t[i] - 1234.0;
        const double a = replication_ratio(ts);
        const double b = replication_ratio(TimeSeries(t2, v));
        REQUIRE((a == b || (std::isinf(a) && std::isinf(b))));

        // save then load is the identity at full precision.
        std::vector<double> noisy = oracle::random_values(gen, n);
        const TimeSeries rt(t, noisy);
        std::ostringstream out;
        save_series(out, rt);
        std::istringstream in(out.str());
        REQUIRE(load_series(in) == rt);
    }
}
