#include <algorithm>
#include <random>

#include "bandwagon/core_model.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace bandwagon;

TEST_CASE("true preference rejects the closed boundary") {
    CHECK_THROWS_AS(TruePreference(0.0), std::invalid_argument);
    CHECK_THROWS_AS(TruePreference(1.0), std::invalid_argument);
    CHECK_THROWS_AS(TruePreference(-0.2), std::invalid_argument);
    CHECK_THROWS_AS(TruePreference(std::nan("")), std::invalid_argument);
    const TruePreference p(0.4);
    CHECK(p.value() == 0.4);
    CHECK(p.variance() == doctest::Approx(0.24));
}

TEST_CASE("lambda_at worked values") {
    CHECK(LambdaSchedule::geometric_affine(0.6, 0.9).at(1) == 1.0);
    CHECK(LambdaSchedule::geometric_affine(0.1, 0.95).at(2) == doctest::Approx(0.955).epsilon(1e-15));
    CHECK(LambdaSchedule::power_law(1.0).at(4) == 0.25);
    CHECK(LambdaSchedule::geometric(0.9).at(3) == doctest::Approx(0.81));
    CHECK(LambdaSchedule::constant(0.3).at(1) == 1.0);
    CHECK(LambdaSchedule::constant(0.3).at(7) == 0.3);
    CHECK(LambdaSchedule::weak().at(2) == doctest::Approx(0.96));
}

TEST_CASE("lambda_at index errors") {
    const auto e = LambdaSchedule::explicit_values({1.0, 0.5, 0.5});
    CHECK(e.at(3) == 0.5);
    CHECK_THROWS_AS(e.at(4), std::out_of_range);
    CHECK_THROWS_AS(e.at(0), std::out_of_range);
    CHECK_THROWS_AS(LambdaSchedule::none().at(0), std::out_of_range);
    CHECK(e.horizon() == 3);
}

TEST_CASE("schedule constructors validate parameters") {
    CHECK_THROWS_AS(LambdaSchedule::explicit_values({0.9, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::explicit_values({1.0, 0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::explicit_values({1.0, -0.1}), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::explicit_values({}), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::constant(1.5), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::geometric_affine(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::geometric_affine(1.2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::geometric(0.0), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::power_law(-1.0), std::invalid_argument);
    CHECK_NOTHROW(LambdaSchedule::explicit_values({1.0, 1.0, 0.0}));
}

TEST_CASE("schedule text round-trips") {
    for (const char* text : {"const:0.5", "geom-affine:0.1,0.95", "geom:0.9", "power:0.5", "explicit:1,0.5,0.25"}) {
        const auto s = parse_schedule(text);
        CHECK(format_schedule(s) == text);
        CHECK(parse_schedule(format_schedule(s)) == s);
    }
    CHECK_THROWS_AS(parse_schedule("geom"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule("geom:0.9,0.1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule("wave:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule("const:abc"), std::invalid_argument);
    CHECK_THROWS_AS(parse_schedule("const:"), std::invalid_argument);
}

TEST_CASE("property: random schedules stay monotone and in range") {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 500; ++trial) {
        auto s = support::random_schedule(g, 64);
        if (trial % 3 == 0) s = s.with_floor(0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(g));
        const std::size_t n = std::min<std::size_t>(s.horizon(), 2000);
        const auto t = s.table(n);
        REQUIRE(t[0] == 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(t[i] >= 0.0);
            REQUIRE(t[i] <= 1.0);
            REQUIRE(t[i] == s.at(i + 1));
            if (i > 0) REQUIRE(t[i] <= t[i - 1]);
        }
    }
}

TEST_CASE("floor raises values and keeps the first entry") {
    const auto s = LambdaSchedule::geometric(0.9).with_floor(0.3);
    CHECK(s.at(1) == 1.0);
    CHECK(s.at(2) == doctest::Approx(0.9));
    CHECK(s.at(100) == 0.3);
    CHECK(LambdaSchedule::none().with_floor(0.7).at(50) == 1.0);
    CHECK_THROWS_AS(LambdaSchedule::none().with_floor(0.0), std::invalid_argument);
}

TEST_CASE("next_rating_probability worked values") {
    ProcessState empty;
    CHECK(next_rating_probability(0.4, empty, 1.0) == doctest::Approx(0.4));
    ProcessState ones{4, 4};
    CHECK(next_rating_probability(0.4, ones, 0.5) == doctest::Approx(0.7));
    ProcessState zeros{4, 0};
    CHECK(next_rating_probability(0.4, zeros, 0.0) == 0.0);
    CHECK_THROWS_AS(next_rating_probability(TruePreference(0.4), empty, 0.5), std::invalid_argument);
    CHECK(next_rating_probability(TruePreference(0.4), ones, 0.5) == doctest::Approx(0.7));
}

TEST_CASE("property: next_rating_probability is affine in p with slope lambda") {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t n = 1 + g() % 50;
        const ProcessState st{n, g() % (n + 1)};
        const double lam = u(g);
        const double p = 0.05 + 0.9 * u(g);
        const double h = 1e-3;
        const double slope =
            (next_rating_probability(p + h, st, lam) - next_rating_probability(p - h, st, lam)) / (2 * h);
        REQUIRE(slope == doctest::Approx(lam).epsilon(1e-9));
        const double q = next_rating_probability(p, st, lam);
        REQUIRE(q >= 0.0);
        REQUIRE(q <= 1.0);
    }
}

TEST_CASE("property: process state ignores the order of pushes") {
    std::mt19937_64 g(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<bool> r(1 + g() % 100);
        for (auto&& x : r) x = g() & 1;
        ProcessState a;
        for (bool x : r) a.push(x);
        std::shuffle(r.begin(), r.end(), g);
        ProcessState b;
        for (bool x : r) b.push(x);
        REQUIRE(a.n == b.n);
        REQUIRE(a.sum == b.sum);
        REQUIRE(a.sum <= a.n);
        REQUIRE(a.mean() * static_cast<double>(a.n) == doctest::Approx(static_cast<double>(a.sum)));
    }
    CHECK(ProcessState{}.mean() == 0.0);
}

TEST_CASE("rating sequence prefix states") {
    RatingSequence seq{{1, 0, 1, 1}, LambdaSchedule::none(), 3};
    CHECK(seq.state_after(0).n == 0);
    CHECK(seq.state_after(3).sum == 2);
    CHECK(seq.state_after(4).mean() == 0.75);
    CHECK_THROWS_AS(seq.state_after(5), std::out_of_range);
}
