#include <doctest.h>

#include <cmath>
#include <random>

#include "gcf/penalty.hpp"

using namespace gcf;

TEST_CASE("c11 penalty pinned values") {
    const auto p = make_penalty(0.1, 2.0);
    CHECK(p.value(0.0) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(p.value(0.1) == 0.0);
    CHECK(p.value(0.05) == doctest::Approx(-0.5).epsilon(1e-15));  // 2 * -(1-0.5)^2
    CHECK(p.value(-0.1) == doctest::Approx(-6.0).epsilon(1e-15));  // 2 * (-1 + 2*(-1))
    CHECK(p.derivative(-0.1) == doctest::Approx(2.0 * 2.0 / 0.1).epsilon(1e-15));
    CHECK(p.derivative(0.0) == doctest::Approx(2.0 * 2.0 / 0.1).epsilon(1e-15));

    const auto [v, d] = p.eval(0.2);  // flat region
    CHECK(v == 0.0);
    CHECK(d == 0.0);
}

TEST_CASE("penalty is zero beyond delta and linear far below") {
    for (auto variant : {PenaltyVariant::C11, PenaltyVariant::Smooth}) {
        const auto p = make_penalty(0.05, 1.5, variant);
        CHECK(p.value(0.05) == 0.0);
        CHECK(p.value(10.0) == 0.0);
        CHECK(p.derivative(0.05) == doctest::Approx(0.0).epsilon(1e-14));
        // Linear extension: value drops with constant slope 2*C0/delta.
        const double slope = (p.value(-1.0) - p.value(-2.0)) / 1.0;
        CHECK(slope == doctest::Approx(2.0 * 1.5 / 0.05).epsilon(1e-12));
        CHECK(p.value(0.0) == doctest::Approx(-1.5).epsilon(1e-15));
    }
}

TEST_CASE("penalty monotone and concave (sampled property)") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> xs(-3.0, 3.0);
    for (auto variant : {PenaltyVariant::C11, PenaltyVariant::Smooth}) {
        const auto p = make_penalty(0.7, 2.3, variant);
        for (int trial = 0; trial < 2000; ++trial) {
            double a = xs(rng), b = xs(rng);
            if (a > b) std::swap(a, b);
            CHECK(p.value(b) >= p.value(a));
            CHECK(p.derivative(b) <= p.derivative(a) + 1e-12);
            CHECK(p.value(a) <= 0.0);
            CHECK(p.derivative(a) >= 0.0);
        }
    }
}

TEST_CASE("penalty scales linearly in C0") {
    const auto base = make_penalty(0.3, 1.0);
    const auto scaled = make_penalty(0.3, 4.5);
    for (double x : {-1.0, -0.2, 0.0, 0.1, 0.25, 0.31}) {
        CHECK(scaled.value(x) == doctest::Approx(4.5 * base.value(x)).epsilon(1e-14));
        CHECK(scaled.derivative(x) == doctest::Approx(4.5 * base.derivative(x)).epsilon(1e-14));
    }
}

TEST_CASE("smooth variant is C2 at the junctions") {
    const auto p = make_penalty(1.0, 1.0, PenaltyVariant::Smooth);
    const double e = 1e-6;
    // Slope continuous at 0 and at 1, curvature ~0 at both ends of the bridge.
    CHECK(p.derivative(-e) == doctest::Approx(p.derivative(e)).epsilon(1e-4));
    CHECK(p.derivative(1.0 - e) == doctest::Approx(0.0).epsilon(1e-4));
    const double curv0 = (p.derivative(2.0 * e) - p.derivative(e)) / e;
    const double curv1 = (p.derivative(1.0 - e) - p.derivative(1.0 - 2.0 * e)) / e;
    CHECK(std::abs(curv0) <= 1e-4);
    CHECK(std::abs(curv1) <= 1e-4);
}

TEST_CASE("invalid parameters rejected") {
    CHECK_THROWS_AS(make_penalty(0.0, 1.0), Error);
    CHECK_THROWS_AS(make_penalty(0.1, -2.0), Error);
}
