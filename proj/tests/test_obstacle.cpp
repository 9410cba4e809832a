#include <doctest.h>

#include <cmath>

#include "gcf/obstacle.hpp"

using namespace gcf;

TEST_CASE("interpolating obstacle matches the halfway-shrinking example") {
    auto grid = build_grid(1, 64);
    const ScalarField phi0(grid, 1.0), phi_inf(grid, 0.5);
    auto obs = make_interpolating(phi0, phi_inf);

    // phi(.,t) = (1 + e^{-t})/2 when interpolating between radii 1 and 1/2.
    for (double t : {0.0, 0.3, 1.0, 2.5}) {
        auto [phi, dphi] = obs->evaluate(*grid, t);
        const double expected = 0.5 * (1.0 + std::exp(-t));
        for (std::size_t k = 0; k < phi.size(); ++k) {
            CHECK(phi[k] == doctest::Approx(expected).epsilon(1e-15));
            CHECK(dphi[k] == doctest::Approx(-0.5 * std::exp(-t)).epsilon(1e-15));
        }
    }

    auto [p0, d0] = obs->evaluate(*grid, 0.0);
    for (std::size_t k = 0; k < p0.size(); ++k) {
        CHECK(p0[k] == 1.0);
        CHECK(d0[k] == doctest::Approx(-0.5).epsilon(1e-15));
    }

    auto [p20, d20] = obs->evaluate(*grid, 20.0);
    for (std::size_t k = 0; k < p20.size(); ++k)
        CHECK(std::abs(p20[k] - 0.5) <= 1.1e-8 * 0.5);

    CHECK_THROWS_AS(obs->evaluate(*grid, -0.1), Error);
}

TEST_CASE("homothetic obstacle closed form") {
    auto grid = build_grid(1, 64);
    const ScalarField phi0(grid, 1.0);
    auto obs = make_homothetic(phi0, 0.5, 1.0);

    for (double t : {0.0, 0.7, 3.0}) {
        auto [phi, dphi] = obs->evaluate(*grid, t);
        CHECK(phi[0] == doctest::Approx(0.5 + 0.5 * std::exp(-t)).epsilon(1e-15));
        CHECK(dphi[0] == doctest::Approx(-0.5 * std::exp(-t)).epsilon(1e-15));
    }
    auto [p, d] = obs->evaluate(*grid, 0.0);
    CHECK(d[0] == doctest::Approx(-1.0 * (1.0 - 0.5) * 1.0).epsilon(1e-15));

    // Speed -d_t phi shrinks toward zero.
    double prev = 1e300;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        auto [phi, dphi] = obs->evaluate(*grid, t);
        CHECK(-dphi[0] < prev);
        prev = -dphi[0];
    }

    // Principal curvatures mu_i(t) = mu_i(0)/A(t) are non-decreasing.
    double prev_mu = 0.0;
    for (double t : {0.0, 1.0, 2.0}) {
        auto [phi, dphi] = obs->evaluate(*grid, t);
        const auto bundle = curvatures(second_fundamental_form(phi, *grid), *grid);
        CHECK(bundle.lambda_min(0) >= prev_mu);
        prev_mu = bundle.lambda_min(0);
    }

    CHECK_THROWS_AS(make_homothetic(phi0, 1.2, 1.0), Error);
    CHECK_THROWS_AS(make_homothetic(phi0, 0.5, -1.0), Error);
}

TEST_CASE("interpolating evaluate at t = ln 2") {
    auto grid = build_grid(1, 64);
    auto obs = make_interpolating(ScalarField(grid, 1.0), ScalarField(grid, 0.5));
    auto [phi, dphi] = obs->evaluate(*grid, std::log(2.0));
    for (std::size_t k = 0; k < phi.size(); ++k)
        CHECK(phi[k] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("ordering and positivity violations rejected") {
    auto grid = build_grid(1, 64);
    CHECK_THROWS_WITH_AS(make_interpolating(ScalarField(grid, 0.5), ScalarField(grid, 1.0)),
                         doctest::Contains("OrderingViolated"), Error);
    CHECK_THROWS_WITH_AS(make_interpolating(ScalarField(grid, 1.0), ScalarField(grid, -0.1)),
                         doctest::Contains("NotPositive"), Error);
}

TEST_CASE("validate margins: homothetic ball passes iff rate is compatible") {
    auto grid = build_grid(1, 64);
    const ScalarField phi0(grid, 1.0), u0(grid, 2.0);
    const std::vector<double> samples = {0.0, 0.5, 1.0, 2.0};

    // K_0 = 1/2, K_{Phi_0} = 1, -d_t phi_0 = 0.5 c: pass iff c < 1 (alpha = 1).
    {
        auto rep = validate(*make_homothetic(phi0, 0.5, 0.9), *grid, u0, 1.0, samples);
        CHECK(rep.pass);
        CHECK(rep.margin_compat_initial == doctest::Approx(0.5 - 0.45).epsilon(1e-9));
        CHECK(rep.margin_enclosure == doctest::Approx(1.0).epsilon(1e-12));
        // C0 from the final shape: K_inf = 1/0.5 = 2, alpha = 1.
        CHECK(rep.c0 == doctest::Approx(2.0).epsilon(1e-9));
    }
    {
        auto rep = validate(*make_homothetic(phi0, 0.5, 1.1), *grid, u0, 1.0, samples);
        CHECK_FALSE(rep.pass);
        CHECK(rep.margin_compat_initial < 0.0);
    }
}

TEST_CASE("validate flags enclosure failure") {
    auto grid = build_grid(1, 64);
    auto obs = make_homothetic(ScalarField(grid, 1.0), 0.5, 0.1);
    const ScalarField u0(grid, 0.9);  // obstacle pokes through the initial data
    auto rep = validate(*obs, *grid, u0, 1.0, {0.0, 1.0});
    CHECK_FALSE(rep.pass);
    CHECK(rep.margin_enclosure < 0.0);
}

TEST_CASE("validate records mu monotonicity for interpolating ball-to-ellipse") {
    auto grid = build_grid(1, 128);
    ScalarField phi0(grid), phi_inf(grid);
    for (std::size_t k = 0; k < phi0.size(); ++k) {
        const double th = grid->theta(k);
        const double cx = std::cos(th), sy = std::sin(th);
        phi0[k] = 1.0;
        phi_inf[k] = 0.45 * std::sqrt(1.3 * 1.3 * cx * cx + 0.8 * 0.8 * sy * sy) / 1.3;
    }
    auto obs = make_interpolating(phi0, phi_inf);
    auto rep = validate(*obs, *grid, ScalarField(grid, 2.0), 1.0, {0.0, 0.5, 1.0, 2.0});
    // Condition (iv) is not automatic here; the report must carry a finite
    // measured margin either way.
    CHECK(std::isfinite(rep.margin_mu_monotone));
    CHECK(std::isfinite(rep.mu_bound));
    CHECK(rep.mu_bound > 0.0);
}

TEST_CASE("homothetic validation holds across admissible profile parameters") {
    auto grid = build_grid(1, 64);
    const ScalarField phi0(grid, 0.9), u0(grid, 2.0);
    for (double a_inf : {0.2, 0.5, 0.8}) {
        for (double c : {0.05, 0.3}) {
            auto rep = validate(*make_homothetic(phi0, a_inf, c), *grid, u0, 1.0,
                                {0.0, 0.5, 1.0, 3.0});
            CHECK(rep.pass);
        }
    }
}
