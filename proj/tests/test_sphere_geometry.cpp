#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gcf/sphere_geometry.hpp"

using namespace gcf;

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField constant_field(const GridPtr& grid, double c) { return ScalarField(grid, c); }

// Support function of an origin-centered ellipse with semi-axes (a, b).
ScalarField ellipse_support(const GridPtr& grid, double a, double b) {
    ScalarField u(grid);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double th = grid->theta(k);
        const double cx = std::cos(th), sy = std::sin(th);
        u[k] = std::sqrt(a * a * cx * cx + b * b * sy * sy);
    }
    return u;
}

// Independent oracle: curvature of the parametric ellipse (a cos t, b sin t)
// at the point whose outward normal is (cos th, sin th).
double ellipse_curvature_at_normal(double a, double b, double th) {
    const double t = std::atan2(b * std::sin(th), a * std::cos(th));
    const double s = a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t);
    return a * b / std::pow(s, 1.5);
}

// u = 1 + eps * x z restricted to the sphere, with its hand-derived
// covariant Hessian in (theta, psi) coordinates.
ScalarField xz_field(const GridPtr& grid, double eps) {
    ScalarField u(grid);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double th = grid->theta(k), ps = grid->psi(k);
        u[k] = 1.0 + eps * std::sin(th) * std::cos(th) * std::cos(ps);
    }
    return u;
}

void xz_exact_hessian(double eps, double th, double ps, double& tt, double& tp, double& pp) {
    tt = -2.0 * eps * std::sin(2.0 * th) * std::cos(ps);
    tp = eps * std::sin(th) * std::sin(th) * std::sin(ps);
    pp = -2.0 * eps * std::pow(std::sin(th), 3) * std::cos(th) * std::cos(ps);
}

double xz_exact_K(double eps, double th, double ps) {
    double tt, tp, pp;
    xz_exact_hessian(eps, th, ps, tt, tp, pp);
    const double u = 1.0 + eps * std::sin(th) * std::cos(th) * std::cos(ps);
    const double st = std::sin(th);
    const double h11 = tt + u;
    const double h12 = tp;
    const double h22 = pp + u * st * st;
    return st * st / (h11 * h22 - h12 * h12);
}

}  // namespace

TEST_CASE("build_grid contract") {
    auto g1 = build_grid(1, 256);
    CHECK(g1->node_count() == 256);
    CHECK(g1->theta(5) == doctest::Approx(2.0 * kPi * 5 / 256).epsilon(1e-15));
    CHECK(g1->metric_det(17) == 1.0);

    auto g2 = build_grid(2, 32, 64);
    CHECK(g2->node_count() == 2048);
    CHECK(g2->ring_theta(0) == doctest::Approx(0.5 * kPi / 32).epsilon(1e-15));
    const std::size_t node = g2->node_index(3, 7);
    CHECK(g2->metric_det(node) ==
          doctest::Approx(std::pow(std::sin((3.5) * kPi / 32), 2)).epsilon(1e-14));

    CHECK_THROWS_WITH_AS(build_grid(3, 64, 64), doctest::Contains("UnsupportedDimension"), Error);
    CHECK_THROWS_AS(build_grid(1, 7), Error);
    CHECK_THROWS_AS(build_grid(2, 8, 6), Error);
    CHECK_THROWS_AS(build_grid(2, 8, 9), Error);  // odd azimuth breaks the pole rule
}

TEST_CASE("covariant hessian: constants and linear functions") {
    auto g2 = build_grid(2, 16, 32);
    const auto zero = covariant_hessian(constant_field(g2, 1.0), *g2);
    for (std::size_t k = 0; k < g2->node_count(); ++k)
        for (int c = 0; c < 3; ++c) CHECK(zero.at(k, c) == doctest::Approx(0.0).epsilon(1e-15));

    // u = cos theta (the z-coordinate): Hessian of a linear function is -u*g.
    ScalarField u(g2);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::cos(g2->theta(k));
    const auto hess = covariant_hessian(u, *g2);
    for (std::size_t k = 0; k < u.size(); ++k) {
        CHECK(hess.at(k, 0) == doctest::Approx(-u[k]).epsilon(1e-11));
        CHECK(hess.at(k, 1) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(hess.at(k, 2) == doctest::Approx(-u[k] * g2->metric_det(k)).epsilon(1e-11));
    }

    auto g1 = build_grid(1, 64);
    ScalarField c1(g1);
    for (std::size_t k = 0; k < c1.size(); ++k) c1[k] = std::cos(g1->theta(k));
    const auto h1 = covariant_hessian(c1, *g1);
    for (std::size_t k = 0; k < c1.size(); ++k)
        CHECK(h1.at(k, 0) == doctest::Approx(-c1[k]).epsilon(1e-12));
}

TEST_CASE("second fundamental form on the circle") {
    auto grid = build_grid(1, 256);
    const double h = grid->h_theta();

    // Round circle: Hessian vanishes, h = r.
    const auto hr = second_fundamental_form(constant_field(grid, 2.5), *grid);
    for (std::size_t k = 0; k < grid->node_count(); ++k)
        CHECK(hr.at(k, 0) == doctest::Approx(2.5).epsilon(1e-14));

    // u = 1 + 0.1 cos 2theta: analytic h = 1 - 0.3 cos 2theta to O(h^2).
    ScalarField u(grid);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = 1.0 + 0.1 * std::cos(2.0 * grid->theta(k));
    const auto hu = second_fundamental_form(u, *grid);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double expected = 1.0 - 0.3 * std::cos(2.0 * grid->theta(k));
        CHECK(std::abs(hu.at(k, 0) - expected) <= 1.0 * h * h);
    }

    // Ellipse support: positivity scan.
    const auto he = second_fundamental_form(ellipse_support(grid, 2.0, 1.0), *grid);
    for (std::size_t k = 0; k < grid->node_count(); ++k) CHECK(he.at(k, 0) > 0.0);
}

TEST_CASE("curvatures: round shapes exact, ellipse against parametric oracle") {
    auto g2 = build_grid(2, 16, 32);
    const double r = 1.7;
    const auto b2 = curvatures(second_fundamental_form(constant_field(g2, r), *g2), *g2);
    for (std::size_t k = 0; k < g2->node_count(); ++k) {
        CHECK(std::abs(b2.K[k] - 1.0 / (r * r)) <= 1e-10 / (r * r));
        CHECK(std::abs(b2.lambda_min(k) - 1.0 / r) <= 1e-10 / r);
        CHECK(std::abs(b2.lambda_max(k) - 1.0 / r) <= 1e-10 / r);
        CHECK(std::abs(b2.H[k] - 2.0 / r) <= 1e-10 / r);
    }

    auto g1 = build_grid(1, 64);
    const auto b1 = curvatures(second_fundamental_form(constant_field(g1, 0.5), *g1), *g1);
    for (std::size_t k = 0; k < g1->node_count(); ++k)
        CHECK(std::abs(b1.K[k] - 2.0) <= 1e-10 * 2.0);

    auto fine = build_grid(1, 256);
    const auto be = curvatures(second_fundamental_form(ellipse_support(fine, 2.0, 1.0), *fine), *fine);
    CHECK(be.K[0] == doctest::Approx(2.0).epsilon(5e-3));  // tip of the long axis, a/b^2
    for (std::size_t k = 0; k < fine->node_count(); ++k) {
        const double oracle = ellipse_curvature_at_normal(2.0, 1.0, fine->theta(k));
        CHECK(std::abs(be.K[k] - oracle) <= 2e-2 * oracle);
    }

    // Non-convex input reports the offending node.
    ScalarField bad(fine);
    for (std::size_t k = 0; k < bad.size(); ++k) bad[k] = 1.0 + 0.9 * std::cos(2.0 * fine->theta(k));
    SymTensorField hbad = second_fundamental_form(bad, *fine);
    CHECK_THROWS_WITH_AS(curvatures(hbad, *fine), doctest::Contains("NotConvex"), Error);
}

TEST_CASE("embed: identity, translation, implicit ellipse residual") {
    auto g2 = build_grid(2, 16, 32);
    const auto unit = embed(constant_field(g2, 1.0), *g2);
    for (std::size_t k = 0; k < g2->node_count(); ++k) {
        const double th = g2->theta(k), ps = g2->psi(k);
        CHECK(unit[k].x == doctest::Approx(std::sin(th) * std::cos(ps)).epsilon(1e-13));
        CHECK(unit[k].y == doctest::Approx(std::sin(th) * std::sin(ps)).epsilon(1e-13));
        CHECK(unit[k].z == doctest::Approx(std::cos(th)).epsilon(1e-13));
    }

    // u = <a, z> + r embeds as the sphere of radius r centered at a.
    const double ax = 0.3, ay = -0.2, az = 0.45, r = 1.2;
    ScalarField u(g2);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double th = g2->theta(k), ps = g2->psi(k);
        u[k] = ax * std::sin(th) * std::cos(ps) + ay * std::sin(th) * std::sin(ps) +
               az * std::cos(th) + r;
    }
    const auto pts = embed(u, *g2);
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const double dist = std::sqrt((pts[k].x - ax) * (pts[k].x - ax) +
                                      (pts[k].y - ay) * (pts[k].y - ay) +
                                      (pts[k].z - az) * (pts[k].z - az));
        CHECK(std::abs(dist - r) <= 1e-10);
    }

    auto g1 = build_grid(1, 256);
    const double h = g1->h_theta();
    const auto pe = embed(ellipse_support(g1, 2.0, 1.0), *g1);
    for (const auto& p : pe)
        CHECK(std::abs(p.x * p.x / 4.0 + p.y * p.y - 1.0) <= 4.0 * h * h);
}

TEST_CASE("translation invariance of curvatures") {
    auto g1 = build_grid(1, 128);
    const ScalarField u1 = ellipse_support(g1, 1.5, 1.0);
    ScalarField shifted1 = u1;
    for (std::size_t k = 0; k < u1.size(); ++k)
        shifted1[k] += 0.3 * std::cos(g1->theta(k)) - 0.2 * std::sin(g1->theta(k));
    const auto a1 = curvatures(second_fundamental_form(u1, *g1), *g1);
    const auto b1 = curvatures(second_fundamental_form(shifted1, *g1), *g1);
    for (std::size_t k = 0; k < u1.size(); ++k)
        CHECK(std::abs(a1.K[k] - b1.K[k]) <= 1e-8 * a1.K[k]);

    auto g2 = build_grid(2, 16, 32);
    const ScalarField u2 = xz_field(g2, 0.05);
    ScalarField shifted2 = u2;
    for (std::size_t k = 0; k < u2.size(); ++k) {
        const double th = g2->theta(k), ps = g2->psi(k);
        shifted2[k] += 0.1 * std::sin(th) * std::cos(ps) - 0.05 * std::sin(th) * std::sin(ps) +
                       0.2 * std::cos(th);
    }
    const auto a2 = curvatures(second_fundamental_form(u2, *g2), *g2);
    const auto b2 = curvatures(second_fundamental_form(shifted2, *g2), *g2);
    for (std::size_t k = 0; k < u2.size(); ++k) {
        CHECK(std::abs(a2.K[k] - b2.K[k]) <= 1e-8 * a2.K[k]);
        CHECK(std::abs(a2.lambda_min(k) - b2.lambda_min(k)) <= 1e-8);
    }
}

TEST_CASE("scaling covariance is exact for power-of-two factors") {
    auto g2 = build_grid(2, 16, 32);
    const ScalarField u = xz_field(g2, 0.05);
    ScalarField u2x = u;
    for (std::size_t k = 0; k < u.size(); ++k) u2x[k] *= 2.0;
    const auto a = curvatures(second_fundamental_form(u, *g2), *g2);
    const auto b = curvatures(second_fundamental_form(u2x, *g2), *g2);
    for (std::size_t k = 0; k < u.size(); ++k) {
        CHECK(std::abs(b.K[k] - a.K[k] / 4.0) <= 1e-13 * a.K[k]);
        CHECK(std::abs(b.lambda_min(k) - a.lambda_min(k) / 2.0) <= 1e-13);
        CHECK(std::abs(b.lambda_max(k) - a.lambda_max(k) / 2.0) <= 1e-13);
    }
}

TEST_CASE("gauss curvature product identity (random convex fields)") {
    auto grid = build_grid(2, 16, 32);
    std::mt19937 rng(20240817);
    std::uniform_real_distribution<double> coeff(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField u(grid);
        const double c1 = coeff(rng), c2 = coeff(rng), c3 = coeff(rng);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double th = grid->theta(k), ps = grid->psi(k);
            u[k] = 1.0 + c1 * std::sin(th) * std::cos(th) * std::cos(ps) +
                   c2 * std::sin(th) * std::sin(th) * std::cos(2.0 * ps) +
                   c3 * std::cos(th) * std::cos(th);
        }
        const auto b = curvatures(second_fundamental_form(u, *grid), *grid);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double prod = b.lambda_min(k) * b.lambda_max(k);
            CHECK(std::abs(b.K[k] - prod) <= 1e-10 * std::abs(b.K[k]));
            CHECK(std::abs(b.H[k] - (b.lambda_min(k) + b.lambda_max(k))) <= 1e-14 * b.H[k]);
        }
    }
}

TEST_CASE("K convergence order on an analytic field is at least 1.8") {
    const double eps = 0.05;
    double errs[2] = {0.0, 0.0};
    const int res[2][2] = {{16, 32}, {32, 64}};
    for (int lvl = 0; lvl < 2; ++lvl) {
        auto grid = build_grid(2, res[lvl][0], res[lvl][1]);
        const ScalarField u = xz_field(grid, eps);
        const auto b = curvatures(second_fundamental_form(u, *grid), *grid);
        for (std::size_t k = 0; k < u.size(); ++k) {
            const double exact = xz_exact_K(eps, grid->theta(k), grid->psi(k));
            errs[lvl] = std::max(errs[lvl], std::abs(b.K[k] - exact));
        }
    }
    const double order = std::log2(errs[0] / errs[1]);
    CHECK(order >= 1.8);
}

TEST_CASE("codazzi residual") {
    auto g1 = build_grid(1, 64);
    CHECK(codazzi_residual(ellipse_support(g1, 2.0, 1.0), *g1) == 0.0);

    auto g2 = build_grid(2, 16, 32);
    CHECK(codazzi_residual(constant_field(g2, 1.0), *g2) <= 1e-13);

    double res[2] = {0.0, 0.0};
    const int grids[2][2] = {{16, 32}, {32, 64}};
    for (int lvl = 0; lvl < 2; ++lvl) {
        auto g = build_grid(2, grids[lvl][0], grids[lvl][1]);
        res[lvl] = codazzi_residual(xz_field(g, 0.05), *g);
    }
    const double ratio = res[0] / res[1];
    CHECK(ratio >= 2.8);
    CHECK(ratio <= 5.2);
}

TEST_CASE("grid mismatch is rejected") {
    auto a = build_grid(1, 64);
    auto b = build_grid(1, 128);
    const ScalarField u(a, 1.0);
    CHECK_THROWS_WITH_AS(covariant_hessian(u, *b), doctest::Contains("GridMismatch"), Error);
}
