#include <doctest.h>

#include <cmath>
#include <limits>

#include "gcf/flow_solver.hpp"

using namespace gcf;

namespace {

ObstaclePtr ball_obstacle(const GridPtr& grid, double r0, double r_inf, double rate) {
    return make_homothetic(ScalarField(grid, r0), r_inf / r0, rate);
}

}  // namespace

TEST_CASE("stable_dt: pinned value and scaling homogeneity") {
    auto grid = build_grid(1, 256);
    const double h = grid->h_theta();
    auto state = make_state(ScalarField(grid, 1.0), 1.0);
    CHECK(stable_dt(state) == doctest::Approx(h * h / 4.0).epsilon(1e-12));

    // dt(2u)/dt(u) = 2^{n alpha + 1}
    auto state2 = make_state(ScalarField(grid, 2.0), 1.0);
    CHECK(stable_dt(state2) / stable_dt(state) == doctest::Approx(4.0).epsilon(1e-12));

    auto shalf = make_state(ScalarField(grid, 1.0), 0.5);
    auto shalf2 = make_state(ScalarField(grid, 2.0), 0.5);
    CHECK(stable_dt(shalf2) / stable_dt(shalf) ==
          doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-12));

    auto g2 = build_grid(2, 16, 32);
    auto t1 = make_state(ScalarField(g2, 1.0), 1.0);
    auto t2 = make_state(ScalarField(g2, 2.0), 1.0);
    CHECK(stable_dt(t2) / stable_dt(t1) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("non-convex state rejected") {
    auto grid = build_grid(1, 64);
    ScalarField bad(grid);
    for (std::size_t k = 0; k < bad.size(); ++k)
        bad[k] = 1.0 + 0.9 * std::cos(2.0 * grid->theta(k));
    CHECK_THROWS_WITH_AS(make_state(bad, 1.0), doctest::Contains("NotConvex"), Error);
}

TEST_CASE("step without obstacle is explicit Euler on the circle") {
    auto grid = build_grid(1, 64);
    const double R = 1.3;
    auto state = make_state(ScalarField(grid, R), 1.0);
    const double dt = 1e-3;
    auto next = step(state, dt);
    for (std::size_t k = 0; k < next.u.size(); ++k)
        CHECK(next.u[k] == doctest::Approx(R - dt / R).epsilon(1e-15));
    CHECK(next.t == doctest::Approx(dt));

    auto same = step(state, 0.0);
    for (std::size_t k = 0; k < same.u.size(); ++k) CHECK(same.u[k] == state.u[k]);
    CHECK(same.t == state.t);
}

TEST_CASE("implicit node solve matches the closed-form linear solve") {
    const auto pen = make_penalty(0.1, 2.0);
    const double dt = 1e-3, phi_next = 1.0;
    // Predictor far below phi: the penalty is in its linear branch at the root.
    const double xe = phi_next - 0.5;
    int iters = 0;
    const double x = solve_penalized_node(xe, phi_next, dt, pen, &iters);
    // x + dt*C0*(-1 + 2 (x - phi)/delta) = xe  =>  closed-form linear solve
    const double a = 1.0 + dt * 2.0 * 2.0 / 0.1;
    const double x_closed = (xe + dt * 2.0 * (1.0 + 2.0 * phi_next / 0.1)) / a;
    CHECK(x == doctest::Approx(x_closed).epsilon(1e-12));
    CHECK(iters <= 2);
    CHECK(pen.value(x - phi_next) < 0.0);
}

TEST_CASE("shrinking circle reproduces the closed-form radius") {
    auto grid = build_grid(1, 128);
    auto traj = run(ScalarField(grid, 1.0), nullptr, 1.0, 0.0, 0.2, 0.02);
    const auto& last = traj.records.back();
    const double exact = std::sqrt(1.0 - 2.0 * 0.2);
    for (double v : last.u) CHECK(std::abs(v - exact) <= 2e-3);

    // Radial symmetry is preserved essentially to rounding.
    double spread = 0.0;
    for (double v : last.u) spread = std::max(spread, std::abs(v - last.u[0]));
    CHECK(spread <= 1e-10);

    // u decreases monotonically at every node and step.
    CHECK(traj.max_u_rate < 0.0);
}

TEST_CASE("fractional power circle: R(t) = (1 - 1.5 t)^{2/3}") {
    auto grid = build_grid(1, 128);
    auto traj = run(ScalarField(grid, 1.0), nullptr, 0.5, 0.0, 0.2, 0.02);
    const double exact = std::pow(1.0 - 1.5 * 0.2, 2.0 / 3.0);
    for (double v : traj.records.back().u) CHECK(std::abs(v - exact) <= 2e-3);
}

TEST_CASE("contact run: gap stays positive, penalty bounded, gap monotone") {
    auto grid = build_grid(1, 64);
    auto obs = ball_obstacle(grid, 0.9, 0.5, 2.0);
    auto traj = run(ScalarField(grid, 1.0), obs, 1.0, 0.05, 0.6, 0.01);

    const double c0 = obs->sup_k_alpha(1.0);
    CHECK(traj.min_gap_steps > 0.0);
    CHECK(traj.min_beta_steps >= -c0 - 1e-9);
    CHECK(traj.min_beta_steps <= 0.0);
    CHECK(traj.max_gap_rate <= 1e-8);

    // The flow has ridden into the penalty band by t_end.
    CHECK(traj.records.back().min_gap < 0.05);
    CHECK(traj.records.back().min_beta < 0.0);
}

TEST_CASE("run validates the obstacle and the delta bound") {
    auto grid = build_grid(1, 64);
    auto obs = ball_obstacle(grid, 0.9, 0.5, 2.0);
    CHECK_THROWS_WITH_AS(run(ScalarField(grid, 1.0), obs, 1.0, 0.5, 0.3, 0.01),
                         doctest::Contains("ObstacleInvalid"), Error);
    auto too_fast = ball_obstacle(grid, 0.9, 0.5, 10.0);
    CHECK_THROWS_WITH_AS(run(ScalarField(grid, 1.0), too_fast, 1.0, 0.05, 0.3, 0.01),
                         doctest::Contains("ObstacleInvalid"), Error);
}

TEST_CASE("continuation without obstacle produces identical runs") {
    auto grid = build_grid(1, 64);
    auto result = continuation(ScalarField(grid, 1.0), nullptr, 1.0, {0.1, 0.05}, 0.1, 0.02);
    REQUIRE(result.trajectories.size() == 2);
    CHECK(result.pairwise_distance[0] == 0.0);
}

TEST_CASE("continuation distances decrease with the schedule") {
    auto grid = build_grid(1, 64);
    auto obs = ball_obstacle(grid, 0.9, 0.5, 2.0);
    auto result =
        continuation(ScalarField(grid, 1.0), obs, 1.0, {0.1, 0.05, 0.025}, 0.6, 0.02);
    REQUIRE(result.pairwise_distance.size() == 2);
    CHECK(result.pairwise_distance[0] > result.pairwise_distance[1]);
    CHECK(result.complementarity.back() <= 0.5 * result.complementarity.front());
}

TEST_CASE("coincidence detection and the certified bound") {
    auto grid = build_grid(1, 64);
    auto obs = ball_obstacle(grid, 0.9, 0.5, 2.0);

    // Short run: never within tolerance.
    auto early = run(ScalarField(grid, 1.0), obs, 1.0, 0.05, 0.05, 0.01);
    auto none = detect_coincidence_time(early, *obs, 1e-3);
    CHECK_FALSE(none.detected.has_value());
    CHECK(none.rho == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(none.t_star == doctest::Approx((1.0 + 0.9) * (1.0 + 0.9) / 2.0).epsilon(1e-12));

    // Infinite tolerance returns the first record.
    auto always = detect_coincidence_time(early, *obs, std::numeric_limits<double>::infinity());
    REQUIRE(always.detected.has_value());
    CHECK(*always.detected == 0.0);

    // Long run: detection happens and certifies before T_*.
    auto late = run(ScalarField(grid, 1.0), obs, 1.0, 0.0125, 1.2, 0.012);
    auto hit = detect_coincidence_time(late, *obs, 1e-3);
    REQUIRE(hit.detected.has_value());
    CHECK(*hit.detected <= hit.t_star);
}

TEST_CASE("output cadence lands records exactly on the requested times") {
    auto grid = build_grid(1, 64);
    auto traj = run(ScalarField(grid, 1.0), nullptr, 1.0, 0.0, 0.1, 0.03);
    REQUIRE(traj.records.size() == 5);  // 0, 0.03, 0.06, 0.09, 0.1
    CHECK(traj.records[1].t == 0.03);
    CHECK(traj.records[3].t == 0.09);
    CHECK(traj.records.back().t == 0.1);
}
