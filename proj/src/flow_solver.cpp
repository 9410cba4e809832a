#include "gcf/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gcf {

namespace {

constexpr double kTimeEps = 1e-13;

void refresh_caches(FlowState& state) {
    const SphericalGrid& grid = *state.u.grid();
    state.bundle = curvatures(second_fundamental_form(state.u, grid), grid);
    if (state.obstacle) state.obstacle->evaluate_into(state.t, state.phi, state.dphi);
}

TrajectoryRecord make_record(const FlowState& state) {
    const std::size_t n = state.u.size();
    TrajectoryRecord rec;
    rec.t = state.t;
    rec.u = state.u.raw();
    rec.min_K = std::numeric_limits<double>::infinity();
    rec.max_K = -rec.min_K;
    rec.min_gap = rec.min_K;
    rec.min_beta = 0.0;
    rec.min_lambda = rec.min_K;
    rec.max_lambda = -rec.min_K;
    rec.max_speed = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        rec.min_K = std::min(rec.min_K, state.bundle.K[k]);
        rec.max_K = std::max(rec.max_K, state.bundle.K[k]);
        rec.min_lambda = std::min(rec.min_lambda, state.bundle.lambda_min(k));
        rec.max_lambda = std::max(rec.max_lambda, state.bundle.lambda_max(k));
        const double ka = detail::pow_alpha(state.bundle.K[k], state.alpha);
        double beta = 0.0;
        double gap = state.u[k];
        if (state.obstacle) {
            gap = state.u[k] - state.phi[k];
            beta = state.penalty->value(gap);
        }
        rec.min_gap = std::min(rec.min_gap, gap);
        rec.min_beta = std::min(rec.min_beta, beta);
        rec.max_speed = std::max(rec.max_speed, std::abs(ka + beta));
    }
    return rec;
}

}  // namespace

FlowState make_state(ScalarField u0, double alpha, ObstaclePtr obstacle,
                     std::optional<PenaltyFunction> penalty, double t) {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParameter, "alpha must be positive");
    if (obstacle && !penalty)
        throw Error(ErrorCode::InvalidParameter, "an obstacle requires a penalty function");
    FlowState state;
    state.t = t;
    state.u = std::move(u0);
    state.alpha = alpha;
    state.obstacle = std::move(obstacle);
    state.penalty = penalty;
    refresh_caches(state);
    return state;
}

double stable_dt(const FlowState& state) {
    const SphericalGrid& grid = *state.u.grid();
    const int dim = grid.dim();
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < state.u.size(); ++k) {
        const double ka = detail::pow_alpha(state.bundle.K[k], state.alpha);
        const double r_min = 1.0 / state.bundle.lambda_max(k);
        const double sp2 = grid.spacing_sq(grid.ring_of(k));
        dt = std::min(dt, sp2 * r_min / (2.0 * dim * state.alpha * ka));
    }
    return 0.5 * dt;
}

double solve_penalized_node(double x_explicit, double phi_next, double dt,
                            const PenaltyFunction& penalty, int* iterations) {
    const double tol = 1e-12 * std::max(1.0, penalty.c0());
    double lo = x_explicit;
    double hi = x_explicit - dt * penalty.value(x_explicit - phi_next);
    double x = x_explicit;
    int it = 0;
    for (; it < 100; ++it) {
        const auto [val, der] = penalty.eval(x - phi_next);
        const double g = x - x_explicit + dt * val;
        if (std::abs(g) <= tol) break;
        if (g < 0.0) lo = std::max(lo, x);
        else hi = std::min(hi, x);
        const double gprime = 1.0 + dt * der;
        double x_new = x - g / gprime;
        if (!(x_new > lo) || !(x_new < hi)) x_new = 0.5 * (lo + hi);
        if (x_new == x) break;
        x = x_new;
    }
    if (it >= 100)
        throw Error(ErrorCode::ScalarSolveFailed, "penalized node solve did not converge");
    if (iterations) *iterations = it;
    return x;
}

FlowState step(const FlowState& state, double dt) {
    if (dt < 0.0) throw Error(ErrorCode::InvalidParameter, "dt must be non-negative");
    FlowState next;
    next.t = state.t + dt;
    next.alpha = state.alpha;
    next.obstacle = state.obstacle;
    next.penalty = state.penalty;
    next.u = ScalarField(state.u.grid());

    if (dt == 0.0) {
        next.u = state.u;
        next.bundle = state.bundle;
        next.phi = state.phi;
        next.dphi = state.dphi;
        return next;
    }

    const std::size_t n = state.u.size();
    if (state.obstacle) {
        state.obstacle->evaluate_into(next.t, next.phi, next.dphi);
        for (std::size_t k = 0; k < n; ++k) {
            const double ka = detail::pow_alpha(state.bundle.K[k], state.alpha);
            const double xe = state.u[k] - dt * ka;
            // Fast path: penalty flat at the explicit predictor and stays flat.
            if (xe - next.phi[k] >= state.penalty->delta()) {
                next.u[k] = xe;
            } else {
                next.u[k] = solve_penalized_node(xe, next.phi[k], dt, *state.penalty);
            }
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            const double ka = detail::pow_alpha(state.bundle.K[k], state.alpha);
            next.u[k] = state.u[k] - dt * ka;
        }
    }

    try {
        const SphericalGrid& grid = *next.u.grid();
        next.bundle = curvatures(second_fundamental_form(next.u, grid), grid);
    } catch (const Error& err) {
        if (err.code() == ErrorCode::NotConvex)
            throw Error(ErrorCode::NotConvexAfterStep,
                        "step lost convexity; reduce dt", err.node(), next.t);
        throw;
    }
    return next;
}

Trajectory run(const ScalarField& u0, ObstaclePtr obstacle, double alpha, double delta,
               double t_end, double cadence, PenaltyVariant variant) {
    if (!(t_end > 0.0) || !(cadence > 0.0))
        throw Error(ErrorCode::InvalidParameter, "t_end and cadence must be positive");

    const SphericalGrid& grid = *u0.grid();
    std::optional<PenaltyFunction> penalty;
    if (obstacle) {
        std::vector<double> samples;
        for (int s = 0; s <= 8; ++s) samples.push_back(t_end * s / 8.0);
        const auto report = validate(*obstacle, grid, u0, alpha, samples);
        if (!report.pass)
            throw Error(ErrorCode::ObstacleInvalid, "obstacle failed admissibility validation");
        if (!(delta > 0.0) || delta > report.margin_enclosure + kTimeEps)
            throw Error(ErrorCode::ObstacleInvalid,
                        "delta must be positive and not exceed min(u0 - phi0)");
        penalty = make_penalty(delta, report.c0, variant);
    }

    FlowState state = make_state(u0, alpha, obstacle, penalty);

    Trajectory traj;
    traj.grid = u0.grid();
    traj.alpha = alpha;
    traj.delta = obstacle ? delta : 0.0;
    traj.obstacle = obstacle;
    traj.penalty = penalty;
    traj.max_gap_rate = -std::numeric_limits<double>::infinity();
    traj.max_u_rate = traj.max_gap_rate;
    traj.min_beta_steps = 0.0;
    traj.min_gap_steps = std::numeric_limits<double>::infinity();
    traj.min_K_steps = traj.min_gap_steps;
    traj.max_K_steps = -traj.min_gap_steps;
    traj.max_dt_used = 0.0;
    traj.min_dt_used = std::numeric_limits<double>::infinity();
    traj.records.push_back(make_record(state));

    const double pen_cap = obstacle ? 0.125 * delta / penalty->c0()
                                    : std::numeric_limits<double>::infinity();
    long k_out = 1;
    double t_target = std::min(cadence, t_end);
    while (state.t < t_end - kTimeEps) {
        double dt = std::min(stable_dt(state), pen_cap);
        bool hit = false;
        if (state.t + dt >= t_target - kTimeEps) {
            dt = t_target - state.t;
            hit = true;
        }
        if (!(dt > kTimeEps))
            throw Error(ErrorCode::SolverStalled, "time step collapsed below resolution");

        FlowState next = step(state, dt);
        if (hit) next.t = t_target;

        // Per-step running extrema.
        const std::size_t n = state.u.size();
        for (std::size_t k = 0; k < n; ++k) {
            const double gap_old = state.obstacle ? state.u[k] - state.phi[k] : state.u[k];
            const double gap_new = next.obstacle ? next.u[k] - next.phi[k] : next.u[k];
            traj.max_gap_rate = std::max(traj.max_gap_rate, (gap_new - gap_old) / dt);
            traj.max_u_rate = std::max(traj.max_u_rate, (next.u[k] - state.u[k]) / dt);
            traj.min_gap_steps = std::min(traj.min_gap_steps, gap_new);
            if (next.obstacle)
                traj.min_beta_steps = std::min(traj.min_beta_steps, penalty->value(gap_new));
            traj.min_K_steps = std::min(traj.min_K_steps, next.bundle.K[k]);
            traj.max_K_steps = std::max(traj.max_K_steps, next.bundle.K[k]);
        }
        traj.max_dt_used = std::max(traj.max_dt_used, dt);
        traj.min_dt_used = std::min(traj.min_dt_used, dt);
        ++traj.step_count;

        state = std::move(next);
        if (hit) {
            traj.records.push_back(make_record(state));
            ++k_out;
            const double cand = k_out * cadence;
            t_target = cand < t_end - kTimeEps ? cand : t_end;
        }
    }
    return traj;
}

ContinuationResult continuation(const ScalarField& u0, ObstaclePtr obstacle, double alpha,
                                const std::vector<double>& schedule, double t_end, double cadence,
                                PenaltyVariant variant) {
    if (schedule.empty())
        throw Error(ErrorCode::InvalidParameter, "continuation schedule must be non-empty");
    for (std::size_t k = 1; k < schedule.size(); ++k)
        if (!(schedule[k] < schedule[k - 1]))
            throw Error(ErrorCode::InvalidParameter, "continuation schedule must decrease");

    ContinuationResult result;
    result.schedule = schedule;
    for (double delta : schedule)
        result.trajectories.push_back(run(u0, obstacle, alpha, delta, t_end, cadence, variant));

    for (std::size_t k = 0; k + 1 < schedule.size(); ++k) {
        const auto& a = result.trajectories[k].records;
        const auto& b = result.trajectories[k + 1].records;
        const std::size_t m = std::min(a.size(), b.size());
        double dist = 0.0;
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t node = 0; node < a[r].u.size(); ++node)
                dist = std::max(dist, std::abs(a[r].u[node] - b[r].u[node]));
        result.pairwise_distance.push_back(dist);
    }
    for (const auto& traj : result.trajectories)
        result.complementarity.push_back(complementarity_residual(traj));
    return result;
}

CoincidenceResult detect_coincidence_time(const Trajectory& trajectory, const Obstacle& obstacle,
                                          double tol) {
    const SphericalGrid& grid = *trajectory.grid;
    CoincidenceResult out;

    double max_u0 = 0.0;
    for (double v : trajectory.records.front().u) max_u0 = std::max(max_u0, std::abs(v));
    double max_phi0 = 0.0;
    for (std::size_t k = 0; k < obstacle.phi0().size(); ++k)
        max_phi0 = std::max(max_phi0, obstacle.phi0()[k]);
    out.rho = max_phi0 + sup_gradient_norm(obstacle.phi0(), grid);
    const double p = grid.dim() * trajectory.alpha + 1.0;
    out.t_star = std::pow(max_u0 + out.rho, p) / p;

    std::vector<double> phi, dphi;
    for (const auto& rec : trajectory.records) {
        obstacle.evaluate_into(rec.t, phi, dphi);
        double sup = 0.0;
        for (std::size_t k = 0; k < rec.u.size(); ++k)
            sup = std::max(sup, std::abs(rec.u[k] - phi[k]));
        if (sup <= tol) {
            out.detected = rec.t;
            break;
        }
    }
    return out;
}

double complementarity_residual(const Trajectory& trajectory) {
    const auto& recs = trajectory.records;
    if (recs.size() < 3) return 0.0;
    const SphericalGrid& grid = *trajectory.grid;
    double worst = 0.0;
    std::vector<double> phi, dphi;
    for (std::size_t m = 1; m + 1 < recs.size(); ++m) {
        const double span = recs[m + 1].t - recs[m - 1].t;
        const ScalarField u(trajectory.grid, recs[m].u);
        const CurvatureBundle bundle = curvatures(second_fundamental_form(u, grid), grid);
        if (trajectory.obstacle) trajectory.obstacle->evaluate_into(recs[m].t, phi, dphi);
        for (std::size_t k = 0; k < recs[m].u.size(); ++k) {
            const double dudt = (recs[m + 1].u[k] - recs[m - 1].u[k]) / span;
            const double ka = detail::pow_alpha(bundle.K[k], trajectory.alpha);
            const double gap = trajectory.obstacle ? recs[m].u[k] - phi[k] : recs[m].u[k];
            worst = std::max(worst, std::abs(std::min(dudt + ka, gap)));
        }
    }
    return worst;
}

}  // namespace gcf
