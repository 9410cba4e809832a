#include "gcf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double grid_h_max(const SphericalGrid& grid) {
    return grid.dim() == 1 ? grid.h_theta() : std::max(grid.h_theta(), grid.h_psi());
}

CurvatureBundle record_bundle(const Trajectory& traj, const TrajectoryRecord& rec) {
    const ScalarField u(traj.grid, rec.u);
    return curvatures(second_fundamental_form(u, *traj.grid), *traj.grid);
}

}  // namespace

BoundsLedger ledger(const ScalarField& u0, const Obstacle& obstacle, double alpha, double T) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw Error(ErrorCode::InvalidParameter, "ledger horizon must be positive and finite");
    const SphericalGrid& grid = *u0.grid();
    const int n = grid.dim();

    BoundsLedger b;
    b.T = T;

    double min_phi_inf = kInf;
    for (std::size_t k = 0; k < obstacle.phi_inf().size(); ++k)
        min_phi_inf = std::min(min_phi_inf, obstacle.phi_inf()[k]);
    if (!(min_phi_inf > 0.0))
        throw Error(ErrorCode::DegenerateObstacle, "final obstacle shape has no interior");
    b.rho0 = 0.5 * min_phi_inf;

    // -d_t phi is non-increasing in t, so its minimum over [0,T] sits at t = T.
    std::vector<double> phi, dphi;
    obstacle.evaluate_into(T, phi, dphi);
    double min_speed = kInf;
    for (double d : dphi) min_speed = std::min(min_speed, -d);
    b.c_T = std::pow(min_speed, 1.0 / alpha);

    const CurvatureBundle b0 = curvatures(second_fundamental_form(u0, grid), grid);
    double max_k0 = 0.0, max_u0 = 0.0;
    for (std::size_t k = 0; k < u0.size(); ++k) {
        max_k0 = std::max(max_k0, b0.K[k]);
        max_u0 = std::max(max_u0, u0[k]);
    }
    const double na = n * alpha;
    b.C1 = (1.0 / b.rho0) * std::max(detail::pow_alpha(max_k0, alpha),
                                     std::pow((na + 1.0) / (na * b.rho0), na));
    b.speed_bound = b.C1 * max_u0;
    b.c0 = obstacle.sup_k_alpha(alpha);
    b.k_upper = std::pow(b.speed_bound + b.c0, 1.0 / alpha);
    b.chi = 1.0 / (alpha * min_speed);
    return b;
}

CheckReport check_penalty_bounds(const Trajectory& trajectory, double c0) {
    CheckReport rep;
    rep.id = "penalty_bounds";
    rep.constants["C0"] = c0;
    rep.margin = kInf;
    for (const auto& rec : trajectory.records) {
        const double m = std::min(rec.min_beta + c0, -rec.min_beta);
        if (m < rep.margin) {
            rep.margin = m;
            rep.time = rec.t;
        }
    }
    const double m_steps =
        std::min(trajectory.min_beta_steps + c0, -trajectory.min_beta_steps);
    rep.margin = std::min(rep.margin, m_steps);
    rep.pass = rep.margin >= -1e-9;
    return rep;
}

CheckReport check_speed_monotone(const Trajectory& trajectory) {
    constexpr double kRate = 1e-8;  // allowed gap increase per unit time
    CheckReport rep;
    rep.id = "speed_monotone";
    rep.constants["rate_tolerance"] = kRate;

    double worst_rate = trajectory.max_gap_rate;
    long worst_node = -1;
    double worst_time = trajectory.records.empty() ? 0.0 : trajectory.records.front().t;

    std::vector<double> phi_a, dphi_a, phi_b, dphi_b;
    for (std::size_t m = 0; m + 1 < trajectory.records.size(); ++m) {
        const auto& a = trajectory.records[m];
        const auto& b = trajectory.records[m + 1];
        const double dt = b.t - a.t;
        if (!(dt > 0.0)) {
            rep.pass = false;
            rep.margin = -kInf;
            rep.time = b.t;
            return rep;  // non-increasing record times: reject outright
        }
        if (trajectory.obstacle) {
            trajectory.obstacle->evaluate_into(a.t, phi_a, dphi_a);
            trajectory.obstacle->evaluate_into(b.t, phi_b, dphi_b);
        }
        for (std::size_t k = 0; k < a.u.size(); ++k) {
            const double gap_a = trajectory.obstacle ? a.u[k] - phi_a[k] : a.u[k];
            const double gap_b = trajectory.obstacle ? b.u[k] - phi_b[k] : b.u[k];
            const double rate = (gap_b - gap_a) / dt;
            if (rate > worst_rate) {
                worst_rate = rate;
                worst_node = static_cast<long>(k);
                worst_time = b.t;
            }
        }
    }
    rep.margin = kRate - worst_rate;
    rep.node = worst_node;
    rep.time = worst_time;
    rep.pass = rep.margin >= 0.0;
    return rep;
}

CheckReport check_gauss_bounds(const Trajectory& trajectory, const BoundsLedger& bounds) {
    constexpr double kTol = 0.05;  // absorbs discretization error
    CheckReport rep;
    rep.id = "gauss_bounds";
    rep.constants["c_T"] = bounds.c_T;
    rep.constants["speed_bound"] = bounds.speed_bound;
    rep.constants["k_upper"] = bounds.k_upper;
    rep.constants["rho0"] = bounds.rho0;
    rep.constants["C0"] = bounds.c0;

    double min_k = trajectory.min_K_steps, max_k = trajectory.max_K_steps, max_speed = 0.0;
    for (const auto& rec : trajectory.records) {
        min_k = std::min(min_k, rec.min_K);
        max_k = std::max(max_k, rec.max_K);
        max_speed = std::max(max_speed, rec.max_speed);
    }
    const double m_lower = min_k - (1.0 - kTol) * bounds.c_T;
    const double m_upper = (1.0 + kTol) * bounds.k_upper - max_k;
    const double m_speed = bounds.speed_bound - max_speed;

    // Interior-maximum alternative for w = (K^alpha + beta)/(u - rho0): at the
    // argmax either the speed quotient is controlled by the obstacle speed or
    // the mean curvature obeys n K^{1/n} <= H <= (na+1)/(a rho0).
    const int n = trajectory.grid->dim();
    const double alpha = trajectory.alpha;
    double w_max = -kInf, w_node_H = 0.0, w_node_K = 0.0, w_node_dphi = 0.0;
    std::size_t w_rec = 0;
    std::vector<double> phi, dphi;
    for (std::size_t m = 0; m < trajectory.records.size(); ++m) {
        const auto& rec = trajectory.records[m];
        const CurvatureBundle bundle = record_bundle(trajectory, rec);
        if (trajectory.obstacle) trajectory.obstacle->evaluate_into(rec.t, phi, dphi);
        for (std::size_t k = 0; k < rec.u.size(); ++k) {
            const double gap = trajectory.obstacle ? rec.u[k] - phi[k] : rec.u[k];
            const double beta = trajectory.obstacle ? trajectory.penalty->value(gap) : 0.0;
            const double w =
                (detail::pow_alpha(bundle.K[k], alpha) + beta) / (rec.u[k] - bounds.rho0);
            if (w > w_max) {
                w_max = w;
                w_rec = m;
                w_node_H = bundle.H[k];
                w_node_K = bundle.K[k];
                w_node_dphi = trajectory.obstacle ? dphi[k] : 0.0;
            }
        }
    }
    double m_alt = 0.0;
    if (w_rec == 0) {
        double max_k0 = 0.0;
        {
            const CurvatureBundle b0 = record_bundle(trajectory, trajectory.records.front());
            for (std::size_t k = 0; k < trajectory.records.front().u.size(); ++k)
                max_k0 = std::max(max_k0, b0.K[k]);
        }
        m_alt = (1.0 + kTol) * detail::pow_alpha(max_k0, alpha) / bounds.rho0 - w_max;
    } else {
        const double alt_speed = (1.0 + kTol) * (-w_node_dphi) / bounds.rho0 - w_max;
        const double na = n * alpha;
        const double alt_H = (1.0 + kTol) * (na + 1.0) / (alpha * bounds.rho0) - w_node_H;
        const double amgm = w_node_H - n * std::pow(w_node_K, 1.0 / n) + 1e-9 * w_node_H;
        m_alt = std::max(alt_speed, std::min(alt_H, amgm));
    }

    rep.margin = std::min(std::min(m_lower, m_upper), std::min(m_speed, m_alt));
    rep.constants["min_K"] = min_k;
    rep.constants["max_K"] = max_k;
    rep.constants["max_speed"] = max_speed;
    rep.pass = rep.margin >= 0.0;
    return rep;
}

CheckReport check_principal_bounds(const Trajectory& trajectory, const BoundsLedger& bounds,
                                   double chi) {
    CheckReport rep;
    rep.id = "principal_bounds";
    rep.constants["chi"] = chi;
    rep.constants["C0"] = bounds.c0;

    double w0 = 0.0, w_max = -kInf, identity_margin = kInf;
    long worst_node = -1;
    double worst_time = 0.0;
    std::vector<double> phi, dphi;
    for (std::size_t m = 0; m < trajectory.records.size(); ++m) {
        const auto& rec = trajectory.records[m];
        const CurvatureBundle bundle = record_bundle(trajectory, rec);
        if (trajectory.obstacle) trajectory.obstacle->evaluate_into(rec.t, phi, dphi);
        double slice_max = -kInf;
        for (std::size_t k = 0; k < rec.u.size(); ++k) {
            const double gap = trajectory.obstacle ? rec.u[k] - phi[k] : rec.u[k];
            const double beta = trajectory.obstacle ? trajectory.penalty->value(gap) : 0.0;
            const double w = std::exp(-chi * beta) / bundle.lambda_min(k);
            slice_max = std::max(slice_max, w);
            identity_margin =
                std::min(identity_margin, w - 1.0 / bundle.lambda_min(k) + 1e-12 * w);
            if (w > w_max) {
                w_max = w;
                worst_node = static_cast<long>(k);
                worst_time = rec.t;
            }
        }
        if (m == 0) w0 = slice_max;
    }
    rep.constants["w_initial"] = w0;
    rep.constants["w_max"] = w_max;
    rep.margin = 10.0 * w0 - w_max;
    rep.node = worst_node;
    rep.time = worst_time;
    rep.pass = rep.margin >= 0.0 && identity_margin >= 0.0;
    return rep;
}

CheckReport check_euler_formula(const ScalarField& u, const SphericalGrid& grid) {
    CheckReport rep;
    rep.id = "euler_formula";
    if (grid.dim() == 1) {
        rep.margin = 0.0;  // single curvature: the diagonal ratio is 1/lambda
        rep.pass = true;
        return rep;
    }
    const SymTensorField h = second_fundamental_form(u, grid);
    const CurvatureBundle bundle = curvatures(h, grid);
    rep.margin = kInf;
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        const double inv_lam_min = 1.0 / bundle.lambda_min(k);
        const double ratio =
            std::max(h.at(k, 0), h.at(k, 2) / grid.metric_det(k));
        const double m = (1.0 + 1e-8) * inv_lam_min - ratio;
        if (m < rep.margin) {
            rep.margin = m;
            rep.node = static_cast<long>(k);
        }
    }
    rep.pass = rep.margin >= 0.0;
    return rep;
}

double evolution_residual_sup(const Trajectory& trajectory, double t_lo, double t_hi) {
    const auto& recs = trajectory.records;
    if (recs.size() < 3)
        throw Error(ErrorCode::InsufficientSnapshots,
                    "need three snapshots for the centered time difference");
    double sup = 0.0;
    std::vector<double> phi, dphi;
    for (std::size_t m = 1; m + 1 < recs.size(); ++m) {
        if (recs[m - 1].t < t_lo || recs[m + 1].t > t_hi) continue;
        const double span = recs[m + 1].t - recs[m - 1].t;
        const CurvatureBundle bundle = record_bundle(trajectory, recs[m]);
        if (trajectory.obstacle) trajectory.obstacle->evaluate_into(recs[m].t, phi, dphi);
        for (std::size_t k = 0; k < recs[m].u.size(); ++k) {
            const double dudt = (recs[m + 1].u[k] - recs[m - 1].u[k]) / span;
            const double ka = detail::pow_alpha(bundle.K[k], trajectory.alpha);
            const double beta =
                trajectory.obstacle ? trajectory.penalty->value(recs[m].u[k] - phi[k]) : 0.0;
            sup = std::max(sup, std::abs(dudt + ka + beta));
        }
    }
    return sup;
}

CheckReport check_evolution_residual(const Trajectory& trajectory, double t_lo, double t_hi,
                                     double c_res) {
    CheckReport rep;
    rep.id = "evolution_residual";
    const double h = grid_h_max(*trajectory.grid);
    const double bound = c_res * (trajectory.max_dt_used + h * h);
    const double sup = evolution_residual_sup(trajectory, t_lo, t_hi);
    rep.constants["c_res"] = c_res;
    rep.constants["bound"] = bound;
    rep.constants["residual"] = sup;
    rep.margin = bound - sup;
    rep.pass = rep.margin >= 0.0;
    return rep;
}

}  // namespace gcf
