#include "gcf/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gcf {

namespace {

double max_of(const ScalarField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, f[k]);
    return m;
}

double min_of(const ScalarField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.size(); ++k) m = std::min(m, f[k]);
    return m;
}

}  // namespace

ObstaclePtr make_interpolating(const ScalarField& phi0, const ScalarField& phi_inf) {
    if (!phi0.grid() || !phi_inf.grid() || !phi0.grid()->compatible(*phi_inf.grid()))
        throw Error(ErrorCode::GridMismatch, "phi0 and phi_inf must live on the same grid");
    for (std::size_t k = 0; k < phi0.size(); ++k) {
        if (!(phi_inf[k] > 0.0))
            throw Error(ErrorCode::NotPositive, "phi_inf must be positive", static_cast<long>(k));
        if (!(phi0[k] > phi_inf[k]))
            throw Error(ErrorCode::OrderingViolated, "phi0 must exceed phi_inf nodewise",
                        static_cast<long>(k));
    }
    auto obs = std::shared_ptr<Obstacle>(new Obstacle());
    obs->kind_ = ObstacleKind::Interpolating;
    obs->grid_ = phi0.grid();
    obs->phi0_ = phi0;
    obs->phi_inf_ = phi_inf;
    return obs;
}

ObstaclePtr make_homothetic(const ScalarField& phi0, double a_inf, double c) {
    if (!(a_inf > 0.0) || !(a_inf < 1.0))
        throw Error(ErrorCode::InvalidProfile, "a_inf must lie in (0,1)");
    if (!(c > 0.0) || !std::isfinite(c))
        throw Error(ErrorCode::InvalidProfile, "profile rate c must be positive");
    for (std::size_t k = 0; k < phi0.size(); ++k)
        if (!(phi0[k] > 0.0))
            throw Error(ErrorCode::NotPositive, "phi0 must be positive", static_cast<long>(k));
    auto obs = std::shared_ptr<Obstacle>(new Obstacle());
    obs->kind_ = ObstacleKind::Homothetic;
    obs->grid_ = phi0.grid();
    obs->phi0_ = phi0;
    obs->phi_inf_ = ScalarField(phi0.grid());
    for (std::size_t k = 0; k < phi0.size(); ++k) obs->phi_inf_[k] = a_inf * phi0[k];
    obs->a_inf_ = a_inf;
    obs->rate_ = c;
    return obs;
}

std::pair<ScalarField, ScalarField> Obstacle::evaluate(const SphericalGrid& grid, double t) const {
    if (!grid_->compatible(grid))
        throw Error(ErrorCode::GridMismatch, "obstacle lives on a different grid");
    ScalarField phi(grid_), dphi(grid_);
    evaluate_into(t, phi.raw(), dphi.raw());
    return {std::move(phi), std::move(dphi)};
}

void Obstacle::evaluate_into(double t, std::vector<double>& phi, std::vector<double>& dphi) const {
    if (t < 0.0) throw Error(ErrorCode::NegativeTime, "obstacle time must be non-negative");
    const std::size_t n = phi0_.size();
    phi.resize(n);
    dphi.resize(n);
    if (kind_ == ObstacleKind::Interpolating) {
        const double e = std::exp(-t);
        for (std::size_t k = 0; k < n; ++k) {
            phi[k] = e * phi0_[k] + (1.0 - e) * phi_inf_[k];
            dphi[k] = -e * (phi0_[k] - phi_inf_[k]);
        }
    } else {
        const double e = std::exp(-rate_ * t);
        const double a = a_inf_ + (1.0 - a_inf_) * e;
        const double da = -rate_ * (1.0 - a_inf_) * e;
        for (std::size_t k = 0; k < n; ++k) {
            phi[k] = a * phi0_[k];
            dphi[k] = da * phi0_[k];
        }
    }
}

double Obstacle::sup_k_alpha(double alpha) const {
    // For both families the principal curvatures are non-decreasing in t, so
    // the supremum of K_Phi is attained by the final shape.
    const CurvatureBundle bundle = curvatures(second_fundamental_form(phi_inf_, *grid_), *grid_);
    double max_k = 0.0;
    for (std::size_t k = 0; k < bundle.K.size(); ++k) max_k = std::max(max_k, bundle.K[k]);
    return detail::pow_alpha(max_k, alpha);
}

ObstacleValidationReport validate(const Obstacle& obstacle, const SphericalGrid& grid,
                                  const ScalarField& u0, double alpha,
                                  const std::vector<double>& time_samples) {
    if (!obstacle.grid()->compatible(grid) || !u0.grid() || !u0.grid()->compatible(grid))
        throw Error(ErrorCode::GridMismatch, "obstacle, grid and u0 must agree");
    if (time_samples.empty() || time_samples.front() != 0.0)
        throw Error(ErrorCode::InvalidParameter, "time samples must start at 0");
    for (std::size_t s = 1; s < time_samples.size(); ++s)
        if (!(time_samples[s] > time_samples[s - 1]))
            throw Error(ErrorCode::InvalidParameter, "time samples must be increasing");

    const double inf = std::numeric_limits<double>::infinity();
    ObstacleValidationReport rep;
    rep.margin_speed_negative = inf;
    rep.margin_speed_nonincreasing = inf;
    rep.margin_mu_monotone = inf;
    rep.margin_supersolution = inf;
    rep.mu_bound = 0.0;

    const std::size_t n = grid.node_count();
    std::vector<double> prev_speed, prev_mu;
    std::vector<double> phi(n), dphi(n);
    for (double t : time_samples) {
        obstacle.evaluate_into(t, phi, dphi);
        ScalarField phi_field(obstacle.grid(), phi);
        const CurvatureBundle bundle =
            curvatures(second_fundamental_form(phi_field, grid), grid);

        std::vector<double> speed(n), mu(n * grid.dim());
        for (std::size_t k = 0; k < n; ++k) {
            speed[k] = -dphi[k];
            rep.margin_speed_negative = std::min(rep.margin_speed_negative, speed[k]);
            const double ka = detail::pow_alpha(bundle.K[k], alpha);
            rep.margin_supersolution = std::min(rep.margin_supersolution, ka + dphi[k]);
            for (int d = 0; d < grid.dim(); ++d) {
                mu[k * grid.dim() + d] = bundle.lambda[k * grid.dim() + d];
                rep.mu_bound = std::max(rep.mu_bound, bundle.lambda[k * grid.dim() + d]);
            }
        }
        if (!prev_speed.empty()) {
            for (std::size_t k = 0; k < n; ++k) {
                rep.margin_speed_nonincreasing =
                    std::min(rep.margin_speed_nonincreasing, prev_speed[k] - speed[k]);
                for (int d = 0; d < grid.dim(); ++d)
                    rep.margin_mu_monotone =
                        std::min(rep.margin_mu_monotone,
                                 mu[k * grid.dim() + d] - prev_mu[k * grid.dim() + d]);
            }
        }
        prev_speed = std::move(speed);
        prev_mu = std::move(mu);
    }

    rep.margin_final_interior = min_of(obstacle.phi_inf());
    rep.c0 = obstacle.sup_k_alpha(alpha);

    // Initial compatibility against u0 and Phi_0.
    obstacle.evaluate_into(0.0, phi, dphi);
    double max_speed0 = 0.0;
    for (std::size_t k = 0; k < n; ++k) max_speed0 = std::max(max_speed0, -dphi[k]);

    const CurvatureBundle b0 = curvatures(second_fundamental_form(u0, grid), grid);
    const ScalarField phi0_field(obstacle.grid(), phi);
    const CurvatureBundle bphi0 =
        curvatures(second_fundamental_form(phi0_field, grid), grid);
    double min_k0 = inf, min_kphi0 = inf;
    for (std::size_t k = 0; k < n; ++k) {
        min_k0 = std::min(min_k0, detail::pow_alpha(b0.K[k], alpha));
        min_kphi0 = std::min(min_kphi0, detail::pow_alpha(bphi0.K[k], alpha));
    }
    rep.margin_compat_initial = min_k0 - max_speed0;
    rep.margin_compat_obstacle = min_kphi0 - max_speed0;

    double min_gap = inf;
    for (std::size_t k = 0; k < n; ++k) min_gap = std::min(min_gap, u0[k] - phi[k]);
    rep.margin_enclosure = min_gap;

    rep.pass = rep.margin_speed_negative > 0.0 && rep.margin_speed_nonincreasing > 0.0 &&
               rep.margin_final_interior > 0.0 && rep.margin_mu_monotone > 0.0 &&
               std::isfinite(rep.mu_bound) && rep.margin_supersolution > 0.0 &&
               rep.margin_compat_initial > 0.0 && rep.margin_compat_obstacle > 0.0 &&
               rep.margin_enclosure > 0.0;
    // A single time sample leaves the monotonicity margins undetermined.
    if (time_samples.size() < 2) rep.pass = false;
    return rep;
}

}  // namespace gcf
