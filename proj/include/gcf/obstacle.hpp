#pragma once

#include <memory>
#include <vector>

#include "gcf/sphere_geometry.hpp"

namespace gcf {

enum class ObstacleKind { Interpolating, Homothetic };

/// Time-dependent shrinking obstacle given by its support function.
///
/// Two closed-form families are supported so that the time derivative and the
/// curvature supremum are exact:
///   interpolating  phi(z,t) = e^{-t} phi0(z) + (1 - e^{-t}) phi_inf(z)
///   homothetic     phi(z,t) = A(t) phi0(z),  A(t) = a_inf + (1-a_inf) e^{-c t}
class Obstacle {
public:
    ObstacleKind kind() const { return kind_; }
    const GridPtr& grid() const { return grid_; }
    const ScalarField& phi0() const { return phi0_; }
    const ScalarField& phi_inf() const { return phi_inf_; }
    double a_inf() const { return a_inf_; }
    double rate() const { return rate_; }

    /// Exact closed-form evaluation of (phi, d_t phi) at time t >= 0.
    std::pair<ScalarField, ScalarField> evaluate(const SphericalGrid& grid, double t) const;
    /// Allocation-free variant for the solver inner loop.
    void evaluate_into(double t, std::vector<double>& phi, std::vector<double>& dphi) const;

    /// sup over S^n x [0,inf) of K_Phi^alpha, computed from the final shape.
    double sup_k_alpha(double alpha) const;

    friend std::shared_ptr<const Obstacle> make_interpolating(const ScalarField& phi0,
                                                              const ScalarField& phi_inf);
    friend std::shared_ptr<const Obstacle> make_homothetic(const ScalarField& phi0, double a_inf,
                                                           double c);

private:
    Obstacle() = default;

    ObstacleKind kind_ = ObstacleKind::Homothetic;
    GridPtr grid_;
    ScalarField phi0_;
    ScalarField phi_inf_;
    double a_inf_ = 0.0;
    double rate_ = 0.0;
};

using ObstaclePtr = std::shared_ptr<const Obstacle>;

ObstaclePtr make_interpolating(const ScalarField& phi0, const ScalarField& phi_inf);
ObstaclePtr make_homothetic(const ScalarField& phi0, double a_inf, double c);

/// Margins for every admissibility condition of a shrinking obstacle plus the
/// initial-compatibility inequalities against u0. Pass requires all margins
/// strictly positive at the sampled times and nodes.
struct ObstacleValidationReport {
    bool pass = false;
    double margin_speed_negative = 0.0;      ///< min(-d_t phi) over samples/nodes
    double margin_speed_nonincreasing = 0.0; ///< min decrement of -d_t phi between samples
    double margin_final_interior = 0.0;      ///< min phi_inf
    double margin_mu_monotone = 0.0;         ///< min increment of principal curvatures
    double mu_bound = 0.0;                   ///< max principal curvature over samples
    double margin_supersolution = 0.0;       ///< min(K_Phi^alpha + d_t phi)
    double margin_compat_initial = 0.0;      ///< min K_0^alpha - max(-d_t phi_0)
    double margin_compat_obstacle = 0.0;     ///< min K_{Phi_0}^alpha - max(-d_t phi_0)
    double margin_enclosure = 0.0;           ///< min(u0 - phi0)
    double c0 = 0.0;                         ///< sup K_Phi^alpha (closed form)
};

ObstacleValidationReport validate(const Obstacle& obstacle, const SphericalGrid& grid,
                                  const ScalarField& u0, double alpha,
                                  const std::vector<double>& time_samples);

}  // namespace gcf
