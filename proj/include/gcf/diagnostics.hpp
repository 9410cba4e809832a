#pragma once

#include <map>
#include <string>

#include "gcf/flow_solver.hpp"

namespace gcf {

/// Explicit constants of the a-priori estimates, all in closed form.
struct BoundsLedger {
    double T = 0.0;            ///< time horizon the constants refer to
    double c_T = 0.0;          ///< Gauss lower bound  [min(-d_t phi) over [0,T]]^{1/alpha}
    double rho0 = 0.0;         ///< half the minimum of phi_inf
    double C1 = 0.0;           ///< (1/rho0) max{(max K_0)^alpha, ((na+1)/(na rho0))^{na}}
    double speed_bound = 0.0;  ///< C = C1 * max u_0, bound on -d_t u
    double k_upper = 0.0;      ///< (C + C_0)^{1/alpha}, bound on K
    double chi = 0.0;          ///< 1/(alpha c_T^alpha); makes alpha K^alpha chi >= 1
    double c0 = 0.0;           ///< sup K_Phi^alpha
};

BoundsLedger ledger(const ScalarField& u0, const Obstacle& obstacle, double alpha, double T);

struct CheckReport {
    std::string id;
    bool pass = false;
    double margin = 0.0;  ///< fail implies margin < 0
    long node = -1;
    double time = 0.0;
    std::map<std::string, double> constants;
};

/// -C0 - 1e-9 <= beta_delta(u - phi) <= 0 at every recorded node/time and step.
CheckReport check_penalty_bounds(const Trajectory& trajectory, double c0);

/// Forward differences of u - phi stay below 1e-8 per unit time, per node,
/// both across solver steps (running max) and across recorded snapshots.
CheckReport check_speed_monotone(const Trajectory& trajectory);

/// min K >= 0.95 c_T, max K <= 1.05 (C + C0)^{1/alpha}, max(-d_t u) <= C, and
/// the interior-maximum alternative for the speed quotient within 5%.
CheckReport check_gauss_bounds(const Trajectory& trajectory, const BoundsLedger& bounds);

/// Monitors W = e^{-chi beta} / lambda_min: no blow-up past 10x its initial
/// sup, plus the pointwise identity 1/lambda_min <= W.
CheckReport check_principal_bounds(const Trajectory& trajectory, const BoundsLedger& bounds,
                                   double chi);

/// h_ii / g_ii <= 1/lambda_min at every node (equality on round spheres).
CheckReport check_euler_formula(const ScalarField& u, const SphericalGrid& grid);

/// Default residual constant: fitted on shrinking-circle runs at N = 128 and
/// N = 256 and multiplied by 4 for headroom, so the check trips on bugs rather
/// than on discretization error.
inline constexpr double kResidualConstant = 26.0;

/// Residual of the support-function evolution identity over snapshot triples
/// in [t_lo, t_hi]: d_t u + K^alpha + beta must vanish to O(dt + h^2).
CheckReport check_evolution_residual(const Trajectory& trajectory, double t_lo, double t_hi,
                                     double c_res = kResidualConstant);

/// Raw sup of the evolution residual over the window (for refinement studies).
double evolution_residual_sup(const Trajectory& trajectory, double t_lo, double t_hi);

}  // namespace gcf
