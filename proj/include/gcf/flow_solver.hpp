#pragma once

#include <optional>
#include <vector>

#include "gcf/obstacle.hpp"
#include "gcf/penalty.hpp"
#include "gcf/sphere_geometry.hpp"

namespace gcf {

/// Snapshot of the penalized flow  -d_t u = K^alpha + beta_delta(u - phi).
struct FlowState {
    double t = 0.0;
    ScalarField u;
    double alpha = 1.0;
    ObstaclePtr obstacle;                    ///< null when the flow runs unobstructed
    std::optional<PenaltyFunction> penalty;  ///< present iff obstacle is present
    CurvatureBundle bundle;                  ///< curvatures of u (kept in sync)
    std::vector<double> phi, dphi;           ///< obstacle support and speed at t
};

FlowState make_state(ScalarField u0, double alpha, ObstaclePtr obstacle = nullptr,
                     std::optional<PenaltyFunction> penalty = std::nullopt, double t = 0.0);

/// Largest stable explicit step: 0.5 * min over nodes of
/// spacing^2 * r_min / (2 n alpha K^alpha), where r_min is the smallest
/// curvature radius (min eigenvalue of g^{-1} h, i.e. 1/lambda_max) and the
/// azimuthal spacing enters as h_psi * sin(theta).
double stable_dt(const FlowState& state);

/// One semi-implicit step: K^alpha frozen at the current state, the penalty
/// treated implicitly node by node with the obstacle evaluated at t + dt.
FlowState step(const FlowState& state, double dt);

struct TrajectoryRecord {
    double t = 0.0;
    std::vector<double> u;
    double min_K = 0.0, max_K = 0.0;
    double min_gap = 0.0;   ///< min(u - phi); min(u) when no obstacle
    double min_beta = 0.0;  ///< min beta_delta(u - phi); 0 when no obstacle
    double min_lambda = 0.0, max_lambda = 0.0;
    double max_speed = 0.0;  ///< max |d_t u| = max(K^alpha + beta)
};

struct Trajectory {
    GridPtr grid;
    double alpha = 1.0;
    double delta = 0.0;
    ObstaclePtr obstacle;
    std::optional<PenaltyFunction> penalty;
    std::vector<TrajectoryRecord> records;

    // Running extrema accumulated over every solver step (not just records).
    double max_gap_rate = 0.0;  ///< max over steps/nodes of d_t(u - phi), forward difference
    double max_u_rate = 0.0;    ///< max over steps/nodes of d_t u
    double min_beta_steps = 0.0;
    double min_gap_steps = 0.0;
    double min_K_steps = 0.0;
    double max_K_steps = 0.0;
    double max_dt_used = 0.0;
    double min_dt_used = 0.0;
    long step_count = 0;
};

/// Integrate to t_end recording snapshots every `cadence` time units (outputs
/// land exactly on the cadence grid; the last step is shortened).
Trajectory run(const ScalarField& u0, ObstaclePtr obstacle, double alpha, double delta,
               double t_end, double cadence, PenaltyVariant variant = PenaltyVariant::C11);

struct ContinuationResult {
    std::vector<double> schedule;
    std::vector<Trajectory> trajectories;
    std::vector<double> pairwise_distance;  ///< sup |u^{d_k} - u^{d_{k+1}}| over matched records
    std::vector<double> complementarity;    ///< residual of min{d_t u + K^alpha, u - phi} per run
};

ContinuationResult continuation(const ScalarField& u0, ObstaclePtr obstacle, double alpha,
                                const std::vector<double>& schedule, double t_end, double cadence,
                                PenaltyVariant variant = PenaltyVariant::C11);

struct CoincidenceResult {
    std::optional<double> detected;  ///< first recorded time with sup|u - phi| <= tol
    double t_star = 0.0;             ///< certified coincidence bound (||u0||_inf + rho)^{na+1}/(na+1)
    double rho = 0.0;                ///< enclosing-ball radius bound of Phi_0
};

CoincidenceResult detect_coincidence_time(const Trajectory& trajectory, const Obstacle& obstacle,
                                          double tol);

/// Max over interior records and nodes of |min{d_t u + K^alpha, u - phi}|,
/// with d_t u by centered differences over the record times.
double complementarity_residual(const Trajectory& trajectory);

/// Per-node scalar solve for the implicit penalty step (exposed for tests).
/// Solves x + dt*beta_delta(x - phi_next) = x_explicit by safeguarded Newton.
double solve_penalized_node(double x_explicit, double phi_next, double dt,
                            const PenaltyFunction& penalty, int* iterations = nullptr);

}  // namespace gcf
