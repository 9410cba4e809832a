#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gcf/errors.hpp"

namespace gcf {

/// Structured grid on the unit sphere of directions.
///
/// n=1: N nodes at theta_k = 2*pi*k/N on the circle, metric == 1.
/// n=2: latitude-longitude grid with half-offset colatitudes
///      theta_i = (i+1/2)*pi/n_theta (no node sits on a pole) and periodic
///      azimuths psi_j = 2*pi*j/n_psi; metric diag(1, sin^2 theta).
///
/// Colatitude stencils at the first/last ring use antipodal continuation:
/// the ghost value across a pole at azimuth psi is the ring-0 (resp. last
/// ring) value at azimuth psi + pi. Requires n_psi even.
///
/// First/second/mixed differences use trigonometrically exact divisors
/// (2*sin h, 4*sin^2(h/2), 4*sin(h_t)*sin(h_p)); these are second-order
/// consistent and exact on first spherical harmonics, which makes the
/// translation identities of support functions hold at rounding level.
class SphericalGrid {
public:
    int dim() const { return dim_; }
    int n_theta() const { return n_theta_; }
    int n_psi() const { return n_psi_; }
    std::size_t node_count() const { return static_cast<std::size_t>(n_theta_) * n_psi_; }

    double h_theta() const { return h_theta_; }
    double h_psi() const { return h_psi_; }

    std::size_t node_index(int i, int j) const {
        return static_cast<std::size_t>(i) * n_psi_ + j;
    }
    int ring_of(std::size_t node) const { return static_cast<int>(node / n_psi_); }
    int azimuth_of(std::size_t node) const { return static_cast<int>(node % n_psi_); }

    double theta(std::size_t node) const { return theta_[ring_of(node)]; }
    double psi(std::size_t node) const { return psi_[azimuth_of(node)]; }

    double ring_theta(int i) const { return theta_[i]; }
    double ring_sin(int i) const { return sin_theta_[i]; }
    double ring_cos(int i) const { return cos_theta_[i]; }
    double ring_cot(int i) const { return cot_theta_[i]; }

    /// det of the round metric at a node: 1 (n=1) or sin^2 theta (n=2).
    double metric_det(std::size_t node) const {
        return dim_ == 1 ? 1.0 : sin_theta_[ring_of(node)] * sin_theta_[ring_of(node)];
    }
    double g_psipsi(int ring) const { return sin_theta_[ring] * sin_theta_[ring]; }

    /// Squared CFL spacing at a ring: h^2 (n=1), min(h_theta, h_psi*sin theta)^2 (n=2).
    double spacing_sq(int ring) const { return spacing_sq_[ring]; }

    // Stencil divisors (trig-exact).
    double inv_two_sin_ht() const { return inv_two_sin_ht_; }
    double inv_two_sin_hp() const { return inv_two_sin_hp_; }
    double inv_four_sinsq_ht2() const { return inv_four_sinsq_ht2_; }
    double inv_four_sinsq_hp2() const { return inv_four_sinsq_hp2_; }
    double inv_four_sin_ht_sin_hp() const { return inv_four_sin_ht_sin_hp_; }
    double inv_five_point_ht() const { return inv_five_point_ht_; }

    bool compatible(const SphericalGrid& other) const {
        return dim_ == other.dim_ && n_theta_ == other.n_theta_ && n_psi_ == other.n_psi_;
    }

    friend std::shared_ptr<const SphericalGrid> build_grid(int dim, int res_theta, int res_psi);

private:
    SphericalGrid() = default;

    int dim_ = 0;
    int n_theta_ = 0;
    int n_psi_ = 1;
    double h_theta_ = 0.0;
    double h_psi_ = 0.0;
    double inv_two_sin_ht_ = 0.0;
    double inv_two_sin_hp_ = 0.0;
    double inv_four_sinsq_ht2_ = 0.0;
    double inv_four_sinsq_hp2_ = 0.0;
    double inv_four_sin_ht_sin_hp_ = 0.0;
    double inv_five_point_ht_ = 0.0;
    std::vector<double> theta_;
    std::vector<double> psi_;
    std::vector<double> sin_theta_;
    std::vector<double> cos_theta_;
    std::vector<double> cot_theta_;
    std::vector<double> spacing_sq_;
};

using GridPtr = std::shared_ptr<const SphericalGrid>;

/// n=1: build_grid(1, N). n=2: build_grid(2, n_theta, n_psi), n_psi even.
GridPtr build_grid(int dim, int res_theta, int res_psi = 0);

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), values_(grid_->node_count(), fill) {}
    ScalarField(GridPtr grid, std::vector<double> values);

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    std::vector<double>& raw() { return values_; }
    const std::vector<double>& raw() const { return values_; }
    const GridPtr& grid() const { return grid_; }
    bool empty() const { return values_.empty(); }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Symmetric n x n tensor per node; upper triangle stored
/// (1 component for n=1, [tt, tp, pp] for n=2).
class SymTensorField {
public:
    SymTensorField() = default;
    explicit SymTensorField(GridPtr grid)
        : grid_(std::move(grid)),
          comps_(grid_->dim() == 1 ? 1 : 3),
          values_(grid_->node_count() * comps_, 0.0) {}

    int components() const { return comps_; }
    double& at(std::size_t node, int c) { return values_[node * comps_ + c]; }
    double at(std::size_t node, int c) const { return values_[node * comps_ + c]; }
    const GridPtr& grid() const { return grid_; }
    std::size_t node_count() const { return values_.size() / comps_; }

private:
    GridPtr grid_;
    int comps_ = 1;
    std::vector<double> values_;
};

struct CurvatureBundle {
    ScalarField K;               ///< Gauss curvature per node
    ScalarField H;               ///< mean curvature per node
    std::vector<double> lambda;  ///< node*dim principal curvatures, ascending
    int dim = 1;

    double lambda_min(std::size_t node) const { return lambda[node * dim]; }
    double lambda_max(std::size_t node) const { return lambda[node * dim + dim - 1]; }
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

SymTensorField covariant_hessian(const ScalarField& u, const SphericalGrid& grid);
SymTensorField second_fundamental_form(const ScalarField& u, const SphericalGrid& grid);
CurvatureBundle curvatures(const SymTensorField& h, const SphericalGrid& grid);
std::vector<Point3> embed(const ScalarField& u, const SphericalGrid& grid);

/// Max over nodes and index triples of the Codazzi defect |nabla_k h_ij - nabla_i h_kj|
/// for h = h(u). Returns 0 for n=1 by convention.
double codazzi_residual(const ScalarField& u, const SphericalGrid& grid);

/// Sup-norm of the round gradient, max_z |grad u|; used for enclosing-radius bounds.
double sup_gradient_norm(const ScalarField& u, const SphericalGrid& grid);

namespace detail {

// Scalar ghost fetch with antipodal continuation across the poles (n=2).
inline double scalar_at(std::span<const double> u, const SphericalGrid& g, int i, int j) {
    const int np = g.n_psi();
    if (j < 0) j += np;
    if (j >= np) j -= np;
    if (i < 0) {
        i = -1 - i;
        j = (j + np / 2) % np;
    } else if (i >= g.n_theta()) {
        i = 2 * g.n_theta() - 1 - i;
        j = (j + np / 2) % np;
    }
    return u[g.node_index(i, j)];
}

struct HessComps {
    double tt = 0.0;
    double tp = 0.0;
    double pp = 0.0;
};

// Covariant Hessian of u at node (i, j) of an n=2 grid. Theta-derivatives that
// end up cot- or metric-weighted (the mixed term and the psi-psi term) use a
// 4th-order stencil: near the poles those weights are O(1/h) relative to the
// sin^2(theta)-sized metric components, so a plain O(h^2) stencil error would
// cost a full order of accuracy.
inline HessComps hessian_node2(std::span<const double> u, const SphericalGrid& g, int i, int j) {
    const double c = u[g.node_index(i, j)];
    const double up = scalar_at(u, g, i + 1, j);
    const double dn = scalar_at(u, g, i - 1, j);
    const double rt = scalar_at(u, g, i, j + 1);
    const double lf = scalar_at(u, g, i, j - 1);
    const double up2 = scalar_at(u, g, i + 2, j);
    const double dn2 = scalar_at(u, g, i - 2, j);

    const double dp = (rt - lf) * g.inv_two_sin_hp();
    const double dtt = (up - 2.0 * c + dn) * g.inv_four_sinsq_ht2();
    const double dpp = (rt - 2.0 * c + lf) * g.inv_four_sinsq_hp2();
    const double dt4 = (-up2 + 8.0 * (up - dn) + dn2) * g.inv_five_point_ht();

    const auto dpsi_on_ring = [&](int ring) {
        return (scalar_at(u, g, ring, j + 1) - scalar_at(u, g, ring, j - 1)) * g.inv_two_sin_hp();
    };
    const double dtp = (-dpsi_on_ring(i + 2) + 8.0 * (dpsi_on_ring(i + 1) - dpsi_on_ring(i - 1)) +
                        dpsi_on_ring(i - 2)) *
                       g.inv_five_point_ht();

    HessComps h;
    h.tt = dtt;
    h.tp = dtp - g.ring_cot(i) * dp;
    h.pp = dpp + g.ring_sin(i) * g.ring_cos(i) * dt4;
    return h;
}

// u'' on the circle grid.
inline double hessian_node1(std::span<const double> u, const SphericalGrid& g, int k) {
    const int n = g.n_theta();
    const double up = u[(k + 1) % n];
    const double dn = u[(k + n - 1) % n];
    return (up - 2.0 * u[k] + dn) * g.inv_four_sinsq_ht2();
}

struct CurvNode {
    double K = 0.0;
    double H = 0.0;
    double lam_min = 0.0;
    double lam_max = 0.0;
    double radius_min = 0.0;  ///< min eigenvalue of g^{-1} h (smallest curvature radius)
    bool convex = false;
};

// Curvatures from the second fundamental form components at one node.
inline CurvNode curvature_node(int dim, double h_tt, double h_tp, double h_pp, double sin_theta) {
    CurvNode out;
    if (dim == 1) {
        if (!(h_tt > 0.0)) return out;
        out.convex = true;
        out.K = 1.0 / h_tt;
        out.H = out.K;
        out.lam_min = out.lam_max = out.K;
        out.radius_min = h_tt;
        return out;
    }
    const double detg = sin_theta * sin_theta;
    const double deth = h_tt * h_pp - h_tp * h_tp;
    if (!(h_tt > 0.0) || !(deth > 0.0)) return out;
    out.convex = true;
    // Eigenvalues of g^{-1} h are the curvature radii; closed-form 2x2 solve.
    // The discriminant is assembled as a sum of squares so near-umbilic nodes
    // do not suffer tr^2 - 4 det cancellation.
    const double tr = h_tt + h_pp / detg;
    const double det = deth / detg;
    const double diff = h_tt - h_pp / detg;
    const double off = h_tp / sin_theta;
    const double disc = diff * diff + 4.0 * off * off;
    const double root = std::sqrt(disc);
    const double r_big = 0.5 * (tr + root);
    const double r_small = det / r_big;  // avoids cancellation for r_small
    out.radius_min = r_small;
    out.lam_min = 1.0 / r_big;
    out.lam_max = 1.0 / r_small;
    out.H = out.lam_min + out.lam_max;
    out.K = detg / deth;
    return out;
}

inline double pow_alpha(double base, double alpha) {
    if (alpha == 1.0) return base;
    if (alpha == 0.5) return std::sqrt(base);
    if (alpha == 2.0) return base * base;
    return std::pow(base, alpha);
}

}  // namespace detail

}  // namespace gcf
