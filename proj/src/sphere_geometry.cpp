#include "gcf/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gcf {

namespace {

constexpr double kPi = std::numbers::pi;

void require_compatible(const ScalarField& f, const SphericalGrid& grid) {
    if (!f.grid() || !f.grid()->compatible(grid))
        throw Error(ErrorCode::GridMismatch, "scalar field does not live on this grid");
}

void require_compatible(const SymTensorField& f, const SphericalGrid& grid) {
    if (!f.grid() || !f.grid()->compatible(grid))
        throw Error(ErrorCode::GridMismatch, "tensor field does not live on this grid");
}

// Tensor-component ghost fetch across the poles. Crossing a pole flips the
// coordinate theta-direction, so the mixed component changes sign.
double tensor_at(const SymTensorField& h, const SphericalGrid& g, int i, int j, int comp) {
    const int np = g.n_psi();
    if (j < 0) j += np;
    if (j >= np) j -= np;
    double sign = 1.0;
    if (i < 0) {
        i = -1 - i;
        j = (j + np / 2) % np;
        if (comp == 1) sign = -1.0;
    } else if (i >= g.n_theta()) {
        i = 2 * g.n_theta() - 1 - i;
        j = (j + np / 2) % np;
        if (comp == 1) sign = -1.0;
    }
    return sign * h.at(g.node_index(i, j), comp);
}

}  // namespace

GridPtr build_grid(int dim, int res_theta, int res_psi) {
    if (dim != 1 && dim != 2)
        throw Error(ErrorCode::UnsupportedDimension, "only n = 1 and n = 2 are supported");

    auto grid = std::shared_ptr<SphericalGrid>(new SphericalGrid());
    grid->dim_ = dim;
    if (dim == 1) {
        if (res_theta < 8)
            throw Error(ErrorCode::ResolutionTooSmall, "need at least 8 nodes per period");
        grid->n_theta_ = res_theta;
        grid->n_psi_ = 1;
        grid->h_theta_ = 2.0 * kPi / res_theta;
        grid->theta_.resize(res_theta);
        grid->sin_theta_.assign(res_theta, 0.0);
        grid->cos_theta_.assign(res_theta, 0.0);
        grid->cot_theta_.assign(res_theta, 0.0);
        grid->spacing_sq_.assign(res_theta, grid->h_theta_ * grid->h_theta_);
        for (int k = 0; k < res_theta; ++k) {
            grid->theta_[k] = grid->h_theta_ * k;
            grid->sin_theta_[k] = std::sin(grid->theta_[k]);
            grid->cos_theta_[k] = std::cos(grid->theta_[k]);
        }
        grid->psi_.assign(1, 0.0);
        const double sh = std::sin(grid->h_theta_);
        const double sh2 = std::sin(0.5 * grid->h_theta_);
        grid->inv_two_sin_ht_ = 1.0 / (2.0 * sh);
        grid->inv_four_sinsq_ht2_ = 1.0 / (4.0 * sh2 * sh2);
    } else {
        if (res_theta < 8 || res_psi < 8)
            throw Error(ErrorCode::ResolutionTooSmall, "need at least 8 nodes per period");
        if (res_psi % 2 != 0)
            throw Error(ErrorCode::ResolutionTooSmall,
                        "azimuthal resolution must be even for the pole rule");
        grid->n_theta_ = res_theta;
        grid->n_psi_ = res_psi;
        grid->h_theta_ = kPi / res_theta;
        grid->h_psi_ = 2.0 * kPi / res_psi;
        grid->theta_.resize(res_theta);
        grid->sin_theta_.resize(res_theta);
        grid->cos_theta_.resize(res_theta);
        grid->cot_theta_.resize(res_theta);
        grid->spacing_sq_.resize(res_theta);
        for (int i = 0; i < res_theta; ++i) {
            grid->theta_[i] = (i + 0.5) * grid->h_theta_;
            grid->sin_theta_[i] = std::sin(grid->theta_[i]);
            grid->cos_theta_[i] = std::cos(grid->theta_[i]);
            grid->cot_theta_[i] = grid->cos_theta_[i] / grid->sin_theta_[i];
            const double az = grid->h_psi_ * grid->sin_theta_[i];
            grid->spacing_sq_[i] = std::min(grid->h_theta_ * grid->h_theta_, az * az);
        }
        grid->psi_.resize(res_psi);
        for (int j = 0; j < res_psi; ++j) grid->psi_[j] = grid->h_psi_ * j;
        const double sht = std::sin(grid->h_theta_);
        const double sht2 = std::sin(0.5 * grid->h_theta_);
        const double shp = std::sin(grid->h_psi_);
        const double shp2 = std::sin(0.5 * grid->h_psi_);
        grid->inv_two_sin_ht_ = 1.0 / (2.0 * sht);
        grid->inv_two_sin_hp_ = 1.0 / (2.0 * shp);
        grid->inv_four_sinsq_ht2_ = 1.0 / (4.0 * sht2 * sht2);
        grid->inv_four_sinsq_hp2_ = 1.0 / (4.0 * shp2 * shp2);
        grid->inv_four_sin_ht_sin_hp_ = 1.0 / (4.0 * sht * shp);
        // Divisor of the 5-point first derivative, exact on first harmonics:
        // applying the stencil to sin(theta) yields cos(theta)*(16 sin h - 2 sin 2h).
        grid->inv_five_point_ht_ = 1.0 / (16.0 * sht - 2.0 * std::sin(2.0 * grid->h_theta_));
    }
    return grid;
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->node_count())
        throw Error(ErrorCode::GridMismatch, "value count does not match grid node count");
}

SymTensorField covariant_hessian(const ScalarField& u, const SphericalGrid& grid) {
    require_compatible(u, grid);
    SymTensorField out(u.grid());
    const auto vals = u.values();
    if (grid.dim() == 1) {
        for (int k = 0; k < grid.n_theta(); ++k)
            out.at(k, 0) = detail::hessian_node1(vals, grid, k);
        return out;
    }
    for (int i = 0; i < grid.n_theta(); ++i) {
        for (int j = 0; j < grid.n_psi(); ++j) {
            const auto h = detail::hessian_node2(vals, grid, i, j);
            const std::size_t node = grid.node_index(i, j);
            out.at(node, 0) = h.tt;
            out.at(node, 1) = h.tp;
            out.at(node, 2) = h.pp;
        }
    }
    return out;
}

SymTensorField second_fundamental_form(const ScalarField& u, const SphericalGrid& grid) {
    require_compatible(u, grid);
    SymTensorField h = covariant_hessian(u, grid);
    const std::size_t n = grid.node_count();
    if (grid.dim() == 1) {
        for (std::size_t k = 0; k < n; ++k) h.at(k, 0) += u[k];
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            h.at(k, 0) += u[k];
            h.at(k, 2) += u[k] * grid.metric_det(k);
        }
    }
    return h;
}

CurvatureBundle curvatures(const SymTensorField& h, const SphericalGrid& grid) {
    require_compatible(h, grid);
    CurvatureBundle out;
    out.dim = grid.dim();
    out.K = ScalarField(h.grid());
    out.H = ScalarField(h.grid());
    out.lambda.resize(grid.node_count() * grid.dim());
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const double tt = h.at(node, 0);
        const double tp = grid.dim() == 2 ? h.at(node, 1) : 0.0;
        const double pp = grid.dim() == 2 ? h.at(node, 2) : 0.0;
        const double st = grid.dim() == 2 ? grid.ring_sin(grid.ring_of(node)) : 1.0;
        const auto c = detail::curvature_node(grid.dim(), tt, tp, pp, st);
        if (!c.convex)
            throw Error(ErrorCode::NotConvex, "second fundamental form not positive definite",
                        static_cast<long>(node));
        out.K[node] = c.K;
        out.H[node] = c.H;
        out.lambda[node * grid.dim()] = c.lam_min;
        if (grid.dim() == 2) out.lambda[node * grid.dim() + 1] = c.lam_max;
    }
    return out;
}

std::vector<Point3> embed(const ScalarField& u, const SphericalGrid& grid) {
    require_compatible(u, grid);
    std::vector<Point3> pts(grid.node_count());
    const auto vals = u.values();
    if (grid.dim() == 1) {
        const int n = grid.n_theta();
        for (int k = 0; k < n; ++k) {
            const double du = (vals[(k + 1) % n] - vals[(k + n - 1) % n]) * grid.inv_two_sin_ht();
            const double ct = grid.ring_cos(k);
            const double st = grid.ring_sin(k);
            pts[k].x = vals[k] * ct - du * st;
            pts[k].y = vals[k] * st + du * ct;
        }
        return pts;
    }
    for (int i = 0; i < grid.n_theta(); ++i) {
        const double st = grid.ring_sin(i);
        const double ct = grid.ring_cos(i);
        for (int j = 0; j < grid.n_psi(); ++j) {
            const std::size_t node = grid.node_index(i, j);
            const double cp = std::cos(grid.psi(node));
            const double sp = std::sin(grid.psi(node));
            const double dt =
                (detail::scalar_at(vals, grid, i + 1, j) - detail::scalar_at(vals, grid, i - 1, j)) *
                grid.inv_two_sin_ht();
            const double dp =
                (detail::scalar_at(vals, grid, i, j + 1) - detail::scalar_at(vals, grid, i, j - 1)) *
                grid.inv_two_sin_hp();
            // X = (d_theta u) e_theta + (d_psi u / sin theta) e_psi + u z
            const double etx = ct * cp, ety = ct * sp, etz = -st;
            const double epx = -sp, epy = cp;
            const double zx = st * cp, zy = st * sp, zz = ct;
            const double a = dt;
            const double b = dp / st;
            pts[node].x = a * etx + b * epx + vals[node] * zx;
            pts[node].y = a * ety + b * epy + vals[node] * zy;
            pts[node].z = a * etz + vals[node] * zz;
        }
    }
    return pts;
}

double codazzi_residual(const ScalarField& u, const SphericalGrid& grid) {
    require_compatible(u, grid);
    if (grid.dim() == 1) return 0.0;  // single index: nothing to compare

    // Differentiate h = T + u*g through its parts: the Hessian T is handled
    // discretely while nabla(u g) = (du) g is added in closed form. The split
    // keeps the residual exactly zero for round spheres, where T vanishes
    // identically on the grid.
    const SymTensorField t = covariant_hessian(u, grid);
    const auto vals = u.values();
    double worst = 0.0;
    for (int i = 0; i < grid.n_theta(); ++i) {
        const double cot = grid.ring_cot(i);
        const double sc = grid.ring_sin(i) * grid.ring_cos(i);
        const double g22 = grid.g_psipsi(i);
        for (int j = 0; j < grid.n_psi(); ++j) {
            const std::size_t node = grid.node_index(i, j);
            const double t11 = t.at(node, 0);
            const double t12 = t.at(node, 1);
            const double t22 = t.at(node, 2);

            const double du_t =
                (detail::scalar_at(vals, grid, i + 1, j) - detail::scalar_at(vals, grid, i - 1, j)) *
                grid.inv_two_sin_ht();
            const double du_p =
                (detail::scalar_at(vals, grid, i, j + 1) - detail::scalar_at(vals, grid, i, j - 1)) *
                grid.inv_two_sin_hp();

            const double d1t12 =
                (tensor_at(t, grid, i + 1, j, 1) - tensor_at(t, grid, i - 1, j, 1)) *
                grid.inv_two_sin_ht();
            const double d1t22 =
                (tensor_at(t, grid, i + 1, j, 2) - tensor_at(t, grid, i - 1, j, 2)) *
                grid.inv_two_sin_ht();
            const double d2t11 =
                (tensor_at(t, grid, i, j + 1, 0) - tensor_at(t, grid, i, j - 1, 0)) *
                grid.inv_two_sin_hp();
            const double d2t12 =
                (tensor_at(t, grid, i, j + 1, 1) - tensor_at(t, grid, i, j - 1, 1)) *
                grid.inv_two_sin_hp();

            // Covariant derivatives of h with the S^2 Christoffel correction.
            const double cd1_h12 = d1t12 - cot * t12;
            const double cd1_h22 = d1t22 - 2.0 * cot * t22 + du_t * g22;
            const double cd2_h11 = d2t11 - 2.0 * cot * t12 + du_p;
            const double cd2_h12 = d2t12 - cot * t22 + sc * t11;

            worst = std::max(worst, std::abs(cd1_h22 - cd2_h12));
            worst = std::max(worst, std::abs(cd2_h11 - cd1_h12));
        }
    }
    return worst;
}

double sup_gradient_norm(const ScalarField& u, const SphericalGrid& grid) {
    require_compatible(u, grid);
    const auto vals = u.values();
    double worst = 0.0;
    if (grid.dim() == 1) {
        const int n = grid.n_theta();
        for (int k = 0; k < n; ++k) {
            const double du = (vals[(k + 1) % n] - vals[(k + n - 1) % n]) * grid.inv_two_sin_ht();
            worst = std::max(worst, std::abs(du));
        }
        return worst;
    }
    for (int i = 0; i < grid.n_theta(); ++i) {
        for (int j = 0; j < grid.n_psi(); ++j) {
            const double dt =
                (detail::scalar_at(vals, grid, i + 1, j) - detail::scalar_at(vals, grid, i - 1, j)) *
                grid.inv_two_sin_ht();
            const double dp =
                (detail::scalar_at(vals, grid, i, j + 1) - detail::scalar_at(vals, grid, i, j - 1)) *
                grid.inv_two_sin_hp();
            const double gp = dp / grid.ring_sin(i);
            worst = std::max(worst, std::sqrt(dt * dt + gp * gp));
        }
    }
    return worst;
}

}  // namespace gcf
