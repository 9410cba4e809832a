#include "gcf/free_boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gcf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a <= -kPi) a += 2.0 * kPi;
    return a;
}

struct Frame {
    Point3 zc, e1, e2;
};

Frame make_frame(int dim, double theta_c, double psi_c) {
    Frame f;
    if (dim == 1) {
        f.zc = {std::cos(theta_c), std::sin(theta_c), 0.0};
        f.e1 = {-std::sin(theta_c), std::cos(theta_c), 0.0};
        f.e2 = {0.0, 0.0, 1.0};
    } else {
        const double st = std::sin(theta_c), ct = std::cos(theta_c);
        const double sp = std::sin(psi_c), cp = std::cos(psi_c);
        f.zc = {st * cp, st * sp, ct};
        f.e1 = {ct * cp, ct * sp, -st};
        f.e2 = {-sp, cp, 0.0};
    }
    return f;
}

double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Heights of a convex curve over the tangent line at direction theta_c,
// sampled at the requested offsets; height measured along -z_c (inward).
void graph_heights_1d(const std::vector<Point3>& pts, const SphericalGrid& grid, const Frame& fr,
                      double theta_c, double origin_h, double r_patch,
                      const std::vector<double>& xs, double* out) {
    std::vector<double> xi, eta;
    xi.reserve(pts.size());
    eta.reserve(pts.size());
    // Collect the arc of nodes whose normals lie within 83 degrees of z_c,
    // ordered by wrapped angle; along it the tangent coordinate is monotone.
    const int n = grid.n_theta();
    const int kc = static_cast<int>(std::llround(theta_c / grid.h_theta())) % n;
    const int reach = static_cast<int>(1.45 / grid.h_theta());
    for (int d = -reach; d <= reach; ++d) {
        const int k = ((kc + d) % n + n) % n;
        const Point3& p = pts[k];
        xi.push_back(p.x * fr.e1.x + p.y * fr.e1.y - 0.0);
        eta.push_back(p.x * fr.zc.x + p.y * fr.zc.y - origin_h);
        if (xi.size() > 1 && !(xi.back() > xi[xi.size() - 2]))
            throw Error(ErrorCode::NotGraphable, "projected boundary is not monotone over the frame");
    }
    if (xi.front() > -r_patch || xi.back() < r_patch)
        throw Error(ErrorCode::NotGraphable, "patch box exceeds the graphable arc");
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        const double x = xs[ix];
        auto it = std::lower_bound(xi.begin(), xi.end(), x);
        const std::size_t hi = std::max<std::size_t>(1, it - xi.begin());
        const std::size_t lo = hi - 1;
        const double s = (x - xi[lo]) / (xi[hi] - xi[lo]);
        out[ix] = -(eta[lo] + s * (eta[hi] - eta[lo]));  // inward height
    }
}

// 2-d inverse projection: walk the structured (ring, azimuth) parameter grid
// with Newton steps on the bilinear interpolant of the projected coordinates.
struct Projected {
    std::vector<double> x1, x2, eta;
    std::vector<std::uint8_t> usable;
};

Projected project_cloud(const std::vector<Point3>& pts, const SphericalGrid& grid, const Frame& fr,
                        double origin_h) {
    Projected pr;
    const std::size_t n = grid.node_count();
    pr.x1.resize(n);
    pr.x2.resize(n);
    pr.eta.resize(n);
    pr.usable.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double th = grid.theta(k), ps = grid.psi(k);
        const Point3 z{std::sin(th) * std::cos(ps), std::sin(th) * std::sin(ps), std::cos(th)};
        pr.usable[k] = dot(z, fr.zc) >= 0.25 ? 1 : 0;
        pr.x1[k] = dot(pts[k], fr.e1);
        pr.x2[k] = dot(pts[k], fr.e2);
        pr.eta[k] = dot(pts[k], fr.zc) - origin_h;
    }
    return pr;
}

void graph_heights_2d(const Projected& pr, const SphericalGrid& grid, double x1, double x2,
                      double& a_seed, double& b_seed, double* height_out) {
    const int nt = grid.n_theta(), np = grid.n_psi();
    auto value = [&](const std::vector<double>& f, double a, double b) {
        const int i0 = std::clamp(static_cast<int>(std::floor(a)), 0, nt - 2);
        int j0 = static_cast<int>(std::floor(b));
        const double fa = a - i0, fb = b - j0;
        j0 = ((j0 % np) + np) % np;
        const int j1 = (j0 + 1) % np;
        const double f00 = f[grid.node_index(i0, j0)], f01 = f[grid.node_index(i0, j1)];
        const double f10 = f[grid.node_index(i0 + 1, j0)], f11 = f[grid.node_index(i0 + 1, j1)];
        return std::array<double, 3>{
            f00 * (1 - fa) * (1 - fb) + f10 * fa * (1 - fb) + f01 * (1 - fa) * fb + f11 * fa * fb,
            (f10 - f00) * (1 - fb) + (f11 - f01) * fb,   // d/da
            (f01 - f00) * (1 - fa) + (f11 - f10) * fa};  // d/db
    };
    double a = a_seed, b = b_seed;
    bool ok = false;
    for (int it = 0; it < 80; ++it) {
        const auto v1 = value(pr.x1, a, b);
        const auto v2 = value(pr.x2, a, b);
        const double r1 = v1[0] - x1, r2 = v2[0] - x2;
        if (std::abs(r1) + std::abs(r2) < 1e-12) {
            ok = true;
            break;
        }
        const double det = v1[1] * v2[2] - v1[2] * v2[1];
        if (std::abs(det) < 1e-14) break;
        double da = (-r1 * v2[2] + r2 * v1[2]) / det;
        double db = (-r2 * v1[1] + r1 * v2[1]) / det;
        const double lim = 1.5;
        da = std::clamp(da, -lim, lim);
        db = std::clamp(db, -lim, lim);
        a = std::clamp(a + da, 0.0, nt - 1.0);
        b += db;
        if (std::abs(da) + std::abs(db) < 1e-13) {
            ok = std::abs(r1) + std::abs(r2) < 1e-9;
            break;
        }
    }
    if (!ok) throw Error(ErrorCode::NotGraphable, "inverse projection did not converge");
    const int ia = std::clamp(static_cast<int>(std::llround(a)), 0, nt - 1);
    const int jb = ((static_cast<int>(std::llround(b)) % np) + np) % np;
    if (!pr.usable[grid.node_index(ia, jb)])
        throw Error(ErrorCode::NotGraphable, "patch box exceeds the graphable cap");
    a_seed = a;
    b_seed = b;
    *height_out = -value(pr.eta, a, b)[0];
}

double interp_field_at_direction(const std::vector<double>& field, const SphericalGrid& grid,
                                 double theta_c, double psi_c) {
    if (grid.dim() == 1) {
        const double pos = theta_c / grid.h_theta();
        const int k0 = static_cast<int>(std::floor(pos));
        const double s = pos - k0;
        const int n = grid.n_theta();
        const int a = ((k0 % n) + n) % n, b = (a + 1) % n;
        return field[a] * (1 - s) + field[b] * s;
    }
    const int i = std::clamp(static_cast<int>(std::llround(theta_c / grid.h_theta() - 0.5)), 0,
                             grid.n_theta() - 1);
    const int j =
        ((static_cast<int>(std::llround(psi_c / grid.h_psi())) % grid.n_psi()) + grid.n_psi()) %
        grid.n_psi();
    return field[grid.node_index(i, j)];
}

// Centered/one-sided interpolation and derivative helpers over the patch box.
struct PatchStencil {
    const GraphPatch& p;
    const std::vector<double>& f;
    std::size_t s;

    double at(int ix, int iy) const { return f[p.index(s, p.cell_of(ix, iy))]; }
    double dx1(int ix, int iy) const {
        const double h = p.cell_size();
        if (ix == 0) return (at(1, iy) - at(0, iy)) / h;
        if (ix == p.m - 1) return (at(ix, iy) - at(ix - 1, iy)) / h;
        return (at(ix + 1, iy) - at(ix - 1, iy)) / (2.0 * h);
    }
    double dx2(int ix, int iy) const {
        const double h = p.cell_size();
        if (iy == 0) return (at(ix, 1) - at(ix, 0)) / h;
        if (iy == p.m - 1) return (at(ix, iy) - at(ix, iy - 1)) / h;
        return (at(ix, iy + 1) - at(ix, iy - 1)) / (2.0 * h);
    }
    double dxx(int ix, int iy) const {
        const double h = p.cell_size();
        const int i = std::clamp(ix, 1, p.m - 2);
        return (at(i + 1, iy) - 2.0 * at(i, iy) + at(i - 1, iy)) / (h * h);
    }
    double dyy(int ix, int iy) const {
        const double h = p.cell_size();
        const int i = std::clamp(iy, 1, p.m - 2);
        return (at(ix, i + 1) - 2.0 * at(ix, i) + at(ix, i - 1)) / (h * h);
    }
    double dxy(int ix, int iy) const {
        const double h = p.cell_size();
        const int i = std::clamp(ix, 1, p.m - 2);
        const int j = std::clamp(iy, 1, p.m - 2);
        return (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) /
               (4.0 * h * h);
    }
};

double time_derivative(const GraphPatch& p, const std::vector<double>& f, std::size_t s,
                       std::size_t cell) {
    const std::size_t last = p.times.size() - 1;
    if (s == 0)
        return (f[p.index(1, cell)] - f[p.index(0, cell)]) / (p.times[1] - p.times[0]);
    if (s == last)
        return (f[p.index(last, cell)] - f[p.index(last - 1, cell)]) /
               (p.times[last] - p.times[last - 1]);
    return (f[p.index(s + 1, cell)] - f[p.index(s - 1, cell)]) / (p.times[s + 1] - p.times[s - 1]);
}

// Bilinear (space) and linear (time) sampling of a patch field.
double sample_field(const GraphPatch& p, const std::vector<double>& f, double x1, double x2,
                    double t) {
    if (x1 < p.xs.front() - 1e-12 || x1 > p.xs.back() + 1e-12 || t < p.times.front() - 1e-12 ||
        t > p.times.back() + 1e-12)
        throw Error(ErrorCode::OutOfPatch, "sample point outside the patch box");
    if (p.sdim == 2 && (x2 < p.xs.front() - 1e-12 || x2 > p.xs.back() + 1e-12))
        throw Error(ErrorCode::OutOfPatch, "sample point outside the patch box");

    const auto locate = [&](double x) {
        const double h = p.cell_size();
        int i = static_cast<int>(std::floor((x - p.xs.front()) / h));
        i = std::clamp(i, 0, p.m - 2);
        return std::pair<int, double>{i, std::clamp((x - p.xs[i]) / h, 0.0, 1.0)};
    };
    auto ts = std::upper_bound(p.times.begin(), p.times.end(), t);
    std::size_t s1 = std::clamp<std::size_t>(ts - p.times.begin(), 1, p.times.size() - 1);
    const std::size_t s0 = s1 - 1;
    const double ft = std::clamp((t - p.times[s0]) / (p.times[s1] - p.times[s0]), 0.0, 1.0);

    const auto [i, fx] = locate(x1);
    auto space_sample = [&](std::size_t s) {
        if (p.sdim == 1) {
            return f[p.index(s, i)] * (1 - fx) + f[p.index(s, i + 1)] * fx;
        }
        const auto [j, fy] = locate(x2);
        const double f00 = f[p.index(s, p.cell_of(i, j))];
        const double f10 = f[p.index(s, p.cell_of(i + 1, j))];
        const double f01 = f[p.index(s, p.cell_of(i, j + 1))];
        const double f11 = f[p.index(s, p.cell_of(i + 1, j + 1))];
        return f00 * (1 - fx) * (1 - fy) + f10 * fx * (1 - fy) + f01 * (1 - fx) * fy +
               f11 * fx * fy;
    };
    return space_sample(s0) * (1 - ft) + space_sample(s1) * ft;
}

double sample_phys_v(const GraphPatch& p, double x1, double x2, double t) {
    return p.v_offset + p.scale * p.scale * sample_field(p, p.v, x1, x2, t);
}

int cell_ix(const GraphPatch& p, int cell) { return p.sdim == 1 ? cell : cell / p.m; }
int cell_iy(const GraphPatch& p, int cell) { return p.sdim == 1 ? 0 : cell % p.m; }

std::array<double, 2> cell_center(const GraphPatch& p, int cell) {
    return {p.xs[cell_ix(p, cell)], p.sdim == 2 ? p.xs[cell_iy(p, cell)] : 0.0};
}

}  // namespace

GraphPatch extract_patch(const Trajectory& trajectory, const Obstacle& obstacle, double theta_c,
                         double psi_c, double r_patch, double t_lo, double t_hi, int m) {
    if (m < 9) throw Error(ErrorCode::InvalidParameter, "patch needs at least 9 nodes per axis");
    const SphericalGrid& grid = *trajectory.grid;

    GraphPatch patch;
    patch.sdim = grid.dim();
    patch.m = m;
    patch.alpha = trajectory.alpha;
    patch.alpha_in_hypothesis = trajectory.alpha <= 1.0 / grid.dim() + 1e-12;
    patch.xs.resize(m);
    for (int i = 0; i < m; ++i) patch.xs[i] = -r_patch + 2.0 * r_patch * i / (m - 1);

    std::vector<const TrajectoryRecord*> recs;
    for (const auto& rec : trajectory.records)
        if (rec.t >= t_lo - 1e-12 && rec.t <= t_hi + 1e-12) recs.push_back(&rec);
    if (recs.size() < 3)
        throw Error(ErrorCode::InsufficientSnapshots, "patch window covers fewer than 3 snapshots");
    for (const auto* rec : recs) patch.times.push_back(rec->t);

    const Frame fr = make_frame(grid.dim(), theta_c, psi_c);
    const double t_mid = 0.5 * (patch.times.front() + patch.times.back());
    std::vector<double> phi_vals, dphi_vals;
    obstacle.evaluate_into(t_mid, phi_vals, dphi_vals);
    const double origin_h = interp_field_at_direction(phi_vals, grid, theta_c, psi_c);

    const std::size_t cells = patch.cells();
    patch.w.resize(recs.size() * cells);
    patch.phi.resize(recs.size() * cells);
    patch.v.resize(recs.size() * cells);

    for (std::size_t s = 0; s < recs.size(); ++s) {
        const ScalarField u(trajectory.grid, recs[s]->u);
        obstacle.evaluate_into(recs[s]->t, phi_vals, dphi_vals);
        const ScalarField phi_field(obstacle.grid(), phi_vals);
        const auto flow_pts = embed(u, grid);
        const auto obs_pts = embed(phi_field, grid);
        if (grid.dim() == 1) {
            graph_heights_1d(flow_pts, grid, fr, theta_c, origin_h, r_patch, patch.xs,
                             &patch.w[patch.index(s, 0)]);
            graph_heights_1d(obs_pts, grid, fr, theta_c, origin_h, r_patch, patch.xs,
                             &patch.phi[patch.index(s, 0)]);
        } else {
            const Projected pf = project_cloud(flow_pts, grid, fr, origin_h);
            const Projected po = project_cloud(obs_pts, grid, fr, origin_h);
            double af = theta_c / grid.h_theta() - 0.5, bf = psi_c / grid.h_psi();
            double ao = af, bo = bf;
            for (int ix = 0; ix < m; ++ix) {
                double afr = af, bfr = bf, aor = ao, bor = bo;  // row seeds
                for (int iy = 0; iy < m; ++iy) {
                    const std::size_t cell = patch.cell_of(ix, iy);
                    graph_heights_2d(pf, grid, patch.xs[ix], patch.xs[iy], afr, bfr,
                                     &patch.w[patch.index(s, cell)]);
                    graph_heights_2d(po, grid, patch.xs[ix], patch.xs[iy], aor, bor,
                                     &patch.phi[patch.index(s, cell)]);
                    if (iy == 0) {
                        af = afr;
                        bf = bfr;
                        ao = aor;
                        bo = bor;
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < patch.v.size(); ++i) patch.v[i] = patch.phi[i] - patch.w[i];
    compute_patch_coefficients(patch);
    return patch;
}

void compute_patch_coefficients(GraphPatch& patch) {
    const std::size_t cells = patch.cells();
    const std::size_t ns = patch.times.size();
    patch.f_field.assign(ns * cells, 0.0);
    patch.theta_field.assign(ns * cells, 1.0);
    const double alpha = patch.alpha;
    const double grad_exp = ((patch.sdim + 2) * alpha - 1.0) / 2.0;

    for (std::size_t s = 0; s < ns; ++s) {
        const PatchStencil w{patch, patch.w, s};
        const PatchStencil ph{patch, patch.phi, s};
        const PatchStencil vv{patch, patch.v, s};
        for (int ix = 0; ix < patch.m; ++ix) {
            for (int iy = 0; iy < (patch.sdim == 2 ? patch.m : 1); ++iy) {
                const std::size_t cell = patch.cell_of(ix, iy);
                const double dphidt = time_derivative(patch, patch.phi, s, cell);

                double det_phi, det_w, grad_sq, theta_cell;
                if (patch.sdim == 1) {
                    det_phi = ph.dxx(ix, 0);
                    det_w = w.dxx(ix, 0);
                    const double g = ph.dx1(ix, 0) - vv.dx1(ix, 0);
                    grad_sq = g * g;
                    const double denom = std::pow(1.0 + grad_sq, grad_exp);
                    const double f11 =
                        det_w > 0.0 ? alpha * std::pow(det_w, alpha - 1.0) / denom : 0.0;
                    theta_cell = f11 > 0.0 ? std::max(f11, 1.0 / f11) : 1e6;
                } else {
                    const double pxx = ph.dxx(ix, iy), pyy = ph.dyy(ix, iy), pxy = ph.dxy(ix, iy);
                    const double wxx = w.dxx(ix, iy), wyy = w.dyy(ix, iy), wxy = w.dxy(ix, iy);
                    det_phi = pxx * pyy - pxy * pxy;
                    det_w = wxx * wyy - wxy * wxy;
                    const double g1 = ph.dx1(ix, iy) - vv.dx1(ix, iy);
                    const double g2 = ph.dx2(ix, iy) - vv.dx2(ix, iy);
                    grad_sq = g1 * g1 + g2 * g2;
                    const double denom = std::pow(1.0 + grad_sq, grad_exp);
                    if (det_w > 0.0 && wxx > 0.0) {
                        // Eigenvalues of F^{ij} = alpha det(D2w)^alpha (D2w)^{-1} / denom.
                        const double scale = alpha * std::pow(det_w, alpha) / denom;
                        const double tr_inv = (wxx + wyy) / det_w;
                        const double diff = (wxx - wyy) / det_w;
                        const double off = wxy / det_w;
                        const double root = std::sqrt(diff * diff + 4.0 * off * off);
                        const double lam_max = scale * 0.5 * (tr_inv + root);
                        const double lam_min = scale * 0.5 * (tr_inv - root);
                        theta_cell = lam_min > 0.0 ? std::max(lam_max, 1.0 / lam_min) : 1e6;
                    } else {
                        theta_cell = 1e6;
                    }
                }
                const double denom = std::pow(1.0 + grad_sq, grad_exp);
                const double det_pos = std::max(det_phi, 0.0);
                patch.f_field[patch.index(s, cell)] =
                    -dphidt + detail::pow_alpha(det_pos, alpha) / denom;
                patch.theta_field[patch.index(s, cell)] = std::max(theta_cell, 1.0);
            }
        }
    }
    patch.c = kInf;
    patch.theta = 1.0;
    for (std::size_t i = 0; i < patch.f_field.size(); ++i) {
        patch.c = std::min(patch.c, patch.f_field[i]);
        patch.theta = std::max(patch.theta, patch.theta_field[i]);
    }
}

FreeBoundaryReport coincidence_set(const GraphPatch& patch, double tol_c) {
    if (!(tol_c > 0.0)) throw Error(ErrorCode::InvalidParameter, "tol_c must be positive");
    FreeBoundaryReport rep;
    rep.tol_c = tol_c;
    const std::size_t cells = patch.cells();
    const std::size_t ns = patch.times.size();
    rep.mask.assign(ns * cells, 0);
    rep.lambda_count.assign(ns, 0);
    for (std::size_t s = 0; s < ns; ++s)
        for (std::size_t cell = 0; cell < cells; ++cell)
            if (patch.phys_v(s, cell) <= tol_c) {
                rep.mask[patch.index(s, cell)] = 1;
                ++rep.lambda_count[s];
            }

    auto masked = [&](int s, int cell) { return rep.mask[patch.index(s, cell)]; };
    for (int s = 0; s < static_cast<int>(ns); ++s) {
        for (int cell = 0; cell < static_cast<int>(cells); ++cell) {
            const int me = masked(s, cell);
            bool boundary = false;
            const int ix = cell_ix(patch, cell), iy = cell_iy(patch, cell);
            if (ix > 0 && masked(s, patch.cell_of(ix - 1, iy)) != me) boundary = true;
            if (ix < patch.m - 1 && masked(s, patch.cell_of(ix + 1, iy)) != me) boundary = true;
            if (patch.sdim == 2) {
                if (iy > 0 && masked(s, patch.cell_of(ix, iy - 1)) != me) boundary = true;
                if (iy < patch.m - 1 && masked(s, patch.cell_of(ix, iy + 1)) != me)
                    boundary = true;
            }
            if (s > 0 && masked(s - 1, cell) != me) boundary = true;
            if (s + 1 < static_cast<int>(ns) && masked(s + 1, cell) != me) boundary = true;
            if (boundary) rep.gamma.push_back({s, cell});
        }
    }

    rep.md_per_slice.assign(ns, kNaN);
    std::vector<std::array<double, 2>> pts;
    for (std::size_t s = 0; s < ns; ++s) {
        pts.clear();
        for (std::size_t cell = 0; cell < cells; ++cell)
            if (rep.mask[patch.index(s, cell)]) pts.push_back(cell_center(patch, cell));
        if (!pts.empty()) rep.md_per_slice[s] = minimal_diameter(pts, patch.sdim);
    }
    return rep;
}

double minimal_diameter(const std::vector<std::array<double, 2>>& points, int sdim) {
    if (points.empty()) throw Error(ErrorCode::EmptySet, "minimal diameter of an empty set");
    if (sdim == 1) {
        double lo = kInf, hi = -kInf;
        for (const auto& p : points) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        return hi - lo;
    }
    auto width = [&](double ang) {
        const double c = std::cos(ang), s = std::sin(ang);
        double lo = kInf, hi = -kInf;
        for (const auto& p : points) {
            const double proj = c * p[0] + s * p[1];
            lo = std::min(lo, proj);
            hi = std::max(hi, proj);
        }
        return hi - lo;
    };
    double best_ang = 0.0, best = kInf;
    for (int d = 0; d < 180; ++d) {
        const double ang = d * kPi / 180.0;
        const double w = width(ang);
        if (w < best) {
            best = w;
            best_ang = ang;
        }
    }
    // Golden-section refinement within +-1 degree.
    double a = best_ang - kPi / 180.0, b = best_ang + kPi / 180.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = width(x1), f2 = width(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = width(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = width(x2);
        }
    }
    return std::min({best, f1, f2});
}

double thickness(const GraphPatch& patch, const FreeBoundaryReport& report,
                 std::array<double, 2> x0, double t0, double r) {
    if (x0[0] - r < patch.xs.front() - 1e-12 || x0[0] + r > patch.xs.back() + 1e-12 ||
        t0 - r * r < patch.times.front() - 1e-12 || t0 > patch.times.back() + 1e-12)
        throw Error(ErrorCode::OutOfPatch, "thickness cylinder exceeds the patch");
    if (patch.sdim == 2 &&
        (x0[1] - r < patch.xs.front() - 1e-12 || x0[1] + r > patch.xs.back() + 1e-12))
        throw Error(ErrorCode::OutOfPatch, "thickness cylinder exceeds the patch");

    double inf_value = kInf;
    std::vector<std::array<double, 2>> pts;
    for (std::size_t s = 0; s < patch.times.size(); ++s) {
        if (std::abs(patch.times[s] - t0) > r * r + 1e-12) continue;
        pts.clear();
        for (std::size_t cell = 0; cell < patch.cells(); ++cell) {
            if (!report.mask[patch.index(s, cell)]) continue;
            const auto p = cell_center(patch, cell);
            const double dx = p[0] - x0[0], dy = p[1] - x0[1];
            if (dx * dx + dy * dy <= r * r) pts.push_back(p);
        }
        const double md = pts.empty() ? 0.0 : minimal_diameter(pts, patch.sdim);
        inf_value = std::min(inf_value, md / r);
    }
    if (!std::isfinite(inf_value))
        throw Error(ErrorCode::OutOfPatch, "no slices inside the thickness window");
    return inf_value;
}

std::vector<double> nondegeneracy_probe(const GraphPatch& patch, const FreeBoundaryReport& report,
                                        std::array<double, 2> x0, double t0,
                                        const std::vector<double>& radii) {
    (void)report;
    std::vector<double> margins;
    const double v0 = sample_phys_v(patch, x0[0], x0[1], t0);
    const double denom = 2.0 * patch.sdim * patch.theta + 1.0;
    for (double r : radii) {
        if (x0[0] - r < patch.xs.front() - 1e-12 || x0[0] + r > patch.xs.back() + 1e-12 ||
            t0 - r * r < patch.times.front() - 1e-12)
            throw Error(ErrorCode::OutOfPatch, "probe cylinder exceeds the patch");
        if (patch.sdim == 2 &&
            (x0[1] - r < patch.xs.front() - 1e-12 || x0[1] + r > patch.xs.back() + 1e-12))
            throw Error(ErrorCode::OutOfPatch, "probe cylinder exceeds the patch");

        double sup = -kInf;
        // Bottom of the parabolic cylinder.
        const double t_bot = t0 - r * r;
        const int steps = 2 * patch.m;
        for (int i = 0; i <= steps; ++i) {
            const double x1 = x0[0] - r + 2.0 * r * i / steps;
            if (patch.sdim == 1) {
                sup = std::max(sup, sample_phys_v(patch, x1, 0.0, t_bot));
            } else {
                for (int j = 0; j <= steps; ++j) {
                    const double x2 = x0[1] - r + 2.0 * r * j / steps;
                    if ((x1 - x0[0]) * (x1 - x0[0]) + (x2 - x0[1]) * (x2 - x0[1]) > r * r) continue;
                    sup = std::max(sup, sample_phys_v(patch, x1, x2, t_bot));
                }
            }
        }
        // Lateral boundary over (t0 - r^2, t0].
        const int tsteps = 2 * static_cast<int>(patch.times.size());
        for (int k = 0; k <= tsteps; ++k) {
            const double t = t_bot + r * r * k / tsteps;
            if (patch.sdim == 1) {
                sup = std::max(sup, sample_phys_v(patch, x0[0] - r, 0.0, t));
                sup = std::max(sup, sample_phys_v(patch, x0[0] + r, 0.0, t));
            } else {
                for (int a = 0; a < 64; ++a) {
                    const double ang = 2.0 * kPi * a / 64;
                    sup = std::max(sup, sample_phys_v(patch, x0[0] + r * std::cos(ang),
                                                      x0[1] + r * std::sin(ang), t));
                }
            }
        }
        margins.push_back(sup - v0 - patch.c * r * r / denom);
    }
    return margins;
}

GraphPatch rescale(const GraphPatch& patch, std::array<double, 2> x0, double t0, double r) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidParameter, "rescale factor must be positive");
    if (x0[0] - r < patch.xs.front() - 1e-12 || x0[0] + r > patch.xs.back() + 1e-12 ||
        t0 - r * r < patch.times.front() - 1e-12 || t0 > patch.times.back() + 1e-12)
        throw Error(ErrorCode::OutOfPatch, "rescale target exceeds the patch");
    if (patch.sdim == 2 &&
        (x0[1] - r < patch.xs.front() - 1e-12 || x0[1] + r > patch.xs.back() + 1e-12))
        throw Error(ErrorCode::OutOfPatch, "rescale target exceeds the patch");

    GraphPatch out;
    out.sdim = patch.sdim;
    out.m = patch.m;
    out.alpha = patch.alpha;
    out.alpha_in_hypothesis = patch.alpha_in_hypothesis;
    out.xs.resize(out.m);
    for (int i = 0; i < out.m; ++i) out.xs[i] = -1.0 + 2.0 * i / (out.m - 1);

    // Keep roughly the source slice density inside the zoomed window.
    const double src_dt = (patch.times.back() - patch.times.front()) / (patch.times.size() - 1);
    const int ns = std::max<int>(4, static_cast<int>(std::floor(r * r / src_dt)) + 1);
    out.times.resize(ns);
    for (int s = 0; s < ns; ++s) out.times[s] = -1.0 + static_cast<double>(s) / (ns - 1);

    const double w0 = sample_field(patch, patch.w, x0[0], x0[1], t0);
    const double p0 = sample_field(patch, patch.phi, x0[0], x0[1], t0);
    const double v0 = sample_field(patch, patch.v, x0[0], x0[1], t0);

    out.w.resize(ns * out.cells());
    out.phi.resize(ns * out.cells());
    out.v.resize(ns * out.cells());
    for (int s = 0; s < ns; ++s) {
        const double t = t0 + r * r * out.times[s];
        for (int ix = 0; ix < out.m; ++ix) {
            for (int iy = 0; iy < (out.sdim == 2 ? out.m : 1); ++iy) {
                const std::size_t cell = out.cell_of(ix, iy);
                const double x1 = x0[0] + r * out.xs[ix];
                const double x2 = out.sdim == 2 ? x0[1] + r * out.xs[iy] : 0.0;
                const double ws = sample_field(patch, patch.w, x1, x2, t);
                const double ps = sample_field(patch, patch.phi, x1, x2, t);
                out.w[out.index(s, cell)] = (ws - w0) / (r * r);
                out.phi[out.index(s, cell)] = (ps - p0) / (r * r);
                out.v[out.index(s, cell)] =
                    out.phi[out.index(s, cell)] - out.w[out.index(s, cell)];
            }
        }
    }
    out.scale = patch.scale * r;
    out.v_offset = patch.v_offset + patch.scale * patch.scale * v0;
    out.chain = patch.chain;
    out.chain.push_back({x0[0], x0[1], t0, r});

    // Coefficients are parabolic-scale invariants; sample them over the window.
    out.f_field.assign(ns * out.cells(), patch.c);
    out.theta_field.assign(ns * out.cells(), patch.theta);
    out.c = kInf;
    out.theta = 1.0;
    for (int s = 0; s < ns; ++s) {
        const double t = t0 + r * r * out.times[s];
        for (std::size_t cell = 0; cell < out.cells(); ++cell) {
            const int ix = cell_ix(out, static_cast<int>(cell));
            const int iy = cell_iy(out, static_cast<int>(cell));
            const double x1 = x0[0] + r * out.xs[ix];
            const double x2 = out.sdim == 2 ? x0[1] + r * out.xs[iy] : 0.0;
            const double fv = sample_field(patch, patch.f_field, x1, x2, t);
            const double th = sample_field(patch, patch.theta_field, x1, x2, t);
            out.f_field[out.index(s, cell)] = fv;
            out.theta_field[out.index(s, cell)] = th;
            out.c = std::min(out.c, fv);
            out.theta = std::max(out.theta, th);
        }
    }
    return out;
}

MonotonicityResult monotonicity_probe(const GraphPatch& patch, const FreeBoundaryReport& report,
                                      double kappa, double c_kappa) {
    if (!(kappa > 0.0) || !(kappa < 1.0))
        throw Error(ErrorCode::InvalidParameter, "kappa must lie in (0,1)");
    if (c_kappa <= 0.0) c_kappa = 2.0 / kappa;

    // Estimate the preferred direction from second differences of v over
    // boundary-adjacent non-coincidence cells.
    std::vector<std::pair<int, int>> adj;  // (slice, cell)
    for (const auto& g : report.gamma) {
        if (report.mask[patch.index(g.slice, g.cell)]) continue;
        adj.push_back({g.slice, g.cell});
    }
    if (adj.empty()) throw Error(ErrorCode::DegenerateProfile, "no boundary-adjacent cells");

    MonotonicityResult res;
    double mean_dx1 = 0.0, mean_dx2 = 0.0;
    double hxx = 0.0, hyy = 0.0, hxy = 0.0;
    for (const auto& [s, cell] : adj) {
        const PatchStencil vv{patch, patch.v, static_cast<std::size_t>(s)};
        const int ix = cell_ix(patch, cell), iy = cell_iy(patch, cell);
        mean_dx1 += vv.dx1(ix, iy);
        hxx += vv.dxx(ix, iy);
        if (patch.sdim == 2) {
            mean_dx2 += vv.dx2(ix, iy);
            hyy += vv.dyy(ix, iy);
            hxy += vv.dxy(ix, iy);
        }
    }
    const double inv = 1.0 / adj.size();
    mean_dx1 *= inv;
    mean_dx2 *= inv;
    hxx *= inv;
    hyy *= inv;
    hxy *= inv;

    if (patch.sdim == 1) {
        if (std::abs(mean_dx1) < 1e-14 && std::abs(hxx) < 1e-14)
            throw Error(ErrorCode::DegenerateProfile, "no dominant direction");
        res.e1 = {mean_dx1 >= 0.0 ? 1.0 : -1.0, 0.0};
    } else {
        const double diff = hxx - hyy;
        const double root = std::sqrt(diff * diff + 4.0 * hxy * hxy);
        const double lam_dom = 0.5 * (hxx + hyy + root);
        const double lam_sub = 0.5 * (hxx + hyy - root);
        if (!(lam_dom > 1.5 * std::abs(lam_sub)) || !(lam_dom > 1e-12))
            throw Error(ErrorCode::DegenerateProfile, "no dominant hessian direction");
        double ex = hxy, ey = lam_dom - hxx;
        if (std::abs(ex) + std::abs(ey) < 1e-14) {
            ex = 1.0;
            ey = 0.0;
        }
        const double norm = std::sqrt(ex * ex + ey * ey);
        ex /= norm;
        ey /= norm;
        if (ex * mean_dx1 + ey * mean_dx2 < 0.0) {
            ex = -ex;
            ey = -ey;
        }
        res.e1 = {ex, ey};
    }

    // Fan of space-time directions with e . (e1, 0) >= kappa.
    struct Dir {
        double x1, x2, t;
    };
    std::vector<Dir> dirs;
    const double phi_max = std::acos(kappa);
    if (patch.sdim == 1) {
        for (int k = 0; k < 16; ++k) {
            const double a = -phi_max + 2.0 * phi_max * k / 15;
            dirs.push_back({std::cos(a) * res.e1[0], 0.0, std::sin(a)});
        }
    } else {
        dirs.push_back({res.e1[0], res.e1[1], 0.0});
        const double e2x = -res.e1[1], e2y = res.e1[0];
        for (int k = 0; k < 16; ++k) {
            const double om = 2.0 * kPi * k / 16;
            dirs.push_back({std::cos(phi_max) * res.e1[0] + std::sin(phi_max) * std::cos(om) * e2x,
                            std::cos(phi_max) * res.e1[1] + std::sin(phi_max) * std::cos(om) * e2y,
                            std::sin(phi_max) * std::sin(om)});
        }
    }

    // Evaluate on the upper-quarter half-box in parabolic normalization.
    const double Y = patch.xs.back();
    const double t_last = patch.times.back();
    const double offset_loc = patch.v_offset / (patch.scale * patch.scale);
    res.min_margin = kInf;
    for (const auto& d : dirs) {
        double margin = kInf;
        for (std::size_t s = 0; s < patch.times.size(); ++s) {
            if (t_last - patch.times[s] > 0.25 * Y * Y + 1e-12) continue;
            const PatchStencil vv{patch, patch.v, s};
            for (int ix = 0; ix < patch.m; ++ix) {
                if (std::abs(patch.xs[ix]) > 0.5 * Y + 1e-12) continue;
                for (int iy = 0; iy < (patch.sdim == 2 ? patch.m : 1); ++iy) {
                    if (patch.sdim == 2 && std::abs(patch.xs[iy]) > 0.5 * Y + 1e-12) continue;
                    const std::size_t cell = patch.cell_of(ix, iy);
                    const double dv = d.x1 * vv.dx1(ix, iy) +
                                      (patch.sdim == 2 ? d.x2 * vv.dx2(ix, iy) : 0.0);
                    const double dt = time_derivative(patch, patch.v, s, cell);
                    const double ve = dv / Y + d.t * dt;
                    const double vhat = (patch.v[patch.index(s, cell)] + offset_loc) / (Y * Y);
                    margin = std::min(margin, c_kappa * ve - vhat);
                }
            }
        }
        res.margins.push_back(margin);
        res.min_margin = std::min(res.min_margin, margin);
        if (margin < -1e-8) ++res.failing;
    }
    return res;
}

std::vector<double> lipschitz_estimate(const GraphPatch& patch, const FreeBoundaryReport& report,
                                       std::array<double, 2> x0, double t0,
                                       const std::vector<double>& windows) {
    if (report.gamma.empty()) throw Error(ErrorCode::NotGraphLike, "free boundary is empty");
    if (patch.sdim == 2)
        throw Error(ErrorCode::InvalidParameter,
                    "per-slice graph fitting implemented for 1-d patches");

    const double Y = patch.xs.back();
    const double tol = report.tol_c;

    // Track the branch of the tol_c level set nearest to x0 across slices.
    std::vector<double> xc(patch.times.size(), kNaN);
    for (std::size_t s = 0; s < patch.times.size(); ++s) {
        double best = kNaN, best_dist = kInf;
        for (int ix = 0; ix + 1 < patch.m; ++ix) {
            const double va = patch.phys_v(s, ix), vb = patch.phys_v(s, ix + 1);
            if ((va - tol) * (vb - tol) > 0.0) continue;
            const double frac = (tol - va) / (vb - va);
            const double x = patch.xs[ix] + frac * patch.cell_size();
            const double dist = std::abs(x - x0[0]);
            if (dist < best_dist) {
                best_dist = dist;
                best = x;
            }
        }
        xc[s] = best;
    }

    std::vector<double> out;
    for (double rho : windows) {
        const double radius = rho * Y;
        double slope = 0.0;
        int used = 0;
        for (std::size_t s = 0; s + 1 < patch.times.size(); ++s) {
            if (std::abs(patch.times[s] - t0) > radius * radius ||
                std::abs(patch.times[s + 1] - t0) > radius * radius)
                continue;
            if (!std::isfinite(xc[s]) || !std::isfinite(xc[s + 1])) continue;
            if (std::abs(xc[s] - x0[0]) > radius) continue;
            slope = std::max(slope, std::abs(xc[s + 1] - xc[s]) /
                                        (patch.times[s + 1] - patch.times[s]));
            ++used;
        }
        if (used == 0) throw Error(ErrorCode::NotGraphLike, "no tracked branch inside the window");
        out.push_back(slope * radius);  // slope in parabolically zoomed coordinates
    }
    return out;
}

double speed_near_boundary(const GraphPatch& patch, const FreeBoundaryReport& report, int d_cells,
                           int center_slice, int center_cell, int halfwidth_cells) {
    const int ns = static_cast<int>(patch.times.size());
    const int cix = cell_ix(patch, center_cell), ciy = cell_iy(patch, center_cell);

    // Boundary cells inside the window.
    std::vector<std::array<int, 3>> gamma_local;
    for (const auto& g : report.gamma) {
        const int gx = cell_ix(patch, g.cell), gy = cell_iy(patch, g.cell);
        if (std::abs(g.slice - center_slice) <= halfwidth_cells &&
            std::abs(gx - cix) <= halfwidth_cells &&
            (patch.sdim == 1 || std::abs(gy - ciy) <= halfwidth_cells))
            gamma_local.push_back({g.slice, gx, gy});
    }
    if (gamma_local.empty())
        throw Error(ErrorCode::EmptySet, "no boundary cells inside the window");

    double worst = 0.0;
    const double s2 = patch.scale * patch.scale;
    for (int s = std::max(0, center_slice - halfwidth_cells);
         s <= std::min(ns - 1, center_slice + halfwidth_cells); ++s) {
        for (int ix = std::max(0, cix - halfwidth_cells);
             ix <= std::min(patch.m - 1, cix + halfwidth_cells); ++ix) {
            const int y_lo = patch.sdim == 2 ? std::max(0, ciy - halfwidth_cells) : 0;
            const int y_hi = patch.sdim == 2 ? std::min(patch.m - 1, ciy + halfwidth_cells) : 0;
            for (int iy = y_lo; iy <= y_hi; ++iy) {
                const std::size_t cell = patch.cell_of(ix, iy);
                if (report.mask[patch.index(s, cell)]) continue;  // only the open side
                int dist = std::numeric_limits<int>::max();
                for (const auto& g : gamma_local) {
                    const int d = std::max({std::abs(s - g[0]), std::abs(ix - g[1]),
                                            patch.sdim == 2 ? std::abs(iy - g[2]) : 0});
                    dist = std::min(dist, d);
                }
                if (dist > d_cells) continue;
                worst = std::max(worst, std::abs(s2 * time_derivative(patch, patch.v, s, cell)));
            }
        }
    }
    return worst;
}

BlowupFit blowup_profile_fit(const GraphPatch& patch, const FreeBoundaryReport& report) {
    BlowupFit fit;
    double gamma_sum = 0.0;
    int gamma_n = 0;
    for (std::size_t s = 0; s < patch.times.size(); ++s) {
        const PatchStencil vv{patch, patch.v, s};
        for (int ix = 1; ix + 1 < patch.m; ++ix) {
            for (int iy = (patch.sdim == 2 ? 1 : 0);
                 iy < (patch.sdim == 2 ? patch.m - 1 : 1); ++iy) {
                const std::size_t cell = patch.cell_of(ix, iy);
                double hess = std::abs(vv.dxx(ix, iy));
                if (patch.sdim == 2)
                    hess = std::max({hess, std::abs(vv.dyy(ix, iy)), std::abs(vv.dxy(ix, iy))});
                fit.hessian_norm = std::max(fit.hessian_norm, hess);
                fit.time_norm =
                    std::max(fit.time_norm, std::abs(time_derivative(patch, patch.v, s, cell)));
                if (!report.mask[patch.index(s, cell)]) {
                    gamma_sum += vv.dxx(ix, iy);
                    ++gamma_n;
                }
            }
        }
    }
    if (gamma_n > 0) fit.gamma = gamma_sum / gamma_n;
    return fit;
}

std::vector<FreeBoundaryReport::Cell> pick_probe_points(const GraphPatch& patch,
                                                        const FreeBoundaryReport& report,
                                                        std::size_t count) {
    std::vector<FreeBoundaryReport::Cell> picks;
    for (const auto& g : report.gamma) {
        if (report.mask[patch.index(g.slice, g.cell)]) continue;
        const int ix = cell_ix(patch, g.cell), iy = cell_iy(patch, g.cell);
        bool spatial = false;
        if (ix > 0 && report.mask[patch.index(g.slice, patch.cell_of(ix - 1, iy))]) spatial = true;
        if (ix < patch.m - 1 && report.mask[patch.index(g.slice, patch.cell_of(ix + 1, iy))])
            spatial = true;
        if (patch.sdim == 2) {
            if (iy > 0 && report.mask[patch.index(g.slice, patch.cell_of(ix, iy - 1))])
                spatial = true;
            if (iy < patch.m - 1 && report.mask[patch.index(g.slice, patch.cell_of(ix, iy + 1))])
                spatial = true;
        }
        if (spatial) picks.push_back(g);
    }
    std::stable_sort(picks.begin(), picks.end(), [&](const auto& a, const auto& b) {
        if (a.slice != b.slice) return a.slice < b.slice;
        const auto pa = cell_center(patch, a.cell), pb = cell_center(patch, b.cell);
        const double da = pa[0] * pa[0] + pa[1] * pa[1], db = pb[0] * pb[0] + pb[1] * pb[1];
        return da < db;
    });
    if (picks.size() > count) picks.resize(count);
    return picks;
}

}  // namespace gcf
