#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "gcf/flow_solver.hpp"

namespace gcf {

/// Local graph data of the flow and the obstacle over a supporting-frame box.
///
/// Heights are measured inward (along -z_c), so both graphs are convex, the
/// solution graph w lies below the obstacle graph phi, and v = phi - w >= 0.
/// Rescaled patches keep the chain metadata so the physical height difference
/// can always be reconstructed as v_offset + scale^2 * v.
struct GraphPatch {
    int sdim = 1;               ///< spatial dimension of the box (= grid dim)
    int m = 0;                  ///< nodes per spatial axis
    std::vector<double> xs;     ///< axis coordinates (shared by both axes)
    std::vector<double> times;  ///< slice times, increasing, >= 3
    std::vector<double> w;      ///< solution graph, [slice * cells + cell]
    std::vector<double> phi;    ///< obstacle graph
    std::vector<double> v;      ///< phi - w
    std::vector<double> f_field;      ///< forcing per cell
    std::vector<double> theta_field;  ///< ellipticity per cell
    double theta = 1.0;               ///< ellipticity bound (max over cells)
    double c = 0.0;                   ///< forcing lower bound (min over cells)
    double alpha = 1.0;
    bool alpha_in_hypothesis = true;  ///< alpha <= 1/n (convex-operator regime)

    double scale = 1.0;                         ///< product of rescale factors
    double v_offset = 0.0;                      ///< physical v at the rescale centers
    std::vector<std::array<double, 4>> chain;   ///< (x0, x1, t0, r) per rescale

    std::size_t cells() const {
        return sdim == 1 ? static_cast<std::size_t>(m)
                         : static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
    }
    std::size_t index(std::size_t slice, std::size_t cell) const {
        return slice * cells() + cell;
    }
    std::size_t cell_of(int ix, int iy) const {
        return sdim == 1 ? static_cast<std::size_t>(ix)
                         : static_cast<std::size_t>(ix) * m + iy;
    }
    double cell_size() const { return xs[1] - xs[0]; }
    double phys_v(std::size_t slice, std::size_t cell) const {
        return v_offset + scale * scale * v[index(slice, cell)];
    }
};

/// Sample the flow and obstacle as graphs over the tangent frame at direction
/// (theta_c[, psi_c]), using the support-function embedding and linear /
/// bilinear interpolation of the embedded point cloud.
GraphPatch extract_patch(const Trajectory& trajectory, const Obstacle& obstacle, double theta_c,
                         double psi_c, double r_patch, double t_lo, double t_hi, int m);

/// Recompute f_field/theta_field and the bounds c/theta from the stored graphs.
void compute_patch_coefficients(GraphPatch& patch);

struct FreeBoundaryReport {
    double tol_c = 0.0;
    std::vector<std::uint8_t> mask;  ///< 1 = coincidence cell, [slice*cells+cell]
    struct Cell {
        int slice = 0;
        int cell = 0;
    };
    std::vector<Cell> gamma;             ///< cells adjacent to a mask change
    std::vector<int> lambda_count;       ///< coincidence cells per slice
    std::vector<double> md_per_slice;    ///< minimal diameter of each slice (NaN if empty)
    // Filled by the probe drivers:
    std::vector<double> thickness_values;
    std::vector<double> nondeg_margins;
    std::vector<double> mono_margins;
    std::vector<double> lipschitz_per_level;
    std::vector<double> speed_profile;
};

FreeBoundaryReport coincidence_set(const GraphPatch& patch, double tol_c);

/// Least width of a point set between two parallel hyperplanes. Dimension 1:
/// max - min; dimension 2: direction scan at 1-degree steps refined by
/// golden-section search.
double minimal_diameter(const std::vector<std::array<double, 2>>& points, int sdim);

/// Thickness d_r at (x0, t0): inf over slices |t - t0| <= r^2 of
/// MD(coincidence slice within B_r(x0)) / r. Empty slices count as zero width.
double thickness(const GraphPatch& patch, const FreeBoundaryReport& report,
                 std::array<double, 2> x0, double t0, double r);

/// Quadratic-growth margins sup_{parabolic boundary of Q_r} v - v(X0)
/// - c r^2 / (2 n theta + 1), one per radius, using the patch's measured c and
/// theta. Non-negative margins certify non-degeneracy at X0.
std::vector<double> nondegeneracy_probe(const GraphPatch& patch, const FreeBoundaryReport& report,
                                        std::array<double, 2> x0, double t0,
                                        const std::vector<double>& radii);

/// Parabolic rescaling v_r(y, s) = (v(x0 + r y, t0 + r^2 s) - v(x0, t0)) / r^2
/// sampled onto a unit box; w and phi are rescaled consistently.
GraphPatch rescale(const GraphPatch& patch, std::array<double, 2> x0, double t0, double r);

struct MonotonicityResult {
    std::array<double, 2> e1 = {1.0, 0.0};  ///< estimated preferred direction
    std::vector<double> margins;            ///< min of C_k d_e v - v per direction
    double min_margin = 0.0;
    int failing = 0;  ///< directions below -tolerance
};

/// Directional monotonicity over a fan of space-time directions e with
/// e . (e1, 0) >= kappa; C_kappa defaults to 2/kappa.
MonotonicityResult monotonicity_probe(const GraphPatch& patch, const FreeBoundaryReport& report,
                                      double kappa, double c_kappa = -1.0);

/// Free-boundary slope around (x0, t0) at a list of parabolic window radii
/// (in units of the patch half-width). Each value is the max branch slope
/// |dx_c/dt| times the window radius, i.e. the slope in zoomed coordinates; a
/// decreasing sequence indicates C^1 flattening.
std::vector<double> lipschitz_estimate(const GraphPatch& patch, const FreeBoundaryReport& report,
                                       std::array<double, 2> x0, double t0,
                                       const std::vector<double>& windows);

/// Max |d_t v| over non-coincidence cells within d_cells (Chebyshev, index
/// units) of a boundary cell, restricted to a window around (slice, cell).
double speed_near_boundary(const GraphPatch& patch, const FreeBoundaryReport& report, int d_cells,
                           int center_slice, int center_cell, int halfwidth_cells);

struct BlowupFit {
    double hessian_norm = 0.0;  ///< max |D^2 v| over interior cells
    double time_norm = 0.0;     ///< max |d_t v| over interior cells
    double gamma = 0.0;         ///< mean positive-side curvature along e1
};

BlowupFit blowup_profile_fit(const GraphPatch& patch, const FreeBoundaryReport& report);

/// Earliest non-coincidence cells adjacent to a spatial mask transition,
/// ordered by (slice, |x - box center|); the natural probe points.
std::vector<FreeBoundaryReport::Cell> pick_probe_points(const GraphPatch& patch,
                                                        const FreeBoundaryReport& report,
                                                        std::size_t count);

}  // namespace gcf
