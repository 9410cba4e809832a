#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gcf/diagnostics.hpp"
#include "gcf/free_boundary.hpp"

namespace gcf {

struct ShapeSpec {
    std::string kind = "constant";  // constant | ball | ellipse | table
    double radius = 1.0;
    std::vector<double> semi_axes;
    std::string table_file;
};

struct ObstacleSpec {
    std::string family = "disabled";  // disabled | homothetic | interpolating
    double a_inf = 0.5;
    double rate = 1.0;
    ShapeSpec phi0;
    ShapeSpec phi_inf;
};

struct ProbeSpec {
    double center_theta = 0.0;
    double center_psi = 0.0;
    double r_patch = 0.45;
    int m = 61;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::vector<double> radii = {0.1, 0.2};
    std::vector<double> kappas = {0.25, 0.5, 0.75};
    double tol_c = 0.0;  // <= 0: default, 10x the complementarity residual
    std::vector<int> d_cells = {4, 2, 1};
    std::vector<double> zoom_windows = {0.8, 0.5};
    double mono_zoom = 0.25;  // rescale factor before the directional probe
};

struct ScenarioConfig {
    int dim = 1;
    int n_theta = 0;
    int n_psi = 0;
    double alpha = 1.0;
    double t_end = 0.0;
    double cadence = 0.0;  // 0: default t_end / 100
    ShapeSpec initial;
    ObstacleSpec obstacle;
    std::vector<double> delta_schedule;  // empty: default 0.5 * min(u0 - phi0)
    std::vector<std::string> checks;     // empty: all applicable
    double residual_window_lo = 0.0;
    double residual_window_hi = -1.0;  // < 0: t_end
    std::optional<ProbeSpec> probe;
    std::string output_dir = "out";
    std::string corruption = "none";
    PenaltyVariant variant = PenaltyVariant::C11;
};

/// Parse and validate a JSON scenario document. Throws ParseError on syntax
/// errors and ValidationError listing every violated constraint.
ScenarioConfig parse_config(const std::string& text);

struct ScenarioArtifacts {
    std::vector<CheckReport> reports;
    std::optional<ObstacleValidationReport> obstacle_report;
    std::optional<ContinuationResult> continuation;
    int exit_code = 0;
};

/// Execute a scenario end to end and write trajectory.csv, snap_<k>.csv,
/// report.json (and probe artifacts in probe mode) under config.output_dir.
/// Exit code contract: 0 all requested checks pass, 2 check failure,
/// 3 solver error, 4 configuration error.
ScenarioArtifacts run_scenario(const ScenarioConfig& config, bool probe_mode);

/// The `validate-obstacle` entry point: writes obstacle_report.json.
ScenarioArtifacts validate_obstacle_scenario(const ScenarioConfig& config);

/// Map a thrown Error to the exit-code contract (3 solver, 4 configuration).
int exit_code_for(const Error& error);

}  // namespace gcf
