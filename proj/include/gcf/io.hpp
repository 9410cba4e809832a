#pragma once

#include <string>
#include <vector>

#include "gcf/diagnostics.hpp"
#include "gcf/free_boundary.hpp"
#include "gcf/obstacle.hpp"

namespace gcf {

/// 17-significant-digit formatting: deterministic and round-trip exact.
std::string fmt17(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string trajectory_csv(const Trajectory& trajectory);
std::string snapshot_csv(const GridPtr& grid, const std::vector<double>& u);
std::string patch_csv(const GraphPatch& patch);

std::string reports_json(const std::vector<CheckReport>& reports);
std::string obstacle_report_json(const ObstacleValidationReport& report);
std::string free_boundary_report_json(const GraphPatch& patch, const FreeBoundaryReport& report);

/// CSV table `node_index,phi0[,phi_inf]` -> per-node columns.
void read_support_table(const std::string& path, std::size_t expected_nodes,
                        std::vector<double>& phi0, std::vector<double>& phi_inf,
                        bool& has_phi_inf);

}  // namespace gcf
