#include "gcf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gcf {

using nlohmann::json;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open for writing: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::ostringstream out;
    out << "t,min_K,max_K,min_gap,min_beta,min_lambda,max_lambda,max_speed\n";
    for (const auto& rec : trajectory.records) {
        out << fmt17(rec.t) << ',' << fmt17(rec.min_K) << ',' << fmt17(rec.max_K) << ','
            << fmt17(rec.min_gap) << ',' << fmt17(rec.min_beta) << ',' << fmt17(rec.min_lambda)
            << ',' << fmt17(rec.max_lambda) << ',' << fmt17(rec.max_speed) << '\n';
    }
    return out.str();
}

std::string snapshot_csv(const GridPtr& gp, const std::vector<double>& u) {
    std::ostringstream out;
    const SphericalGrid& grid = *gp;
    const ScalarField us(gp, u);
    const auto pts = embed(us, grid);
    if (grid.dim() == 1) {
        out << "node_index,theta,x,y\n";
        for (std::size_t k = 0; k < pts.size(); ++k)
            out << k << ',' << fmt17(gp->theta(k)) << ',' << fmt17(pts[k].x) << ','
                << fmt17(pts[k].y) << '\n';
    } else {
        out << "node_index,theta,psi,x,y,z\n";
        for (std::size_t k = 0; k < pts.size(); ++k)
            out << k << ',' << fmt17(gp->theta(k)) << ',' << fmt17(gp->psi(k)) << ','
                << fmt17(pts[k].x) << ',' << fmt17(pts[k].y) << ',' << fmt17(pts[k].z) << '\n';
    }
    return out.str();
}

std::string patch_csv(const GraphPatch& patch) {
    std::ostringstream out;
    out << "i,j,t_index,w,phi,v\n";
    for (std::size_t s = 0; s < patch.times.size(); ++s) {
        for (int ix = 0; ix < patch.m; ++ix) {
            const int ny = patch.sdim == 2 ? patch.m : 1;
            for (int iy = 0; iy < ny; ++iy) {
                const std::size_t cell = patch.cell_of(ix, iy);
                const std::size_t idx = patch.index(s, cell);
                out << ix << ',' << iy << ',' << s << ',' << fmt17(patch.w[idx]) << ','
                    << fmt17(patch.phi[idx]) << ',' << fmt17(patch.v[idx]) << '\n';
            }
        }
    }
    return out.str();
}

std::string reports_json(const std::vector<CheckReport>& reports) {
    json arr = json::array();
    for (const auto& rep : reports) {
        json constants = json::object();
        for (const auto& [k, v] : rep.constants) constants[k] = v;
        arr.push_back({{"id", rep.id},
                       {"pass", rep.pass},
                       {"margin", rep.margin},
                       {"node", rep.node},
                       {"time", rep.time},
                       {"constants", constants}});
    }
    return arr.dump(2) + "\n";
}

std::string obstacle_report_json(const ObstacleValidationReport& report) {
    json j = {{"pass", report.pass},
              {"margin_speed_negative", report.margin_speed_negative},
              {"margin_speed_nonincreasing", report.margin_speed_nonincreasing},
              {"margin_final_interior", report.margin_final_interior},
              {"margin_mu_monotone", report.margin_mu_monotone},
              {"mu_bound", report.mu_bound},
              {"margin_supersolution", report.margin_supersolution},
              {"margin_compat_initial", report.margin_compat_initial},
              {"margin_compat_obstacle", report.margin_compat_obstacle},
              {"margin_enclosure", report.margin_enclosure},
              {"C0", report.c0}};
    return j.dump(2) + "\n";
}

std::string free_boundary_report_json(const GraphPatch& patch, const FreeBoundaryReport& report) {
    json gamma = json::array();
    for (const auto& g : report.gamma) gamma.push_back({g.slice, g.cell});
    json j = {{"tol_c", report.tol_c},
              {"alpha", patch.alpha},
              {"alpha_in_hypothesis", patch.alpha_in_hypothesis},
              {"theta", patch.theta},
              {"c", patch.c},
              {"scale", patch.scale},
              {"lambda_count", report.lambda_count},
              {"md_per_slice", report.md_per_slice},
              {"gamma_cells", gamma},
              {"thickness", report.thickness_values},
              {"nondegeneracy_margins", report.nondeg_margins},
              {"monotonicity_margins", report.mono_margins},
              {"lipschitz_per_level", report.lipschitz_per_level},
              {"speed_profile", report.speed_profile}};
    return j.dump(2) + "\n";
}

void read_support_table(const std::string& path, std::size_t expected_nodes,
                        std::vector<double>& phi0, std::vector<double>& phi_inf,
                        bool& has_phi_inf) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::ParseError, "empty support table: " + path);
    phi0.assign(expected_nodes, 0.0);
    phi_inf.assign(expected_nodes, 0.0);
    has_phi_inf = line.find("phi_inf") != std::string::npos;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        std::getline(row, tok, ',');
        const std::size_t idx = std::stoul(tok);
        if (idx >= expected_nodes)
            throw Error(ErrorCode::ParseError, "node index out of range in " + path);
        std::getline(row, tok, ',');
        phi0[idx] = std::stod(tok);
        if (has_phi_inf) {
            std::getline(row, tok, ',');
            phi_inf[idx] = std::stod(tok);
        }
        ++rows;
    }
    if (rows != expected_nodes)
        throw Error(ErrorCode::ParseError, "support table row count does not match the grid");
}

}  // namespace gcf
