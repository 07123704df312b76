#pragma once

#include "homobst/analysis.hpp"
#include "homobst/cell.hpp"
#include "homobst/fields.hpp"
#include "homobst/vi_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace homobst {

enum class SourceKind { constant, sine_bump, indicator_bump };

/// offset + value * shape(x) with shape = 1, prod_i sin(pi x_i / L), or the indicator of [L/4, 3L/4]^dim.
struct SourceSpec {
    SourceKind kind = SourceKind::constant;
    double value = 0.0;
    double offset = 0.0;
};

ScalarField make_source(const SourceSpec &spec, const Grid &grid);

struct SweepConfig {
    FluxOperator op;
    double length = 1.0;
    int n_fine = 0;
    int n_cell = 0;  // 0: 1024 in 1D, 64 in 2D
    TableParams table;
    CellParams cell;
    std::vector<double> eps_list;

    SourceSpec f{SourceKind::constant, 0.0, 0.0};
    /// f_eps = f + f_oscillation sin(2 pi x_1 / eps).
    double f_oscillation = 0.0;
    SourceSpec psi{SourceKind::constant, 0.0, -1.0};
    ObstacleMode psi_mode = ObstacleMode::fixed;
    double psi_amplitude = 0.0;
    std::optional<double> s_exponent;

    SolverParams solver;
    StructuralOptions structural;

    std::string out_dir = "out";
    std::string format = "csv";
    std::string name = "report";

    std::string source_text;

    int cell_resolution() const { return n_cell > 0 ? n_cell : (op.dim == 1 ? 1024 : 64); }
    double resolved_s_exponent() const;
    void validate() const;
};

/// key = value lines, '#' comments, [section] headers.  Keys before any section are resolved
/// by name when unambiguous.  Required: family, eps_list, n_fine.
SweepConfig parse_config(const std::string &text);
SweepConfig load_config(const std::string &path);

}  // namespace homobst
