#pragma once

#include "homobst/fields.hpp"
#include "homobst/grid.hpp"
#include "homobst/table.hpp"

namespace homobst {

enum class CellMethod { newton, gauss_seidel };

struct CellParams {
    /// 2D residual tolerance relative to 1 + max |a(x, xi)|.
    double tol_rel = 1e-10;
    int max_iters = 0;  // 0: 200 Newton steps / 2e5 sweeps
    /// 2D only; 1D always uses the first-integral inversion.
    CellMethod method = CellMethod::newton;
};

struct CorrectorSolution {
    Vec xi{0.0, 0.0};
    ScalarField v;  // zero-mean periodic corrector
    Vec flux_avg{0.0, 0.0};  // a0(xi)
    double h_value = 0.0;  // h(xi); NaN for families without a potential
    double residual_norm = 0.0;  // max |div_h a(x, xi + grad v)|
    int iterations = 0;
    bool converged = false;
};

/// Periodic cell problem  div a(x, xi + grad v) = 0,  mean(v) = 0.
CorrectorSolution solve_corrector(const FluxOperator &flux, const Vec &xi, const Grid &cell_grid,
                                  const CellParams &params = {});

/// a0(xi): cell average of a(x, xi + grad v).
Vec homogenized_flux(const FluxOperator &flux, const Vec &xi, const Grid &cell_grid, const CellParams &params = {});

/// h(xi): cell integral of the flux potential at the corrector (|xi + grad v|^p / p for px_laplace,
/// weighted by gamma for the weighted families).
double homogenized_density(const FluxOperator &flux, const Vec &xi, const Grid &cell_grid,
                           const CellParams &params = {});

struct TableParams {
    double xi_max = 4.0;
    int samples_1d = 65;
    int n_r = 24;
    int n_theta = 32;
    double r_min_ratio = 1e-4;
};

HomogenizedOperatorTable tabulate(const FluxOperator &flux, const Grid &cell_grid, const TableParams &tp,
                                  const CellParams &params = {});
HomogenizedOperatorTable tabulate_serial(const FluxOperator &flux, const Grid &cell_grid, const TableParams &tp,
                                         const CellParams &params = {});

/// Sampled properties of a0 and h with fitted constants.
struct TableDiagnostics {
    double monotonicity_min = 0.0;  // min over distinct stored pairs of (a0(x)-a0(y)).(x-y)
    double c0 = 0.0;  // largest c0 with a0.xi >= c0 (h - 1) at all samples
    double c1 = 0.0;  // largest c1 with c1 |xi|^alpha - 1 <= h
    double c2 = 0.0;  // smallest c2 with h <= c2 |xi|^beta + 1
    double delta2_K = 0.0;  // max h(2 xi) / (h(xi) + 1)
    double convexity_violation = 0.0;  // max h(mid) - (h(a) + h(b)) / 2 over checked triples
    double grad_h_discrepancy = 0.0;  // max |grad h - a0| / (1 + |a0|) by finite differences
};

TableDiagnostics diagnose_table(const HomogenizedOperatorTable &table, const FluxOperator &flux,
                                const Grid &cell_grid, const CellParams &params = {});

/// One-line description of the operator parameters (table provenance).
std::string describe_operator(const FluxOperator &flux);

}  // namespace homobst
