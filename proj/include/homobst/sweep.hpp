#pragma once

#include "homobst/analysis.hpp"
#include "homobst/config.hpp"
#include "homobst/table.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace homobst {

struct TableProvenance {
    std::string hash;  // FNV-1a 64 of the serialized table, hex
    double xi_max = 0.0;
    std::size_t samples = 0;
    int n_cell = 0;
    int retabulations = 0;
    bool loaded = false;
};

struct Baseline {
    double energy_0 = 0.0;
    double measure_0 = 0.0;
    bool converged = false;
    int iterations = 0;
    /// The operator is x-independent, so u0 is solved with a itself rather than the table.
    bool exact_flux = false;
    /// max relative gap between stored a0 and its closed form, when one exists.
    std::optional<double> a0_oracle_gap;
    double nondegeneracy_measure = 0.0;
    double max_grad_eps = 0.0;
};

struct SweepReport {
    SweepConfig config;
    StructuralReport structural;
    TableProvenance table;
    Baseline baseline;
    double s_exponent = 1.0;
    std::vector<ConvergenceRow> rows;

    /// Structural checks passed, the baseline and every row converged.
    bool ok() const;
};

struct SweepOptions {
    /// Reuse a previously exported table instead of tabulating.
    std::optional<HomogenizedOperatorTable> table;
    /// Keep the homogenized table in the result (used by `cell`).
    HomogenizedOperatorTable *table_out = nullptr;
};

SweepReport run_sweep(const SweepConfig &config, const SweepOptions &options = {});

/// Closed-form a0 where available: x-independent operators, and 1D weighted_p through the
/// harmonic-type mean (int gamma^{-1/(p-1)})^{-(p-1)} |xi|^{p-2} xi.
std::optional<Vec> closed_form_a0(const FluxOperator &op, const Vec &xi);

std::string table_hash(const HomogenizedOperatorTable &table);

ObstacleProblem make_problem(const SweepConfig &config, const FluxModel &flux, double eps);

void write_csv(const SweepReport &report, std::ostream &os);
void write_json(const SweepReport &report, std::ostream &os);
/// Writes csv or json to path; throws when the path is not writable.
void emit_report(const SweepReport &report, const std::string &format, const std::string &path);

}  // namespace homobst
