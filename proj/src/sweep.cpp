#include "homobst/sweep.hpp"

#include <json.hpp>

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace homobst {

bool SweepReport::ok() const {
    if (!structural.pass || !baseline.converged) return false;
    return std::all_of(rows.begin(), rows.end(), [](const ConvergenceRow &r) { return r.converged; });
}

std::optional<Vec> closed_form_a0(const FluxOperator &op, const Vec &xi) {
    if (op.x_independent()) return op.eval({0.0, 0.0}, xi);
    if (op.dim != 1 || op.family != FluxFamily::weighted_p) return std::nullopt;
    const double p = op.exponent.alpha;
    if (op.delta > 0.0 && p < 2.0) return std::nullopt;
    // midpoint rule; spectrally accurate for smooth periodic weights, exact for aligned steps
    constexpr int n = 1 << 16;
    double m = 0.0;
    for (int k = 0; k < n; ++k) m += std::pow(op.gamma.eval({(k + 0.5) / n, 0.0}, 1), -1.0 / (p - 1.0));
    m /= n;
    const double r = std::abs(xi[0]);
    return Vec{std::pow(m, -(p - 1.0)) * std::pow(r, p - 2.0) * xi[0], 0.0};
}

std::string table_hash(const HomogenizedOperatorTable &table) {
    std::ostringstream os;
    write_table(table, os);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

ObstacleProblem make_problem(const SweepConfig &config, const FluxModel &flux, double eps) {
    const Grid grid = Grid::dirichlet(config.op.dim, config.n_fine, config.length);
    ScalarField f = make_source(config.f, grid);
    ScalarField psi0 = make_source(config.psi, grid);
    if (eps > 0.0 && config.f_oscillation != 0.0)
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] += config.f_oscillation * std::sin(2.0 * std::numbers::pi * grid.node_coord(i)[0] / eps);
    ScalarField psi = eps > 0.0 ? obstacle_family(psi0, config.psi_mode, eps, config.psi_amplitude) : psi0;
    ObstacleProblem p{grid, flux, std::move(f), std::move(psi), config.resolved_s_exponent()};
    p.validate();
    return p;
}

namespace {

double max_element_gradient(const ScalarField &u) {
    Mesh mesh(u.grid);
    double m = 0.0;
    for (std::size_t e = 0; e < mesh.elements().size(); ++e) m = std::max(m, norm(mesh.element_gradient(e, u.values)));
    return m;
}

ScalarField difference(const ScalarField &a, const ScalarField &b) {
    ScalarField d = a;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
    return d;
}

struct EpsSolve {
    ObstacleProblem problem;
    DiscreteSolution sol;
};

}  // namespace

SweepReport run_sweep(const SweepConfig &config, const SweepOptions &options) {
    config.validate();
    SweepReport rep;
    rep.config = config;
    rep.s_exponent = config.resolved_s_exponent();
    rep.structural = verify_structural(config.op, config.structural);

    std::vector<EpsSolve> solves;
    solves.reserve(config.eps_list.size());
    double max_grad = 0.0;
    for (double eps : config.eps_list) {
        ObstacleProblem prob = make_problem(config, rescale(config.op, eps), eps);
        DiscreteSolution sol = solve_obstacle(prob, config.solver);
        max_grad = std::max(max_grad, max_element_gradient(sol.u));
        solves.push_back({std::move(prob), std::move(sol)});
    }
    rep.baseline.max_grad_eps = max_grad;

    const Grid cell_grid = Grid::periodic_cell(config.op.dim, config.cell_resolution());
    HomogenizedOperatorTable table;
    std::optional<ObstacleProblem> prob0;
    DiscreteSolution sol0;
    if (config.op.x_independent()) {
        // a0 = a exactly; the table is still built (or loaded) for the report
        TableParams tp = config.table;
        tp.xi_max = std::max(tp.xi_max, 2.0 * max_grad);
        table = options.table ? *options.table : tabulate(config.op, cell_grid, tp, config.cell);
        rep.table.loaded = options.table.has_value();
        rep.baseline.exact_flux = true;
        prob0 = make_problem(config, config.op, 0.0);
        sol0 = solve_obstacle(*prob0, config.solver);
    } else if (options.table) {
        table = *options.table;
        if (table.dim != config.op.dim) throw Error("loaded table dimension does not match the operator");
        rep.table.loaded = true;
        try {
            prob0 = make_problem(config, table, 0.0);
            sol0 = solve_obstacle(*prob0, config.solver);
        } catch (const TableRangeError &) {
            throw Error("loaded table range is too small for this problem; re-export it with a larger xi_max");
        }
    } else {
        TableParams tp = config.table;
        tp.xi_max = std::max(tp.xi_max, 2.0 * max_grad);
        for (int attempt = 0;; ++attempt) {
            table = tabulate(config.op, cell_grid, tp, config.cell);
            bool range_ok = true;
            try {
                prob0 = make_problem(config, table, 0.0);
                sol0 = solve_obstacle(*prob0, config.solver);
            } catch (const TableRangeError &) {
                range_ok = false;
            }
            if ((range_ok && sol0.converged) || attempt == 3) {
                if (!range_ok) throw Error("homogenized solve exceeds the table range after re-tabulation");
                break;
            }
            tp.xi_max *= 2.0;
            ++rep.table.retabulations;
        }
    }
    rep.table.hash = table_hash(table);
    rep.table.xi_max = table.xi_max;
    rep.table.samples = table.sample_count();
    rep.table.n_cell = table.n_cell;
    if (options.table_out) *options.table_out = table;

    double oracle_gap = 0.0;
    bool has_oracle = true;
    for (std::size_t k = 0; k < table.sample_count() && has_oracle; ++k) {
        auto exact = closed_form_a0(config.op, table.xi_samples[k]);
        if (!exact) {
            has_oracle = false;
            break;
        }
        double scale = norm(*exact);
        if (scale > 0.0) oracle_gap = std::max(oracle_gap, norm(table.a0_values[k] - *exact) / scale);
    }
    if (has_oracle) rep.baseline.a0_oracle_gap = oracle_gap;

    rep.baseline.converged = sol0.converged;
    rep.baseline.iterations = sol0.iterations;
    rep.baseline.energy_0 = energy(prob0->flux, sol0.u);
    const Grid &grid = prob0->grid;
    const CoincidenceSet set0 = coincidence(sol0.u, prob0->psi, default_coincidence_tau(grid, sol0.tol_kkt));
    rep.baseline.measure_0 = set0.measure;
    rep.baseline.nondegeneracy_measure = nondegeneracy_measure(table, prob0->f, prob0->psi);

    const std::vector<double> alpha_cells(grid.cell_count(), config.op.exponent.alpha);
    for (std::size_t k = 0; k < solves.size(); ++k) {
        const auto &[prob, sol] = solves[k];
        ConvergenceRow row;
        row.eps = config.eps_list[k];
        row.converged = sol.converged;
        row.iterations = sol.iterations;
        ScalarField diff = difference(sol.u, sol0.u);
        row.l_alpha_error = luxembourg_norm(diff, alpha_cells);
        row.grad_l_alpha_error = norm_w1p0(diff, alpha_cells);
        row.energy_eps = energy(prob.flux, sol.u);
        row.energy_0 = rep.baseline.energy_0;
        CoincidenceSet set = coincidence(sol.u, prob.psi, default_coincidence_tau(grid, sol.tol_kkt));
        row.coincidence_measure_eps = set.measure;
        MeasureGap gap = measure_convergence(set, set0);
        row.measure_gap = gap.measure_gap;
        row.chi_l1_gap = gap.chi_l1_gap;
        row.hausdorff = hausdorff_distance(set, set0);
        LewyStampacchiaReport ls = lewy_stampacchia(prob, sol);
        row.ls_pass = sol.converged && ls.pass;
        row.s_norm_upper = ls.s_norm_upper;
        rep.rows.push_back(row);
    }
    return rep;
}

void write_csv(const SweepReport &report, std::ostream &os) {
    os << "eps,l_alpha_error,grad_l_alpha_error,energy_eps,energy_0,coincidence_measure_eps,measure_gap,"
          "chi_l1_gap,hausdorff,ls_pass,s_norm_upper\n";
    for (const auto &r : report.rows) {
        os << format_real(r.eps) << ',' << format_real(r.l_alpha_error) << ',' << format_real(r.grad_l_alpha_error)
           << ',' << format_real(r.energy_eps) << ',' << format_real(r.energy_0) << ','
           << format_real(r.coincidence_measure_eps) << ',' << format_real(r.measure_gap) << ','
           << format_real(r.chi_l1_gap) << ',' << format_real(r.hausdorff) << ',' << (r.ls_pass ? "true" : "false")
           << ',' << format_real(r.s_norm_upper) << '\n';
    }
}

namespace {

nlohmann::ordered_json real_json(double v) {
    if (std::isfinite(v)) return v;
    return format_real(v);
}

}  // namespace

void write_json(const SweepReport &report, std::ostream &os) {
    using nlohmann::ordered_json;
    const SweepConfig &c = report.config;
    ordered_json j;
    ordered_json cfg;
    cfg["family"] = to_string(c.op.family);
    cfg["dim"] = c.op.dim;
    cfg["alpha"] = c.op.exponent.alpha;
    cfg["beta"] = c.op.exponent.beta;
    cfg["length"] = c.length;
    cfg["n_fine"] = c.n_fine;
    cfg["n_cell"] = c.cell_resolution();
    cfg["eps_list"] = c.eps_list;
    cfg["s_exponent"] = report.s_exponent;
    cfg["tol_rel"] = c.solver.tol_rel;
    cfg["seed"] = c.structural.seed;
    cfg["text"] = c.source_text;
    j["config"] = cfg;

    const StructuralReport &s = report.structural;
    j["structural"] = {{"n_samples", s.n_samples},
                       {"monotonicity_min", real_json(s.monotonicity_min)},
                       {"coercivity_margin_min", real_json(s.coercivity_margin_min)},
                       {"boundedness_margin_min", real_json(s.boundedness_margin_min)},
                       {"C1", real_json(s.C1)},
                       {"C2", real_json(s.C2)},
                       {"pass", s.pass}};
    j["table"] = {{"hash", report.table.hash},
                  {"xi_max", report.table.xi_max},
                  {"samples", report.table.samples},
                  {"n_cell", report.table.n_cell},
                  {"retabulations", report.table.retabulations},
                  {"loaded", report.table.loaded}};
    const Baseline &b = report.baseline;
    ordered_json base{{"energy_0", real_json(b.energy_0)},
                      {"measure_0", real_json(b.measure_0)},
                      {"converged", b.converged},
                      {"iterations", b.iterations},
                      {"exact_flux", b.exact_flux},
                      {"a0_oracle_gap", b.a0_oracle_gap ? real_json(*b.a0_oracle_gap) : ordered_json(nullptr)},
                      {"nondegeneracy_measure", real_json(b.nondegeneracy_measure)},
                      {"max_grad_eps", real_json(b.max_grad_eps)}};
    j["baseline"] = base;
    ordered_json rows = ordered_json::array();
    for (const auto &r : report.rows) {
        rows.push_back({{"eps", real_json(r.eps)},
                        {"l_alpha_error", real_json(r.l_alpha_error)},
                        {"grad_l_alpha_error", real_json(r.grad_l_alpha_error)},
                        {"energy_eps", real_json(r.energy_eps)},
                        {"energy_0", real_json(r.energy_0)},
                        {"coincidence_measure_eps", real_json(r.coincidence_measure_eps)},
                        {"measure_gap", real_json(r.measure_gap)},
                        {"chi_l1_gap", real_json(r.chi_l1_gap)},
                        {"hausdorff", real_json(r.hausdorff)},
                        {"ls_pass", r.ls_pass},
                        {"s_norm_upper", real_json(r.s_norm_upper)},
                        {"converged", r.converged},
                        {"iterations", r.iterations}});
    }
    j["rows"] = rows;
    j["ok"] = report.ok();
    os << j.dump(2) << '\n';
}

void emit_report(const SweepReport &report, const std::string &format, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write report to '" + path + "'");
    if (format == "csv") write_csv(report, out);
    else if (format == "json") write_json(report, out);
    else throw Error("unknown report format '" + format + "'");
    if (!out) throw Error("failed writing report to '" + path + "'");
}

}  // namespace homobst
