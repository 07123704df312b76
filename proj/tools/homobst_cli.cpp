#include "homobst/analysis.hpp"
#include "homobst/cell.hpp"
#include "homobst/config.hpp"
#include "homobst/sweep.hpp"
#include "homobst/table.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace homobst;
namespace fs = std::filesystem;

namespace {

void print_structural(const StructuralReport &s) {
    std::printf("structural: samples=%d monotonicity_min=%s coercivity_margin_min=%s boundedness_margin_min=%s "
                "C1=%s C2=%s pass=%s\n",
                s.n_samples, format_real(s.monotonicity_min).c_str(), format_real(s.coercivity_margin_min).c_str(),
                format_real(s.boundedness_margin_min).c_str(), format_real(s.C1).c_str(), format_real(s.C2).c_str(),
                s.pass ? "true" : "false");
}

std::string out_path(const std::string &dir, const std::string &file) {
    fs::create_directories(dir);
    return (fs::path(dir) / file).string();
}

int cmd_check(const SweepConfig &cfg) {
    StructuralReport s = verify_structural(cfg.op, cfg.structural);
    print_structural(s);
    return s.pass ? 0 : 1;
}

int cmd_cell(const SweepConfig &cfg, const std::string &dir) {
    const Grid cell_grid = Grid::periodic_cell(cfg.op.dim, cfg.cell_resolution());
    HomogenizedOperatorTable t = tabulate(cfg.op, cell_grid, cfg.table, cfg.cell);
    const std::string path = out_path(dir, cfg.name + "_table.txt");
    save_table(t, path);
    std::printf("table: %s samples=%zu xi_max=%s hash=%s\n", path.c_str(), t.sample_count(),
                format_real(t.xi_max).c_str(), table_hash(t).c_str());
    if (t.has_density) {
        TableDiagnostics d = diagnose_table(t, cfg.op, cell_grid, cfg.cell);
        std::printf("diagnostics: monotonicity_min=%s c0=%s c1=%s c2=%s delta2_K=%s convexity_violation=%s "
                    "grad_h_discrepancy=%s\n",
                    format_real(d.monotonicity_min).c_str(), format_real(d.c0).c_str(), format_real(d.c1).c_str(),
                    format_real(d.c2).c_str(), format_real(d.delta2_K).c_str(),
                    format_real(d.convexity_violation).c_str(), format_real(d.grad_h_discrepancy).c_str());
    }
    return 0;
}

int cmd_solve(const SweepConfig &cfg, double eps, const std::string &dir) {
    ObstacleProblem prob = make_problem(cfg, rescale(cfg.op, eps), eps);
    DiscreteSolution sol = solve_obstacle(prob, cfg.solver);
    LewyStampacchiaReport ls = lewy_stampacchia(prob, sol);
    CoincidenceSet set = coincidence(sol.u, prob.psi, default_coincidence_tau(prob.grid, sol.tol_kkt));
    std::printf("solve: eps=%s converged=%s iterations=%d tol_kkt=%s\n", format_real(eps).c_str(),
                sol.converged ? "true" : "false", sol.iterations, format_real(sol.tol_kkt).c_str());
    std::printf("kkt: max_negative_residual=%s max_complementarity=%s max_constraint_violation=%s\n",
                format_real(sol.kkt.max_negative_residual).c_str(), format_real(sol.kkt.max_complementarity).c_str(),
                format_real(sol.kkt.max_constraint_violation).c_str());
    std::printf("lewy_stampacchia: lower_violation_max=%s upper_violation_max=%s s=%s s_norm_upper=%s pass=%s\n",
                format_real(ls.lower_violation_max).c_str(), format_real(ls.upper_violation_max).c_str(),
                format_real(ls.s_exponent).c_str(), format_real(ls.s_norm_upper).c_str(), ls.pass ? "true" : "false");
    std::printf("coincidence: measure=%s nodes=%zu tau=%s\n", format_real(set.measure).c_str(), set.nodes.size(),
                format_real(set.tau).c_str());
    const std::string path = out_path(dir, cfg.name + "_solution.csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << (prob.grid.dim == 1 ? "x,u,psi,r,q\n" : "x,y,u,psi,r,q\n");
    for (std::size_t i = 0; i < prob.grid.node_count(); ++i) {
        Vec x = prob.grid.node_coord(i);
        out << format_real(x[0]) << ',';
        if (prob.grid.dim == 2) out << format_real(x[1]) << ',';
        out << format_real(sol.u[i]) << ',' << format_real(prob.psi[i]) << ',' << format_real(ls.residual[i]) << ','
            << format_real(ls.q_field[i]) << '\n';
    }
    std::printf("solution: %s\n", path.c_str());
    return sol.converged && ls.pass ? 0 : 1;
}

int cmd_sweep(const SweepConfig &cfg, const std::string &dir, const std::string &format,
              const std::string &table_path) {
    SweepOptions opts;
    if (!table_path.empty()) opts.table = load_table(table_path);
    HomogenizedOperatorTable used;
    opts.table_out = &used;
    SweepReport rep = run_sweep(cfg, opts);
    print_structural(rep.structural);
    const std::string path = out_path(dir, cfg.name + "." + format);
    emit_report(rep, format, path);
    if (table_path.empty()) save_table(used, out_path(dir, cfg.name + "_table.txt"));
    std::printf("table: hash=%s xi_max=%s retabulations=%d\n", rep.table.hash.c_str(),
                format_real(rep.table.xi_max).c_str(), rep.table.retabulations);
    std::printf("baseline: energy_0=%s measure_0=%s converged=%s\n", format_real(rep.baseline.energy_0).c_str(),
                format_real(rep.baseline.measure_0).c_str(), rep.baseline.converged ? "true" : "false");
    for (const auto &r : rep.rows)
        std::printf("eps=%s l_alpha_error=%s energy_gap=%s measure_gap=%s hausdorff=%s ls_pass=%s converged=%s\n",
                    format_real(r.eps).c_str(), format_real(r.l_alpha_error).c_str(),
                    format_real(std::abs(r.energy_eps - r.energy_0)).c_str(), format_real(r.measure_gap).c_str(),
                    format_real(r.hausdorff).c_str(), r.ls_pass ? "true" : "false", r.converged ? "true" : "false");
    std::printf("report: %s\n", path.c_str());
    return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Obstacle problems for oscillating variable-exponent operators and their homogenized limits"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format, table_path;
    double eps = -1.0;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (default: the config's output.dir)");
    };
    CLI::App *check = app.add_subcommand("check", "structural report only");
    add_common(check);
    CLI::App *cell = app.add_subcommand("cell", "tabulate the homogenized operator and export the table");
    add_common(cell);
    CLI::App *solve = app.add_subcommand("solve", "single obstacle solve with Lewy-Stampacchia report");
    add_common(solve);
    solve->add_option("--eps", eps, "oscillation scale (default: first entry of eps_list)");
    CLI::App *sweep = app.add_subcommand("sweep", "full eps sweep against the homogenized solution");
    add_common(sweep);
    sweep->add_option("--format", format, "csv or json (default: the config's output.format)")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep->add_option("--table", table_path, "reuse an exported table")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        SweepConfig cfg = load_config(config_path);
        const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
        if (*check) return cmd_check(cfg);
        if (*cell) return cmd_cell(cfg, dir);
        if (*solve) return cmd_solve(cfg, eps > 0.0 ? eps : cfg.eps_list.front(), dir);
        return cmd_sweep(cfg, dir, format.empty() ? cfg.format : format, table_path);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
