#include "homobst/analysis.hpp"

#include "homobst/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace homobst {

LewyStampacchiaReport lewy_stampacchia(const ObstacleProblem &problem, const DiscreteSolution &sol,
                                       double tol_ls) {
    const Grid &g = problem.grid;
    LewyStampacchiaReport rep;
    rep.tol = tol_ls >= 0.0 ? tol_ls : 10.0 * sol.tol_kkt;
    rep.s_exponent = problem.s_exponent;

    rep.residual = apply_operator(problem.flux, sol.u);
    ScalarField apsi = apply_operator(problem.flux, problem.psi);
    rep.bound = ScalarField(g);
    rep.q_field = ScalarField(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (g.is_boundary(i)) {
            rep.residual[i] = 0.0;
            continue;
        }
        const double r = rep.residual[i] - problem.f[i];
        const double b = std::max(apsi[i] - problem.f[i], 0.0);
        rep.residual[i] = r;
        rep.bound[i] = b;
        rep.lower_violation_max = std::max(rep.lower_violation_max, -r);
        rep.upper_violation_max = std::max(rep.upper_violation_max, r - b);
        if (b > rep.tol) rep.q_field[i] = r / b;
    }
    std::vector<double> s_cells(g.cell_count(), problem.s_exponent);
    rep.s_norm_upper = luxembourg_norm(rep.bound, s_cells);
    rep.pass = rep.lower_violation_max <= rep.tol && rep.upper_violation_max <= rep.tol;
    return rep;
}

double default_coincidence_tau(const Grid &grid, double tol_kkt) {
    return std::max(10.0 * tol_kkt, grid.h() * grid.h());
}

CoincidenceSet coincidence(const ScalarField &u, const ScalarField &psi, double tau) {
    if (!(u.grid == psi.grid)) throw Error("coincidence: grid mismatch");
    if (!(tau > 0.0)) throw Error("coincidence threshold must be positive");
    const Grid &g = u.grid;
    CoincidenceSet c;
    c.tau = tau;
    c.chi = ScalarField(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (g.is_boundary(i) || u[i] - psi[i] > tau) continue;
        c.chi[i] = 1.0;
        c.nodes.push_back(i);
    }
    c.measure = g.cell_volume() * static_cast<double>(c.nodes.size());
    return c;
}

MeasureGap measure_convergence(const CoincidenceSet &a, const CoincidenceSet &b) {
    if (!(a.chi.grid == b.chi.grid)) throw Error("measure_convergence: grid mismatch");
    MeasureGap m;
    m.measure_gap = std::abs(a.measure - b.measure);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.chi.size(); ++i) differ += a.chi[i] != b.chi[i];
    m.chi_l1_gap = a.chi.grid.cell_volume() * static_cast<double>(differ);
    return m;
}

double hausdorff_distance(const CoincidenceSet &a, const CoincidenceSet &b) {
    if (a.nodes.empty() && b.nodes.empty()) return 0.0;
    if (a.nodes.empty() || b.nodes.empty()) return std::numeric_limits<double>::infinity();
    auto coords = [](const CoincidenceSet &s) {
        std::vector<Vec> pts;
        pts.reserve(s.nodes.size());
        for (std::size_t i : s.nodes) pts.push_back(s.chi.grid.node_coord(i));
        return pts;
    };
    return kernels::hausdorff(coords(a), coords(b));
}

double energy(const FluxModel &flux, const ScalarField &u) {
    Mesh mesh(u.grid);
    DiscreteFlux bound(flux, mesh);
    return kernels::flux_work(mesh, bound, u.values, {0.0, 0.0});
}

ScalarField obstacle_family(const ScalarField &psi0, ObstacleMode mode, double eps, double amplitude) {
    if (amplitude < 0.0) throw Error("obstacle amplitude must be nonnegative");
    if (mode == ObstacleMode::fixed || amplitude == 0.0) return psi0;
    if (!(eps > 0.0)) throw Error("obstacle family needs eps > 0");
    const Grid &g = psi0.grid;
    const double pi = std::numbers::pi;
    const double scale = amplitude * std::pow(eps, 1.5);
    ScalarField out = psi0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (g.is_boundary(i)) continue;
        const Vec x = g.node_coord(i);
        double bump = std::sin(pi * x[0] / g.length);
        if (g.dim == 2) bump *= std::sin(pi * x[1] / g.length);
        out[i] += scale * std::sin(2.0 * pi * x[0] / eps) * bump;
    }
    return out;
}

double nondegeneracy_measure(const FluxModel &flux, const ScalarField &f, const ScalarField &psi, double eta) {
    const Grid &g = f.grid;
    if (eta < 0.0) {
        double fmax = 0.0;
        for (double v : f.values) fmax = std::max(fmax, std::abs(v));
        eta = 1e-6 * fmax;
    }
    ScalarField apsi = apply_operator(flux, psi);
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.node_count(); ++i)
        if (!g.is_boundary(i) && std::abs(apsi[i] - f[i]) <= eta) ++count;
    return g.cell_volume() * static_cast<double>(count);
}

}  // namespace homobst
