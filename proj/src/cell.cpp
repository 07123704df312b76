#include "homobst/cell.hpp"

#include "homobst/discrete_flux.hpp"
#include "homobst/kernels.hpp"
#include "homobst/parallel.hpp"
#include "homobst/scalar_root.hpp"
#include "homobst/vi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace homobst {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

FluxOperator cell_view(const FluxOperator &flux) {
    FluxOperator base = flux;
    base.eps = 1.0;
    base.validate();
    return base;
}

void check_cell_grid(const FluxOperator &flux, const Grid &g) {
    if (!g.periodic()) throw Error("cell problems need a periodic grid");
    if (g.dim != flux.dim) throw Error("operator and cell grid dimensions differ");
}

void subtract_mean(std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    s /= static_cast<double>(v.size());
    for (double &x : v) x -= s;
}

/// Fills flux average, density and residual of a corrector already stored in sol.v.
void finish_corrector(const FluxOperator &base, const Mesh &mesh, const DiscreteFlux &bound, CorrectorSolution &sol) {
    std::vector<Vec> fl(mesh.elements().size());
    kernels::element_fluxes(mesh, bound, sol.v.values, sol.xi, fl);
    Vec avg{0.0, 0.0};
    for (std::size_t e = 0; e < fl.size(); ++e) avg = avg + mesh.elements()[e].weight * fl[e];
    sol.flux_avg = avg;
    std::vector<double> div(mesh.grid().node_count());
    kernels::divergence(mesh, fl, div);
    sol.residual_norm = max_abs(div);
    sol.h_value = base.gradient_type() ? kernels::potential_energy(mesh, bound, sol.v.values, sol.xi) : nan_v;
}

CorrectorSolution corrector_1d(const FluxOperator &base, const Vec &xi, const Grid &g) {
    Mesh mesh(g);
    DiscreteFlux bound(base, mesh);
    std::vector<LocalFlux> lf;
    lf.reserve(mesh.elements().size());
    for (const auto &e : mesh.elements()) lf.push_back(base.at(e.x));
    const double h = g.h();
    const double target = xi[0];

    // The cell flux is constant, a(x, xi + v') = c; c solves  int a(x, .)^{-1}(c) dx = xi.
    auto eta_of = [&](std::size_t e, double c) {
        double r = lf[e].inverse_magnitude(std::abs(c));
        return c < 0.0 ? -r : r;
    };
    auto F = [&](double c) {
        double s = 0.0, ds = 0.0;
        for (std::size_t e = 0; e < lf.size(); ++e) {
            double eta = eta_of(e, c);
            s += h * eta;
            ds += h / lf[e].dmagnitude(std::abs(eta));
        }
        return std::pair{s - target, ds};
    };

    CorrectorSolution sol;
    sol.xi = xi;
    sol.v = ScalarField(g);
    double c = 0.0;
    if (target != 0.0) {
        double guess = 0.0;
        for (std::size_t e = 0; e < lf.size(); ++e) guess += h * lf[e].magnitude(std::abs(target));
        double lo = 0.0, hi = 0.0;
        auto Fonly = [&](double cc) { return F(cc).first; };
        if (!bracket_increasing(Fonly, 0.0, std::max(guess, 1e-300), lo, hi))
            throw Error("cell problem: constant-flux bracket failed (flux not invertible?)");
        auto root = safeguarded_newton(F, lo, hi, target > 0.0 ? guess : -guess,
                                       1e-14 * std::max(std::abs(lo), std::abs(hi)), 400);
        c = root.x;
        sol.iterations = root.iterations;
    }
    // Increments of v; the rounding left in their sum is spread evenly so v closes up periodically.
    std::vector<double> inc(lf.size());
    double drift = 0.0;
    for (std::size_t k = 0; k < inc.size(); ++k) {
        inc[k] = h * (eta_of(k, c) - target);
        drift += inc[k];
    }
    drift /= static_cast<double>(inc.size());
    std::vector<double> &v = sol.v.values;
    v[0] = 0.0;
    for (std::size_t k = 0; k + 1 < inc.size(); ++k) v[k + 1] = v[k] + (inc[k] - drift);
    subtract_mean(v);
    finish_corrector(base, mesh, bound, sol);
    sol.converged = true;
    return sol;
}

CorrectorSolution corrector_2d_newton(const FluxOperator &base, const Vec &xi, const Grid &g, const CellParams &params) {
    Mesh mesh(g);
    DiscreteFlux bound(base, mesh);
    double amax = 0.0;
    for (std::size_t e = 0; e < mesh.elements().size(); ++e) amax = std::max(amax, norm(bound.flux(e, xi)));
    detail::NewtonProblem P;
    P.mesh = &mesh;
    P.flux = &bound;
    P.shift = xi;
    for (std::size_t i = 1; i < g.node_count(); ++i) P.unknowns.push_back(i);
    P.rhs.assign(g.node_count(), 0.0);
    P.lower.assign(g.node_count(), -std::numeric_limits<double>::infinity());
    P.tol = params.tol_rel * (1.0 + amax);
    P.max_iters = params.max_iters > 0 ? params.max_iters : 200;

    CorrectorSolution sol;
    sol.xi = xi;
    sol.v = ScalarField(g);
    auto out = detail::projected_newton(P, sol.v.values);
    subtract_mean(sol.v.values);
    sol.iterations = out.iterations;
    finish_corrector(base, mesh, bound, sol);
    sol.converged = sol.residual_norm <= 2.0 * P.tol;
    return sol;
}

CorrectorSolution corrector_2d_gauss_seidel(const FluxOperator &base, const Vec &xi, const Grid &g,
                                            const CellParams &params) {
    Mesh mesh(g);
    DiscreteFlux bound(base, mesh);
    const auto &els = mesh.elements();
    const double inv_vol = 1.0 / g.cell_volume();
    double amax = 0.0;
    for (std::size_t e = 0; e < els.size(); ++e) amax = std::max(amax, norm(bound.flux(e, xi)));
    const double tol = params.tol_rel * (1.0 + amax);
    const int max_sweeps = params.max_iters > 0 ? params.max_iters : 200000;

    CorrectorSolution sol;
    sol.xi = xi;
    sol.v = ScalarField(g);
    std::vector<double> &v = sol.v.values;
    auto local = [&](std::size_t node, double t) {
        double saved = v[node];
        v[node] = t;
        double r = 0.0, dr = 0.0;
        for (const auto &inc : mesh.incident(node)) {
            const Element &el = els[inc.element];
            const Vec &c = el.coeff[static_cast<std::size_t>(inc.local)];
            Vec grad = mesh.element_gradient(inc.element, v, xi);
            r += el.weight * dot(bound.flux(inc.element, grad), c);
            dr += el.weight * dot(c, mat_vec(bound.jacobian(inc.element, grad), c));
        }
        v[node] = saved;
        return std::pair{r * inv_vol, dr * inv_vol};
    };
    std::vector<Vec> fl(els.size());
    std::vector<double> div(g.node_count());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            auto [r0, dr0] = local(i, v[i]);
            if (r0 == 0.0) continue;
            double step = (std::isfinite(dr0) && dr0 > 0.0) ? std::abs(r0) / dr0 : 1e-8;
            double lo = 0.0, hi = 0.0;
            auto ronly = [&](double t) { return local(i, t).first; };
            if (!bracket_increasing(ronly, v[i], std::max(step, 1e-14), lo, hi))
                throw Error("cell Gauss-Seidel: nodal bracket failed");
            v[i] = safeguarded_newton([&](double t) { return local(i, t); }, lo, hi, v[i],
                                      1e-14 * (1.0 + std::abs(v[i])))
                       .x;
        }
        subtract_mean(v);
        sol.iterations = sweep + 1;
        kernels::element_fluxes(mesh, bound, v, xi, fl);
        kernels::divergence(mesh, fl, div);
        if (max_abs(div) <= tol) break;
    }
    finish_corrector(base, mesh, bound, sol);
    sol.converged = sol.residual_norm <= tol;
    return sol;
}

}  // namespace

CorrectorSolution solve_corrector(const FluxOperator &flux, const Vec &xi, const Grid &cell_grid,
                                  const CellParams &params) {
    check_cell_grid(flux, cell_grid);
    if (!std::isfinite(xi[0]) || !std::isfinite(xi[1])) throw Error("cell problem: xi must be finite");
    FluxOperator base = cell_view(flux);
    if (cell_grid.dim == 1) return corrector_1d(base, {xi[0], 0.0}, cell_grid);
    if (params.method == CellMethod::gauss_seidel) return corrector_2d_gauss_seidel(base, xi, cell_grid, params);
    return corrector_2d_newton(base, xi, cell_grid, params);
}

Vec homogenized_flux(const FluxOperator &flux, const Vec &xi, const Grid &cell_grid, const CellParams &params) {
    auto sol = solve_corrector(flux, xi, cell_grid, params);
    if (!sol.converged) throw Error("cell problem did not converge");
    return sol.flux_avg;
}

double homogenized_density(const FluxOperator &flux, const Vec &xi, const Grid &cell_grid, const CellParams &params) {
    if (!flux.gradient_type()) throw Error("homogenized density is unsupported for the log_type family");
    auto sol = solve_corrector(flux, xi, cell_grid, params);
    if (!sol.converged) throw Error("cell problem did not converge");
    return sol.h_value;
}

std::string describe_operator(const FluxOperator &f) {
    auto field = [](const PeriodicField &p) {
        std::ostringstream os;
        os << to_string(p.kind) << "(";
        if (p.kind == FieldKind::piecewise)
            os << format_real(p.low) << "," << format_real(p.high);
        else
            os << format_real(p.base) << "," << format_real(p.amplitude);
        os << ";k=" << p.periods << ")";
        return os.str();
    };
    std::ostringstream os;
    os << "family=" << to_string(f.family) << " dim=" << f.dim << " p=" << field(f.exponent.shape)
       << " alpha=" << format_real(f.exponent.alpha) << " beta=" << format_real(f.exponent.beta);
    if (f.family == FluxFamily::weighted_p || f.family == FluxFamily::weighted_px) os << " gamma=" << field(f.gamma);
    if (f.family == FluxFamily::log_type)
        os << " gamma1=" << field(f.gamma1) << " gamma2=" << field(f.gamma2) << " gamma3=" << field(f.gamma3);
    os << " delta=" << format_real(f.delta);
    return os.str();
}

namespace {

HomogenizedOperatorTable table_layout(const FluxOperator &flux, const Grid &cell_grid, const TableParams &tp) {
    check_cell_grid(flux, cell_grid);
    if (!(tp.xi_max > 0.0)) throw Error("table xi_max must be positive");
    HomogenizedOperatorTable t;
    t.dim = flux.dim;
    t.xi_max = tp.xi_max;
    t.family = to_string(flux.family);
    t.parameters = describe_operator(flux);
    t.n_cell = cell_grid.n;
    t.alpha = flux.exponent.alpha;
    t.beta = flux.family == FluxFamily::weighted_p ? flux.exponent.alpha : flux.exponent.beta;
    t.has_density = flux.gradient_type();
    if (flux.dim == 1) {
        if (tp.samples_1d < 2) throw Error("table needs at least 2 samples");
        const int m = tp.samples_1d;
        t.n_theta = 1;
        t.radii.resize(static_cast<std::size_t>(m));
        for (int k = 0; k < m; ++k) t.radii[static_cast<std::size_t>(k)] = tp.xi_max * k / (m - 1);
        t.radii.back() = tp.xi_max;
        for (double r : t.radii) t.xi_samples.push_back({r, 0.0});
    } else {
        if (tp.n_r < 2 || tp.n_theta < 3) throw Error("polar table needs n_r >= 2 and n_theta >= 3");
        if (!(tp.r_min_ratio > 0.0 && tp.r_min_ratio < 1.0)) throw Error("r_min_ratio must lie in (0, 1)");
        t.n_theta = tp.n_theta;
        const double rmin = tp.r_min_ratio * tp.xi_max;
        t.radii.resize(static_cast<std::size_t>(tp.n_r));
        for (int i = 0; i < tp.n_r; ++i)
            t.radii[static_cast<std::size_t>(i)] = rmin * std::pow(tp.xi_max / rmin, static_cast<double>(i) / (tp.n_r - 1));
        t.radii.front() = rmin;
        t.radii.back() = tp.xi_max;
        for (double r : t.radii)
            for (int j = 0; j < tp.n_theta; ++j) {
                double th = 2.0 * std::numbers::pi * j / tp.n_theta;
                t.xi_samples.push_back(j == 0 ? Vec{r, 0.0} : Vec{r * std::cos(th), r * std::sin(th)});
            }
    }
    t.a0_values.assign(t.xi_samples.size(), Vec{0.0, 0.0});
    if (t.has_density) t.h_values.assign(t.xi_samples.size(), 0.0);
    return t;
}

void fill_sample(HomogenizedOperatorTable &t, std::size_t k, const FluxOperator &flux, const Grid &cell_grid,
                 const CellParams &params) {
    const Vec xi = t.xi_samples[k];
    if (xi[0] == 0.0 && xi[1] == 0.0) return;  // a0(0) = 0 and h(0) = 0 for every family here
    auto sol = solve_corrector(flux, xi, cell_grid, params);
    if (!sol.converged || !std::isfinite(sol.flux_avg[0]) || !std::isfinite(sol.flux_avg[1])) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "tabulation failed at xi = (%.17g, %.17g)", xi[0], xi[1]);
        throw Error(buf);
    }
    t.a0_values[k] = sol.flux_avg;
    if (t.has_density) t.h_values[k] = sol.h_value;
}

}  // namespace

HomogenizedOperatorTable tabulate(const FluxOperator &flux, const Grid &cell_grid, const TableParams &tp,
                                  const CellParams &params) {
    HomogenizedOperatorTable t = table_layout(flux, cell_grid, tp);
    parallel_for(static_cast<long>(t.sample_count()),
                 [&](long k) { fill_sample(t, static_cast<std::size_t>(k), flux, cell_grid, params); });
    t.finalize();
    return t;
}

HomogenizedOperatorTable tabulate_serial(const FluxOperator &flux, const Grid &cell_grid, const TableParams &tp,
                                         const CellParams &params) {
    HomogenizedOperatorTable t = table_layout(flux, cell_grid, tp);
    for (std::size_t k = 0; k < t.sample_count(); ++k) fill_sample(t, k, flux, cell_grid, params);
    t.finalize();
    return t;
}

TableDiagnostics diagnose_table(const HomogenizedOperatorTable &t, const FluxOperator &flux, const Grid &cell_grid,
                                const CellParams &params) {
    if (!t.has_density) throw Error("diagnostics need a gradient-type table");
    TableDiagnostics d;
    const std::size_t n = t.sample_count();
    const double inf = std::numeric_limits<double>::infinity();

    d.monotonicity_min = inf;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            d.monotonicity_min = std::min(d.monotonicity_min, dot(t.a0_values[a] - t.a0_values[b], t.xi_samples[a] - t.xi_samples[b]));

    d.c0 = inf;
    d.c1 = inf;
    d.c2 = -inf;
    for (std::size_t k = 0; k < n; ++k) {
        const double h = t.h_values[k];
        const double r = norm(t.xi_samples[k]);
        if (h > 1.0) d.c0 = std::min(d.c0, dot(t.a0_values[k], t.xi_samples[k]) / (h - 1.0));
        if (r > 0.0) {
            d.c1 = std::min(d.c1, (h + 1.0) / std::pow(r, t.alpha));
            d.c2 = std::max(d.c2, (h - 1.0) / std::pow(r, t.beta));
        }
    }

    auto h_at = [&](const Vec &xi) { return homogenized_density(flux, xi, cell_grid, params); };

    // Delta_2: h(2 xi) <= K (h(xi) + 1)
    std::vector<double> ratio(n, 0.0);
    parallel_for(static_cast<long>(n), [&](long k) {
        auto uk = static_cast<std::size_t>(k);
        ratio[uk] = h_at(2.0 * t.xi_samples[uk]) / (t.h_values[uk] + 1.0);
    });
    d.delta2_K = *std::max_element(ratio.begin(), ratio.end());

    double conv = -inf, grad_gap = 0.0;
    if (t.dim == 1) {
        for (std::size_t k = 1; k + 1 < n; ++k)
            conv = std::max(conv, t.h_values[k] - 0.5 * (t.h_values[k - 1] + t.h_values[k + 1]));
        // the triple (-xi_1, 0, xi_1) through the odd extension
        conv = std::max(conv, t.h_values[0] - t.h_values[1]);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            double fd = (t.h_values[k + 1] - t.h_values[k - 1]) / (t.radii[k + 1] - t.radii[k - 1]);
            grad_gap = std::max(grad_gap, std::abs(fd - t.a0_values[k][0]) / (1.0 + std::abs(t.a0_values[k][0])));
        }
    } else {
        const auto nt = static_cast<std::size_t>(t.n_theta);
        const std::size_t nr = t.radii.size();
        std::vector<double> viol(n, -inf), gap(n, 0.0);
        parallel_for(static_cast<long>(n), [&](long kk) {
            auto k = static_cast<std::size_t>(kk);
            std::size_t i = k / nt, j = k % nt;
            // along the ray and along the ring
            double v = -inf;
            if (i + 1 < nr) {
                std::size_t k2 = (i + 1) * nt + j;
                v = std::max(v, h_at(0.5 * (t.xi_samples[k] + t.xi_samples[k2])) - 0.5 * (t.h_values[k] + t.h_values[k2]));
            }
            std::size_t k3 = i * nt + (j + 1) % nt;
            v = std::max(v, h_at(0.5 * (t.xi_samples[k] + t.xi_samples[k3])) - 0.5 * (t.h_values[k] + t.h_values[k3]));
            viol[k] = v;
            if (i == nr / 2) {
                double s = 1e-4 * t.radii[i];
                Vec g{0.0, 0.0};
                for (int c = 0; c < 2; ++c) {
                    Vec e{0.0, 0.0};
                    e[static_cast<std::size_t>(c)] = s;
                    g[static_cast<std::size_t>(c)] = (h_at(t.xi_samples[k] + e) - h_at(t.xi_samples[k] - e)) / (2.0 * s);
                }
                gap[k] = norm(g - t.a0_values[k]) / (1.0 + norm(t.a0_values[k]));
            }
        });
        conv = *std::max_element(viol.begin(), viol.end());
        grad_gap = *std::max_element(gap.begin(), gap.end());
    }
    d.convexity_violation = conv;
    d.grad_h_discrepancy = grad_gap;
    return d;
}

}  // namespace homobst
