#include "homobst/vi_solver.hpp"

#include "homobst/kernels.hpp"
#include "homobst/scalar_root.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>

namespace homobst {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

double interior_max_abs(const ScalarField &f) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!f.grid.is_boundary(i)) m = std::max(m, std::abs(f[i]));
    return m;
}

}  // namespace

void ObstacleProblem::validate() const {
    if (grid.periodic()) throw Error("obstacle problems need a Dirichlet grid");
    if (!(f.grid == grid) || !(psi.grid == grid)) throw Error("obstacle problem fields live on a different grid");
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
        if (!std::isfinite(f[i])) throw Error("right-hand side is not finite");
        if (!std::isfinite(psi[i])) throw Error("obstacle is not finite");
        if (grid.is_boundary(i) && psi[i] > 0.0) throw Error("obstacle must be <= 0 on the boundary");
    }
    if (const auto *op = std::get_if<FluxOperator>(&flux)) {
        op->validate();
        if (op->dim != grid.dim) throw Error("operator and grid dimensions differ");
    } else if (std::get<HomogenizedOperatorTable>(flux).dim != grid.dim) {
        throw Error("table and grid dimensions differ");
    }
}

double default_s_exponent(int dim, double alpha) {
    const double n = dim;
    if (alpha > n) return 1.0;
    if (alpha == n) return 1.01;
    const double ap = alpha / (alpha - 1.0);
    return 1.01 * std::max(1.0, n * ap / (n + ap));
}

double kkt_tolerance(const ScalarField &f, const SolverParams &params) {
    return params.tol_rel * (interior_max_abs(f) + 1.0);
}

KktMetrics kkt_metrics(const ScalarField &u, const ScalarField &r, const ScalarField *psi) {
    KktMetrics k;
    const Grid &g = u.grid;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (g.is_boundary(i)) continue;
        k.max_negative_residual = std::max(k.max_negative_residual, -r[i]);
        if (psi) {
            double gap = u[i] - (*psi)[i];
            k.max_constraint_violation = std::max(k.max_constraint_violation, -gap);
            k.max_complementarity = std::max(k.max_complementarity, gap * std::max(r[i], 0.0));
            if (gap > 0.0) k.max_free_residual = std::max(k.max_free_residual, std::abs(r[i]));
        } else {
            k.max_free_residual = std::max(k.max_free_residual, std::abs(r[i]));
        }
    }
    return k;
}

ScalarField apply_operator(const FluxModel &flux, const ScalarField &u) {
    Mesh mesh(u.grid);
    DiscreteFlux bound(flux, mesh);
    std::vector<Vec> fl(mesh.elements().size());
    kernels::element_fluxes(mesh, bound, u.values, {0.0, 0.0}, fl);
    ScalarField out(u.grid);
    kernels::divergence(mesh, fl, out.values);
    return out;
}

VectorField flux_field(const FluxModel &flux, const ScalarField &u) {
    VectorField grad = gradient(u);
    VectorField out(u.grid);
    for (std::size_t c = 0; c < grad.values.size(); ++c)
        out.values[c] = eval_model(flux, u.grid.cell_center(c), grad.values[c]);
    return out;
}

namespace detail {

void residual(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift,
              std::span<const double> rhs, std::span<double> r) {
    std::vector<Vec> fl(mesh.elements().size());
    kernels::element_fluxes(mesh, flux, u, shift, fl);
    kernels::divergence(mesh, fl, r);
    const Grid &g = mesh.grid();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!g.is_boundary(i)) r[i] -= rhs[i];
}

NewtonOutcome projected_newton(const NewtonProblem &P, std::vector<double> &u) {
    const Mesh &mesh = *P.mesh;
    const auto &els = mesh.elements();
    const std::size_t nn = mesh.grid().node_count();
    const std::size_t m = P.unknowns.size();
    const double inv_vol = 1.0 / mesh.grid().cell_volume();

    std::vector<long> slot(nn, -1);
    for (std::size_t k = 0; k < m; ++k) slot[P.unknowns[k]] = static_cast<long>(k);
    for (std::size_t i : P.unknowns) u[i] = std::max(u[i], P.lower[i]);

    std::vector<double> r(nn), rt(nn), ut(nn);
    std::vector<Mat2> jac(els.size());
    std::vector<double> diag(m), dir(m);
    std::vector<char> active(m);

    auto energy = [&](const std::vector<double> &v) {
        double e = kernels::potential_energy(mesh, *P.flux, v, P.shift) * inv_vol;
        for (std::size_t i : P.unknowns) e -= P.rhs[i] * v[i];
        return e;
    };
    auto compute_residual = [&](const std::vector<double> &v, std::vector<double> &rr) {
        residual(mesh, *P.flux, v, P.shift, P.rhs, rr);
    };
    auto satisfied = [&](const std::vector<double> &v, const std::vector<double> &rr) {
        for (std::size_t i : P.unknowns) {
            if (std::isfinite(P.lower[i])) {
                if (rr[i] < -P.tol) return false;
                if ((v[i] - P.lower[i]) * std::max(rr[i], 0.0) > P.tol) return false;
            } else if (std::abs(rr[i]) > P.tol) {
                return false;
            }
        }
        return true;
    };
    auto merit = [&](const std::vector<double> &v, const std::vector<double> &rr) {
        double w = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t i = P.unknowns[k];
            double step = rr[i] / diag[k];
            double nat = std::isfinite(P.lower[i]) ? std::min(v[i] - P.lower[i], step) : step;
            w = std::max(w, std::abs(nat));
        }
        return w;
    };

    compute_residual(u, r);
    NewtonOutcome out;
    for (int it = 0; it < P.max_iters; ++it) {
        out.iterations = it;
        if (satisfied(u, r)) {
            out.converged = true;
            return out;
        }

        kernels::element_jacobians(mesh, *P.flux, u, P.shift, 0.0, jac);
        double scale = 0.0;
        for (const Mat2 &J : jac) scale = std::max({scale, J[0], J[3]});
        const double jfloor = std::max(1e-10 * scale, 1e-14);
        for (Mat2 &J : jac) J = kernels::floor_eigenvalues(J, jfloor);

        std::fill(diag.begin(), diag.end(), 0.0);
        for (std::size_t e = 0; e < els.size(); ++e) {
            const Element &el = els[e];
            for (int a = 0; a < el.count; ++a) {
                long s = slot[el.nodes[static_cast<std::size_t>(a)]];
                if (s < 0) continue;
                const Vec &c = el.coeff[static_cast<std::size_t>(a)];
                diag[static_cast<std::size_t>(s)] += el.weight * inv_vol * dot(c, mat_vec(jac[e], c));
            }
        }

        // Semismooth active set on min(u - lower, D^{-1} r) = 0: active nodes move onto the bound.
        const double w0 = merit(u, r);
        std::vector<long> fidx(m, -1);
        long nfree = 0;
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t i = P.unknowns[k];
            active[k] = std::isfinite(P.lower[i]) && u[i] - P.lower[i] <= r[i] / diag[k];
            if (active[k]) {
                dir[k] = P.lower[i] - u[i];
            } else {
                dir[k] = 0.0;
                fidx[k] = nfree++;
            }
        }

        if (nfree > 0) {
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(els.size() * 9);
            Eigen::VectorXd rhs(nfree);
            for (std::size_t k = 0; k < m; ++k)
                if (fidx[k] >= 0) rhs[fidx[k]] = -r[P.unknowns[k]];
            for (std::size_t e = 0; e < els.size(); ++e) {
                const Element &el = els[e];
                for (int a = 0; a < el.count; ++a) {
                    long sa = slot[el.nodes[static_cast<std::size_t>(a)]];
                    if (sa < 0 || fidx[static_cast<std::size_t>(sa)] < 0) continue;
                    const long fa = fidx[static_cast<std::size_t>(sa)];
                    Vec ja = mat_vec(jac[e], el.coeff[static_cast<std::size_t>(a)]);
                    for (int b = 0; b < el.count; ++b) {
                        long sb = slot[el.nodes[static_cast<std::size_t>(b)]];
                        if (sb < 0) continue;
                        double hab = el.weight * inv_vol * dot(el.coeff[static_cast<std::size_t>(b)], ja);
                        long fb = fidx[static_cast<std::size_t>(sb)];
                        if (fb >= 0)
                            trip.emplace_back(fa, fb, hab);
                        else
                            rhs[fa] -= hab * dir[static_cast<std::size_t>(sb)];
                    }
                }
            }
            Eigen::SparseMatrix<double> H(nfree, nfree);
            H.setFromTriplets(trip.begin(), trip.end());
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
            Eigen::VectorXd sol;
            double mu = 0.0;
            for (int attempt = 0; attempt < 8; ++attempt) {
                Eigen::SparseMatrix<double> Hs = H;
                if (mu > 0.0)
                    for (std::size_t k = 0; k < m; ++k)
                        if (fidx[k] >= 0) Hs.coeffRef(fidx[k], fidx[k]) += mu * diag[k];
                ldlt.compute(Hs);
                if (ldlt.info() == Eigen::Success) {
                    sol = ldlt.solve(rhs);
                    if (ldlt.info() == Eigen::Success && sol.allFinite()) break;
                }
                mu = mu == 0.0 ? 1e-8 : mu * 100.0;
                sol.resize(0);
            }
            if (sol.size() != nfree) return out;
            for (std::size_t k = 0; k < m; ++k)
                if (fidx[k] >= 0) dir[k] = sol[fidx[k]];
        }

        // Projected Armijo search; the full step is also accepted when it halves the natural residual.
        const double J0 = energy(u);
        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
            ut = u;
            double pred = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                std::size_t i = P.unknowns[k];
                ut[i] = std::max(P.lower[i], u[i] + t * dir[k]);
                pred += r[i] * (u[i] - ut[i]);
            }
            double Jt;
            try {
                Jt = energy(ut);
            } catch (const TableRangeError &) {
                continue;
            }
            double decrease = J0 - Jt;
            if (decrease >= 1e-4 * pred && decrease > 0.0) accepted = true;
            if (ls == 0) {
                try {
                    compute_residual(ut, rt);
                    if (!accepted && merit(ut, rt) <= 0.5 * w0) accepted = true;
                } catch (const TableRangeError &) {
                    accepted = false;
                    continue;
                }
                if (accepted) {
                    u.swap(ut);
                    r.swap(rt);
                    break;
                }
            } else if (accepted) {
                u.swap(ut);
                compute_residual(u, r);
            }
        }
        if (!accepted) {
            out.iterations = it + 1;
            out.converged = satisfied(u, r);
            return out;
        }
    }
    out.iterations = P.max_iters;
    out.converged = satisfied(u, r);
    return out;
}

}  // namespace detail

namespace {

DiscreteSolution finish_solution(const Mesh &mesh, const DiscreteFlux &bound, std::vector<double> u,
                                 const ScalarField &f, const ScalarField *psi, double tol, int iterations) {
    DiscreteSolution sol;
    sol.u = ScalarField(mesh.grid());
    sol.u.values = std::move(u);
    sol.residual = ScalarField(mesh.grid());
    detail::residual(mesh, bound, sol.u.values, {0.0, 0.0}, f.values, sol.residual.values);
    sol.kkt = kkt_metrics(sol.u, sol.residual, psi);
    sol.tol_kkt = tol;
    sol.iterations = iterations;
    if (psi) {
        sol.converged = sol.kkt.max_constraint_violation <= 0.0 && sol.kkt.max_negative_residual <= tol &&
                        sol.kkt.max_complementarity <= tol;
    } else {
        sol.converged = sol.kkt.max_free_residual <= tol;
    }
    return sol;
}

DiscreteSolution newton_solve(const FluxModel &flux, const ScalarField &f, const ScalarField *psi,
                              const SolverParams &params);

ScalarField inject(const ScalarField &fine, const Grid &coarse) {
    ScalarField c(coarse);
    for (std::size_t k = 0; k < c.size(); ++k) {
        auto ax = coarse.node_axes(k);
        c[k] = fine[fine.grid.node(2 * ax[0], 2 * ax[1])];
    }
    return c;
}

std::vector<double> prolong(const ScalarField &coarse, const Grid &fine) {
    std::vector<double> u(fine.node_count(), 0.0);
    auto at = [&](int i, int j) { return coarse[coarse.grid.node(i, j)]; };
    for (std::size_t k = 0; k < u.size(); ++k) {
        auto ax = fine.node_axes(k);
        const int i = ax[0] / 2, j = ax[1] / 2, di = ax[0] % 2, dj = ax[1] % 2;
        if (fine.dim == 1) {
            u[k] = di ? 0.5 * (at(i, 0) + at(i + 1, 0)) : at(i, 0);
        } else {
            double a = at(i, j);
            double b = di ? at(i + 1, j) : a;
            double c = dj ? at(i, j + 1) : a;
            double d = (di && dj) ? at(i + 1, j + 1) : (di ? b : c);
            u[k] = 0.25 * (a + b + c + d);
        }
    }
    return u;
}

/// Coarse-to-fine start: the solution on the grid with half the cells, prolonged and made admissible.
std::vector<double> initial_guess(const FluxModel &flux, const ScalarField &f, const ScalarField *psi,
                                  const SolverParams &params) {
    const Grid &grid = f.grid;
    std::vector<double> u(grid.node_count(), 0.0);
    bool seeded = false;
    if (grid.n % 2 == 0 && grid.n >= 16) {
        Grid coarse = Grid::dirichlet(grid.dim, grid.n / 2, grid.length);
        ScalarField fc = inject(f, coarse);
        ScalarField pc = psi ? inject(*psi, coarse) : ScalarField();
        try {
            DiscreteSolution s = newton_solve(flux, fc, psi ? &pc : nullptr, params);
            u = prolong(s.u, grid);
            seeded = true;
        } catch (const Error &) {
        }
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (grid.is_boundary(i)) {
            u[i] = 0.0;
        } else if (psi) {
            u[i] = seeded ? std::max(u[i], (*psi)[i]) : std::max((*psi)[i], 0.0);
        }
    }
    return u;
}

DiscreteSolution newton_solve(const FluxModel &flux, const ScalarField &f, const ScalarField *psi,
                              const SolverParams &params) {
    const Grid &grid = f.grid;
    if (grid.periodic()) throw Error("Dirichlet solves need a Dirichlet grid");
    Mesh mesh(grid);
    DiscreteFlux bound(flux, mesh);
    const double tol = kkt_tolerance(f, params);

    detail::NewtonProblem P;
    P.mesh = &mesh;
    P.flux = &bound;
    P.unknowns = grid.interior_nodes();
    P.rhs = f.values;
    P.lower.assign(grid.node_count(), neg_inf);
    if (psi)
        for (std::size_t i : P.unknowns) P.lower[i] = (*psi)[i];
    P.tol = tol;
    P.max_iters = params.max_iters > 0 ? params.max_iters : 200;

    std::vector<double> u = initial_guess(flux, f, psi, params);
    auto res = detail::projected_newton(P, u);
    return finish_solution(mesh, bound, std::move(u), f, psi, tol, res.iterations);
}

}  // namespace

DiscreteSolution solve_dirichlet(const FluxModel &flux, const ScalarField &f, const SolverParams &params) {
    for (double v : f.values)
        if (!std::isfinite(v)) throw Error("right-hand side is not finite");
    return newton_solve(flux, f, nullptr, params);
}

DiscreteSolution solve_obstacle(const ObstacleProblem &problem, const SolverParams &params) {
    problem.validate();
    if (params.method == SolverMethod::gauss_seidel) return solve_obstacle_gauss_seidel(problem, params);
    return newton_solve(problem.flux, problem.f, &problem.psi, params);
}

DiscreteSolution solve_obstacle_gauss_seidel(const ObstacleProblem &problem, const SolverParams &params) {
    problem.validate();
    const Grid &grid = problem.grid;
    Mesh mesh(grid);
    DiscreteFlux bound(problem.flux, mesh);
    const auto &els = mesh.elements();
    const double inv_vol = 1.0 / grid.cell_volume();
    const double tol = kkt_tolerance(problem.f, params);
    const int max_sweeps = params.max_iters > 0 ? params.max_iters : 100000;
    const auto interior = grid.interior_nodes();

    std::vector<double> u(grid.node_count(), 0.0);
    for (std::size_t i : interior) u[i] = std::max(problem.psi[i], 0.0);

    // r_i and dr_i/du_i with u_i replaced by t; only the incident elements change.
    auto local = [&](std::size_t node, double t) {
        double saved = u[node];
        u[node] = t;
        double g = 0.0, dg = 0.0;
        for (const auto &inc : mesh.incident(node)) {
            const Element &el = els[inc.element];
            const Vec &c = el.coeff[static_cast<std::size_t>(inc.local)];
            Vec xi = mesh.element_gradient(inc.element, u);
            g += el.weight * dot(bound.flux(inc.element, xi), c);
            dg += el.weight * dot(c, mat_vec(bound.jacobian(inc.element, xi), c));
        }
        u[node] = saved;
        return std::pair{g * inv_vol - problem.f[node], dg * inv_vol};
    };

    std::vector<double> r(grid.node_count());
    ScalarField uf(grid), rf(grid);
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_update = 0.0, umax = 0.0;
        for (std::size_t i : interior) {
            const double old = u[i];
            double next;
            if (local(i, problem.psi[i]).first >= 0.0) {
                next = problem.psi[i];
            } else {
                auto [g0, dg0] = local(i, old);
                double step = (std::isfinite(dg0) && dg0 > 0.0) ? std::abs(g0) / dg0 : 0.0;
                step = std::max(step, 1e-8 * (1.0 + std::abs(old)));
                double lo = 0.0, hi = 0.0;
                auto gonly = [&](double t) { return local(i, t).first; };
                double start = std::max(old, problem.psi[i]);
                if (!bracket_increasing(gonly, start, step, lo, hi)) throw Error("Gauss-Seidel: nodal bracket failed");
                auto root = safeguarded_newton([&](double t) { return local(i, t); }, lo, hi, start,
                                               1e-14 * (1.0 + std::abs(start)));
                next = std::max(root.x, problem.psi[i]);
            }
            u[i] = next;
            max_update = std::max(max_update, std::abs(next - old));
            umax = std::max(umax, std::abs(next));
        }
        detail::residual(mesh, bound, u, {0.0, 0.0}, problem.f.values, r);
        uf.values = u;
        rf.values = r;
        KktMetrics k = kkt_metrics(uf, rf, &problem.psi);
        if (k.max_constraint_violation <= 0.0 && k.max_negative_residual <= tol && k.max_complementarity <= tol) {
            ++sweep;
            break;
        }
        if (max_update < params.update_tol * (1.0 + umax)) {
            ++sweep;
            break;
        }
    }
    return finish_solution(mesh, bound, std::move(u), problem.f, &problem.psi, tol, sweep);
}

}  // namespace homobst
