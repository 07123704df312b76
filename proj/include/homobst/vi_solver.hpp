#pragma once

#include "homobst/discrete_flux.hpp"
#include "homobst/grid.hpp"

#include <limits>
#include <span>
#include <vector>

namespace homobst {

/// Discrete obstacle problem  u >= psi,  A_h u - f >= 0,  (u - psi)(A_h u - f) = 0
/// on the interior nodes of a Dirichlet grid with zero boundary values.
struct ObstacleProblem {
    Grid grid;
    FluxModel flux;
    ScalarField f;
    ScalarField psi;
    /// Integrability exponent used for the L^s norm of (A psi - f)^+.
    double s_exponent = 1.0;

    void validate() const;
};

/// s > n a'/(n + a') for alpha < n, s > 1 for alpha = n, s = 1 for alpha > n; the strict
/// cases use a 1% margin.
double default_s_exponent(int dim, double alpha);

enum class SolverMethod { projected_newton, gauss_seidel };

struct SolverParams {
    SolverMethod method = SolverMethod::projected_newton;
    /// KKT tolerance relative to ||f||_inf + 1.
    double tol_rel = 1e-8;
    /// Newton iterations (projected_newton) or sweeps (gauss_seidel).
    int max_iters = 0;  // 0: method default (200 Newton steps / 1e5 sweeps)
    /// Gauss-Seidel stagnation threshold on max nodal update, relative to 1 + ||u||_inf.
    double update_tol = 1e-15;
};

struct KktMetrics {
    double max_negative_residual = 0.0;
    double max_complementarity = 0.0;
    double max_constraint_violation = 0.0;
    /// max |r| over nodes strictly above the obstacle (all nodes when unconstrained).
    double max_free_residual = 0.0;
};

struct DiscreteSolution {
    ScalarField u;
    ScalarField residual;  // A_h u - f at interior nodes, 0 on the boundary
    int iterations = 0;
    KktMetrics kkt;
    double tol_kkt = 0.0;
    bool converged = false;
};

/// KKT metrics of (u, r) against the obstacle over interior nodes.
KktMetrics kkt_metrics(const ScalarField &u, const ScalarField &r, const ScalarField *psi);

double kkt_tolerance(const ScalarField &f, const SolverParams &params);

/// Interior values of -div_h a(x, grad_h u); boundary entries are zero.
ScalarField apply_operator(const FluxModel &flux, const ScalarField &u);

/// Unconstrained problem A_h u = f with zero Dirichlet data.
DiscreteSolution solve_dirichlet(const FluxModel &flux, const ScalarField &f, const SolverParams &params = {});

DiscreteSolution solve_obstacle(const ObstacleProblem &problem, const SolverParams &params = {});

/// Projected nonlinear Gauss-Seidel with per-node safeguarded Newton; the serial reference.
DiscreteSolution solve_obstacle_gauss_seidel(const ObstacleProblem &problem, const SolverParams &params = {});

/// Per-cell sigma = a(x_cell, grad u_cell).
VectorField flux_field(const FluxModel &flux, const ScalarField &u);

namespace detail {

/// Bound-constrained minimization of  sum_e w_e Phi_e(grad_e u + shift) / |cell| - sum_i f_i u_i
/// over the nodes in `unknowns`; all other nodes stay fixed.  `lower` holds -inf where unconstrained.
struct NewtonProblem {
    const Mesh *mesh = nullptr;
    const DiscreteFlux *flux = nullptr;
    Vec shift{0.0, 0.0};
    std::vector<std::size_t> unknowns;
    std::vector<double> rhs;
    std::vector<double> lower;
    double tol = 1e-8;
    int max_iters = 200;
};

struct NewtonOutcome {
    int iterations = 0;
    bool converged = false;
};

NewtonOutcome projected_newton(const NewtonProblem &prob, std::vector<double> &u);

/// r_i = (A_h u)_i - f_i at every node (zero at Dirichlet boundary nodes).
void residual(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift,
              std::span<const double> rhs, std::span<double> r);

}  // namespace detail

}  // namespace homobst
