#pragma once

#include "homobst/vi_solver.hpp"

#include <vector>

namespace homobst {

/// f <= A_h u <= f + (A_h psi - f)^+ at the interior nodes.
struct LewyStampacchiaReport {
    double lower_violation_max = 0.0;  // max(-r, 0)
    double upper_violation_max = 0.0;  // max(r - (A_h psi - f)^+, 0)
    ScalarField residual;  // r = A_h u - f
    ScalarField bound;  // (A_h psi - f)^+
    ScalarField q_field;  // r / bound where bound > tol, else 0
    double s_exponent = 1.0;
    double s_norm_upper = 0.0;  // discrete L^s norm of the bound
    double tol = 0.0;
    bool pass = false;
};

/// tol_ls defaults to 10 tol_kkt when negative.
LewyStampacchiaReport lewy_stampacchia(const ObstacleProblem &problem, const DiscreteSolution &sol,
                                       double tol_ls = -1.0);

struct CoincidenceSet {
    ScalarField chi;
    double measure = 0.0;
    std::vector<std::size_t> nodes;  // ascending
    double tau = 0.0;
};

/// max(10 tol_kkt, h^2).
double default_coincidence_tau(const Grid &grid, double tol_kkt);

CoincidenceSet coincidence(const ScalarField &u, const ScalarField &psi, double tau);

struct MeasureGap {
    double measure_gap = 0.0;
    double chi_l1_gap = 0.0;
};

MeasureGap measure_convergence(const CoincidenceSet &a, const CoincidenceSet &b);

/// Symmetrized Hausdorff distance of the node sets; 0 when both are empty, +inf when one is.
double hausdorff_distance(const CoincidenceSet &a, const CoincidenceSet &b);

/// Quadrature of a(x, grad u) . grad u over the domain.
double energy(const FluxModel &flux, const ScalarField &u);

enum class ObstacleMode { fixed, oscillatory };

/// psi0 + amplitude eps^{3/2} sin(2 pi x_1 / eps) b(x), with b = prod_i sin(pi x_i / L) vanishing on the boundary.
ScalarField obstacle_family(const ScalarField &psi0, ObstacleMode mode, double eps, double amplitude);

/// Measure of interior nodes with |(A_h psi - f)_i| <= eta; eta defaults to 1e-6 ||f||_inf when negative.
double nondegeneracy_measure(const FluxModel &flux, const ScalarField &f, const ScalarField &psi,
                             double eta = -1.0);

struct ConvergenceRow {
    double eps = 0.0;
    double l_alpha_error = 0.0;
    double grad_l_alpha_error = 0.0;
    double energy_eps = 0.0;
    double energy_0 = 0.0;
    double coincidence_measure_eps = 0.0;
    double measure_gap = 0.0;
    double chi_l1_gap = 0.0;
    double hausdorff = 0.0;
    bool ls_pass = false;
    double s_norm_upper = 0.0;
    bool converged = false;
    int iterations = 0;
};

}  // namespace homobst
