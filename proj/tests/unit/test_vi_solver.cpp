#include "homobst/analysis.hpp"
#include "homobst/cell.hpp"
#include "homobst/vi_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace homobst;

namespace {

const double pi = std::numbers::pi;

FluxOperator laplace(int dim = 1) {
    FluxOperator op;
    op.dim = dim;
    return op;
}

FluxOperator power(double p) {
    FluxOperator op;
    op.exponent = ExponentField::constant(p);
    return op;
}

double max_diff(const ScalarField &a, const ScalarField &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("operator of the zero field vanishes") {
    Grid g = Grid::dirichlet(2, 8);
    FluxOperator op = laplace(2);
    op.exponent = ExponentField::constant(3.0);
    ScalarField r = apply_operator(op, ScalarField(g));
    for (double v : r.values) CHECK(v == 0.0);
}

TEST_CASE("1D operator approximates -u'' for sin(pi x)") {
    Grid g = Grid::dirichlet(1, 512);
    ScalarField u = sample_nodes(g, [](const Vec &x) { return std::sin(pi * x[0]); });
    ScalarField r = apply_operator(laplace(), u);
    for (std::size_t i : g.interior_nodes()) {
        double exact = pi * pi * std::sin(pi * g.node_coord(i)[0]);
        CHECK(std::abs(r[i] - exact) <= 1e-3 * exact);
    }
}

TEST_CASE("second difference is exact on x(1-x)") {
    Grid g = Grid::dirichlet(1, 64);
    ScalarField u = sample_nodes(g, [](const Vec &x) { return x[0] * (1 - x[0]); });
    ScalarField r = apply_operator(laplace(), u);
    for (std::size_t i : g.interior_nodes()) CHECK(r[i] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("2D p = 2 operator is the five-point Laplacian") {
    Grid g = Grid::dirichlet(2, 12, 1.5);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ScalarField u(g);
    for (std::size_t i : g.interior_nodes()) u[i] = d(rng);
    ScalarField r = apply_operator(laplace(2), u);
    const double h2 = g.h() * g.h();
    for (std::size_t k : g.interior_nodes()) {
        auto ax = g.node_axes(k);
        int i = ax[0], j = ax[1];
        double lap = (4 * u[k] - u[g.node(i - 1, j)] - u[g.node(i + 1, j)] - u[g.node(i, j - 1)] - u[g.node(i, j + 1)]) / h2;
        CHECK(r[k] == doctest::Approx(lap).epsilon(1e-11));
    }
}

TEST_CASE("Dirichlet solve: f = 0 gives zero and f = 2 gives x(1-x)") {
    Grid g = Grid::dirichlet(1, 128);
    DiscreteSolution zero = solve_dirichlet(power(3.0), ScalarField(g));
    CHECK(zero.converged);
    CHECK(max_abs(zero.u.values) == 0.0);
    DiscreteSolution s = solve_dirichlet(laplace(), ScalarField(g, 2.0));
    CHECK(s.converged);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = g.node_coord(i)[0];
        CHECK(s.u[i] == doctest::Approx(x * (1 - x)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("p = 4 Dirichlet solve matches the first-integral solution") {
    // flux F = 1/2 - x, u' = sign(F)|F|^{1/3}
    Grid g = Grid::dirichlet(1, 1024);
    DiscreteSolution s = solve_dirichlet(power(4.0), ScalarField(g, 1.0));
    REQUIRE(s.converged);
    double err = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = g.node_coord(i)[0];
        double exact = 0.75 * (std::pow(0.5, 4.0 / 3.0) - std::pow(std::abs(0.5 - x), 4.0 / 3.0));
        err = std::max(err, std::abs(s.u[i] - exact));
    }
    CHECK(err < 1e-5);
}

TEST_CASE("obstacle below the free solution is inactive") {
    Grid g = Grid::dirichlet(1, 64);
    ObstacleProblem p{g, laplace(), ScalarField(g), ScalarField(g, -1.0), 1.0};
    DiscreteSolution s = solve_obstacle(p);
    CHECK(s.converged);
    CHECK(max_abs(s.u.values) == 0.0);
    CHECK(coincidence(s.u, p.psi, 1e-8).nodes.empty());

    ObstacleProblem q{g, laplace(), ScalarField(g, -4.0), ScalarField(g, -1.0), 1.0};
    DiscreteSolution t = solve_obstacle(q);
    CHECK(t.converged);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = g.node_coord(i)[0];
        CHECK(t.u[i] == doctest::Approx(2 * x * (x - 1)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("analytic contact problem") {
    Grid g = Grid::dirichlet(1, 512);
    ObstacleProblem p{g, laplace(), ScalarField(g, -16.0), ScalarField(g, -1.0), 1.0};
    DiscreteSolution s = solve_obstacle(p);
    REQUIRE(s.converged);
    const double x0 = 1.0 / std::sqrt(8.0);
    double err = 0.0;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = std::min(g.node_coord(i)[0], 1 - g.node_coord(i)[0]);
        double exact = x < x0 ? 8 * (x - x0) * (x - x0) - 1 : -1.0;
        err = std::max(err, std::abs(s.u[i] - exact));
    }
    CHECK(err <= 5 * g.h() * g.h() * 16);
}

namespace {

ObstacleProblem random_problem(int dim, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Grid g = Grid::dirichlet(dim, n);
    FluxOperator op;
    op.dim = dim;
    op.family = FluxFamily::weighted_px;
    op.exponent = ExponentField::from_shape(PeriodicField::sinusoidal(1.6 + u(rng), 0.3 * u(rng), 2));
    op.gamma = PeriodicField::sinusoidal(1.0, 0.5 * u(rng));
    op.eps = 0.25;
    double fa = 10 * u(rng), fp = 1 + std::floor(3 * u(rng)), pa = 0.5 * u(rng);
    ScalarField f = sample_nodes(g, [&](const Vec &x) { return -5.0 + fa * std::sin(pi * fp * x[0]); });
    ScalarField psi = sample_nodes(g, [&](const Vec &x) {
        double b = std::sin(pi * x[0]) * (dim == 2 ? std::sin(pi * x[1]) : 1.0);
        return -0.05 - pa * b + 0.1 * std::cos(3 * pi * x[0]) * b;
    });
    return {g, op, f, psi, 1.0};
}

}  // namespace

TEST_CASE("KKT conditions hold on random variable-exponent problems") {
    for (unsigned seed = 1; seed <= 6; ++seed) {
        for (int dim : {1, 2}) {
            ObstacleProblem p = random_problem(dim, dim == 1 ? 256 : 24, seed);
            DiscreteSolution s = solve_obstacle(p);
            CAPTURE(seed);
            CAPTURE(dim);
            REQUIRE(s.converged);
            CHECK(s.kkt.max_constraint_violation == 0.0);
            CHECK(s.kkt.max_negative_residual <= s.tol_kkt);
            CHECK(s.kkt.max_complementarity <= s.tol_kkt);
            for (std::size_t i : p.grid.interior_nodes()) CHECK(s.u[i] >= p.psi[i]);
        }
    }
}

TEST_CASE("Gauss-Seidel reference agrees with projected Newton") {
    for (unsigned seed = 1; seed <= 3; ++seed) {
        ObstacleProblem p = random_problem(1, 48, seed);
        DiscreteSolution a = solve_obstacle(p);
        SolverParams gs;
        gs.method = SolverMethod::gauss_seidel;
        DiscreteSolution b = solve_obstacle(p, gs);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK(max_diff(a.u, b.u) < 1e-6);
    }
    ObstacleProblem q = random_problem(2, 10, 5);
    SolverParams gs;
    gs.method = SolverMethod::gauss_seidel;
    DiscreteSolution a = solve_obstacle(q), b = solve_obstacle(q, gs);
    REQUIRE(b.converged);
    CHECK(max_diff(a.u, b.u) < 1e-6);
}

TEST_CASE("comparison in f and in the obstacle") {
    ObstacleProblem p = random_problem(1, 200, 9);
    DiscreteSolution base = solve_obstacle(p);
    REQUIRE(base.converged);
    ObstacleProblem more_f = p;
    for (double &v : more_f.f.values) v += 2.0;
    DiscreteSolution up = solve_obstacle(more_f);
    ObstacleProblem higher = p;
    for (std::size_t i = 0; i < higher.psi.size(); ++i)
        if (!p.grid.is_boundary(i)) higher.psi[i] += 0.05;
    DiscreteSolution hi = solve_obstacle(higher);
    REQUIRE(up.converged);
    REQUIRE(hi.converged);
    for (std::size_t i = 0; i < p.grid.node_count(); ++i) {
        CHECK(base.u[i] <= up.u[i] + 10 * up.tol_kkt);
        CHECK(base.u[i] <= hi.u[i] + 10 * hi.tol_kkt);
    }
}

TEST_CASE("flux field evaluates the operator at cell gradients") {
    Grid g = Grid::dirichlet(1, 32);
    ScalarField u = sample_nodes(g, [](const Vec &x) { return x[0] * (1 - x[0]); });
    VectorField s = flux_field(laplace(), u);
    for (std::size_t c = 0; c < s.values.size(); ++c)
        CHECK(s.values[c][0] == doctest::Approx(1 - 2 * g.cell_center(c)[0]).epsilon(1e-12));

    FluxOperator w;
    w.family = FluxFamily::weighted_p;
    w.gamma = PeriodicField::reciprocal_sinusoidal(2.0, 1.0);
    ScalarField ramp = sample_nodes(g, [](const Vec &x) { return x[0]; });
    VectorField t = flux_field(w, ramp);
    for (std::size_t c = 0; c < t.values.size(); ++c)
        CHECK(t.values[c][0] == doctest::Approx(w.gamma.eval(g.cell_center(c), 1)).epsilon(1e-12));
    CHECK(max_abs(std::vector<double>{flux_field(w, ScalarField(g)).values[3][0]}) == 0.0);
}

TEST_CASE("tabulated homogenized flux drives the solver") {
    FluxOperator w;
    w.family = FluxFamily::weighted_p;
    w.gamma = PeriodicField::reciprocal_sinusoidal(2.0, 1.0);
    HomogenizedOperatorTable t = tabulate(w, Grid::periodic_cell(1, 256), TableParams{});
    Grid g = Grid::dirichlet(1, 128);
    DiscreteSolution s = solve_dirichlet(t, ScalarField(g, 1.0));
    REQUIRE(s.converged);
    // a0(xi) = xi / 2, so u = x(1 - x)
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = g.node_coord(i)[0];
        CHECK(s.u[i] == doctest::Approx(x * (1 - x)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("integrability exponent rule") {
    CHECK(default_s_exponent(1, 2.0) == 1.0);
    CHECK(default_s_exponent(2, 3.0) == 1.0);
    CHECK(default_s_exponent(2, 2.0) == 1.01);
    // n = 2, alpha = 1.5: alpha' = 3, n alpha'/(n + alpha') = 6/5
    CHECK(default_s_exponent(2, 1.5) == doctest::Approx(1.01 * 1.2));
}

TEST_CASE("obstacle problems are validated") {
    Grid g = Grid::dirichlet(1, 8);
    ObstacleProblem p{g, laplace(), ScalarField(g), ScalarField(g, 0.5), 1.0};
    CHECK_THROWS_AS(solve_obstacle(p), Error);
    ObstacleProblem q{g, laplace(2), ScalarField(g), ScalarField(g, -1.0), 1.0};
    CHECK_THROWS_AS(solve_obstacle(q), Error);
    Grid c = Grid::periodic_cell(1, 8);
    ObstacleProblem r{c, laplace(), ScalarField(c), ScalarField(c, -1.0), 1.0};
    CHECK_THROWS_AS(solve_obstacle(r), Error);
    ScalarField bad(g);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(solve_dirichlet(laplace(), bad), Error);
}
