#include "homobst/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace homobst;

namespace {

ObstacleProblem contact_problem(int n) {
    Grid g = Grid::dirichlet(1, n);
    FluxOperator op;
    return {g, op, ScalarField(g, -16.0), ScalarField(g, -1.0), 1.0};
}

CoincidenceSet interval(const Grid &g, double a, double b) {
    ScalarField u(g, 1.0), psi(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        double x = g.node_coord(i)[0];
        if (x >= a - 1e-12 && x <= b + 1e-12) u[i] = 0.0;
    }
    return coincidence(u, psi, 1e-9);
}

}  // namespace

TEST_CASE("Lewy-Stampacchia on the analytic contact problem") {
    ObstacleProblem p = contact_problem(256);
    DiscreteSolution s = solve_obstacle(p);
    REQUIRE(s.converged);
    LewyStampacchiaReport ls = lewy_stampacchia(p, s);
    CHECK(ls.pass);
    CoincidenceSet c = coincidence(s.u, p.psi, default_coincidence_tau(p.grid, s.tol_kkt));
    for (std::size_t i : p.grid.interior_nodes()) {
        CHECK(ls.bound[i] == doctest::Approx(16.0));
        if (c.chi[i] == 1.0) {
            // one node at each edge of the contact set sees a free neighbour
            double x = p.grid.node_coord(i)[0];
            if (std::abs(x - 0.5) < 0.1) {
                CHECK(ls.residual[i] == doctest::Approx(16.0).epsilon(1e-9));
                CHECK(ls.q_field[i] == doctest::Approx(1.0).epsilon(1e-9));
            }
        } else {
            CHECK(std::abs(ls.q_field[i]) <= 1e-8);
        }
        CHECK(ls.q_field[i] <= c.chi[i] + 1e-8);
        CHECK(ls.q_field[i] >= -1e-8);
    }
    CHECK(ls.s_norm_upper == doctest::Approx(16.0 * (1.0 - 1.0 / 256)).epsilon(1e-9));
}

TEST_CASE("Lewy-Stampacchia without contact") {
    Grid g = Grid::dirichlet(1, 64);
    ObstacleProblem p{g, FluxOperator{}, ScalarField(g, -4.0), ScalarField(g, -1.0), 1.0};
    DiscreteSolution s = solve_obstacle(p);
    LewyStampacchiaReport ls = lewy_stampacchia(p, s);
    CHECK(ls.pass);
    CHECK(max_abs(ls.residual.values) <= s.tol_kkt);
}

TEST_CASE("coincidence sets") {
    Grid g = Grid::dirichlet(1, 100);
    CHECK(coincidence(ScalarField(g), ScalarField(g, -1.0), 1e-6).measure == 0.0);
    CoincidenceSet all = coincidence(ScalarField(g, -1.0), ScalarField(g, -1.0), 1e-6);
    CHECK(all.nodes.size() == 99);
    CHECK(all.measure == 0.01 * 99);
    CHECK_THROWS_AS(coincidence(ScalarField(g), ScalarField(g), 0.0), Error);

    ObstacleProblem p = contact_problem(1024);
    DiscreteSolution s = solve_obstacle(p);
    CoincidenceSet c = coincidence(s.u, p.psi, default_coincidence_tau(p.grid, s.tol_kkt));
    CHECK(std::abs(c.measure - (1.0 - 1.0 / std::sqrt(2.0))) <= 2 * p.grid.h());
    CHECK(c.measure == p.grid.h() * static_cast<double>(c.nodes.size()));
}

TEST_CASE("measure convergence and Hausdorff distance of interval sets") {
    Grid g = Grid::dirichlet(1, 200);
    CoincidenceSet a = interval(g, 0.3, 0.7), b = interval(g, 0.35, 0.7), e = interval(g, 2.0, 3.0);
    MeasureGap same = measure_convergence(a, a);
    CHECK(same.measure_gap == 0.0);
    CHECK(same.chi_l1_gap == 0.0);
    MeasureGap m = measure_convergence(a, b);
    CHECK(std::abs(m.measure_gap - 0.05) <= g.h());
    CHECK(std::abs(m.chi_l1_gap - 0.05) <= g.h());
    CHECK(hausdorff_distance(a, a) == 0.0);
    CHECK(std::abs(hausdorff_distance(interval(g, 0.3, 0.7), interval(g, 0.4, 0.7)) - 0.1) <= g.h());
    CHECK(hausdorff_distance(e, e) == 0.0);
    CHECK(hausdorff_distance(a, e) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(measure_convergence(a, interval(Grid::dirichlet(1, 10), 0.3, 0.7)), Error);
}

TEST_CASE("full versus empty indicator") {
    Grid g = Grid::dirichlet(1, 50);
    CoincidenceSet full = coincidence(ScalarField(g), ScalarField(g), 1e-9);
    CoincidenceSet none = coincidence(ScalarField(g, 1.0), ScalarField(g), 1e-9);
    MeasureGap m = measure_convergence(full, none);
    CHECK(m.measure_gap == doctest::Approx(1.0).epsilon(0.03));
    CHECK(m.chi_l1_gap == doctest::Approx(1.0).epsilon(0.03));
    // every Lp gap of indicators is a power of the L1 gap
    for (double p : {1.5, 2.0, 4.0}) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.node_count(); ++i) s += std::pow(std::abs(full.chi[i] - none.chi[i]), p) * g.h();
        CHECK(std::pow(s, 1.0 / p) == doctest::Approx(std::pow(m.chi_l1_gap, 1.0 / p)).epsilon(1e-14));
    }
}

TEST_CASE("energy quadrature") {
    Grid g = Grid::dirichlet(1, 64);
    FluxOperator op;
    CHECK(energy(op, ScalarField(g)) == 0.0);
    ScalarField u = sample_nodes(g, [](const Vec &x) { return x[0] * (1 - x[0]); });
    // cellwise slopes are 1 - 2 x_mid, so the midpoint quadrature of (1 - 2x)^2 has error h^2 / 3
    CHECK(energy(op, u) == doctest::Approx(1.0 / 3.0 - g.h() * g.h() / 3.0).epsilon(1e-12));
    FluxOperator w;
    w.family = FluxFamily::weighted_p;
    w.gamma = PeriodicField::reciprocal_sinusoidal(2.0, 1.0);
    double expect = 0.0;
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        double x = g.cell_center(c)[0];
        double d = 1 - 2 * x;
        expect += w.gamma.eval({x, 0.0}, 1) * d * d * g.h();
    }
    CHECK(energy(w, u) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("obstacle families") {
    Grid g = Grid::dirichlet(1, 4096);
    ScalarField psi0 = sample_nodes(g, [](const Vec &x) { return -0.5 - x[0] * (1 - x[0]); });
    for (std::size_t i = 0; i < psi0.size(); ++i)
        if (g.is_boundary(i)) psi0[i] = -0.5;
    ScalarField fixed = obstacle_family(psi0, ObstacleMode::fixed, 0.1, 1.0);
    CHECK(fixed.values == psi0.values);
    CHECK(obstacle_family(psi0, ObstacleMode::oscillatory, 0.1, 0.0).values == psi0.values);
    CHECK_THROWS_AS(obstacle_family(psi0, ObstacleMode::oscillatory, 0.1, -1.0), Error);

    // W^{1,beta} distance decays like eps^{1/2}
    auto p_cells = exponent_on_grid(g, 3.0);
    std::vector<double> dist;
    for (double eps : {1.0 / 8, 1.0 / 32, 1.0 / 128}) {
        ScalarField pe = obstacle_family(psi0, ObstacleMode::oscillatory, eps, 1.0);
        CHECK(pe[0] == psi0[0]);
        CHECK(pe[g.node_count() - 1] == psi0[g.node_count() - 1]);
        ScalarField d = pe;
        for (std::size_t i = 0; i < d.size(); ++i) d[i] -= psi0[i];
        dist.push_back(norm_w1p0(d, p_cells) + luxembourg_norm(d, p_cells));
    }
    CHECK(dist[0] / dist[1] == doctest::Approx(2.0).epsilon(0.1));
    CHECK(dist[1] / dist[2] == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("non-degeneracy margin") {
    Grid g = Grid::dirichlet(1, 64);
    FluxOperator op;
    CHECK(nondegeneracy_measure(op, ScalarField(g, -16.0), ScalarField(g, -1.0)) == 0.0);
    CHECK(nondegeneracy_measure(op, ScalarField(g, 0.0), ScalarField(g, -1.0)) == doctest::Approx(63.0 / 64));
}
