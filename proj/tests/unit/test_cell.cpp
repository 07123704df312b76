#include "homobst/cell.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace homobst;

namespace {

FluxOperator harmonic() {
    FluxOperator w;
    w.family = FluxFamily::weighted_p;
    w.gamma = PeriodicField::reciprocal_sinusoidal(2.0, 1.0);
    return w;
}

FluxOperator power(double p, int dim = 1) {
    FluxOperator op;
    op.dim = dim;
    op.exponent = ExponentField::constant(p);
    return op;
}

double mean(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("x-independent operators have a vanishing corrector") {
    for (int dim : {1, 2}) {
        for (double p : {1.7, 2.0, 3.0}) {
            FluxOperator op = power(p, dim);
            Vec xi = dim == 1 ? Vec{1.3, 0.0} : Vec{0.6, -1.1};
            CorrectorSolution s = solve_corrector(op, xi, Grid::periodic_cell(dim, dim == 1 ? 64 : 16));
            CHECK(s.converged);
            CHECK(max_abs(s.v.values) <= 1e-10);
            Vec a = op.eval({0.0, 0.0}, xi);
            CHECK(s.flux_avg[0] == doctest::Approx(a[0]).epsilon(1e-8));
            CHECK(s.flux_avg[1] == doctest::Approx(a[1]).epsilon(1e-8));
        }
    }
}

TEST_CASE("harmonic-mean oracle in 1D") {
    Grid cell = Grid::periodic_cell(1, 512);
    CHECK(homogenized_flux(harmonic(), {1.0, 0.0}, cell)[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(homogenized_flux(harmonic(), {2.0, 0.0}, cell)[0] == doctest::Approx(1.0).epsilon(1e-12));
    FluxOperator w = harmonic();
    w.exponent = ExponentField::constant(3.0);
    w.gamma = PeriodicField::constant(1.0);
    CHECK(homogenized_flux(w, {-1.5, 0.0}, cell)[0] == doctest::Approx(-2.25).epsilon(1e-12));
}

TEST_CASE("1D variable exponent: constant-flux quadrature oracle") {
    FluxOperator op;
    op.exponent = ExponentField::from_shape(PeriodicField::sinusoidal(2.5, 0.8));
    op.delta = 0.0;
    const double xi = 0.9;
    // c solves int c^{1/(p(x)-1)} dx = xi; bisection with an independent midpoint quadrature
    auto integral = [&](double c) {
        const int n = 4096;
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
            double p = 2.5 + 0.8 * std::sin(2 * std::numbers::pi * (k + 0.5) / n);
            s += std::pow(c, 1.0 / (p - 1.0));
        }
        return s / n;
    };
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (integral(mid) < xi ? lo : hi) = mid;
    }
    CorrectorSolution s = solve_corrector(op, {xi, 0.0}, Grid::periodic_cell(1, 4096));
    CHECK(s.flux_avg[0] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    CHECK(std::abs(mean(s.v.values)) <= 1e-12);
    CHECK(s.residual_norm <= 1e-8);
}

TEST_CASE("zero macroscopic gradient") {
    for (int dim : {1, 2}) {
        FluxOperator op = harmonic();
        op.dim = dim;
        CorrectorSolution s = solve_corrector(op, {0.0, 0.0}, Grid::periodic_cell(dim, 16));
        CHECK(max_abs(s.v.values) == 0.0);
        CHECK(s.flux_avg[0] == 0.0);
        CHECK(s.h_value == 0.0);
    }
}

TEST_CASE("homogenized density for x-independent power laws") {
    Grid c1 = Grid::periodic_cell(1, 32), c2 = Grid::periodic_cell(2, 8);
    CHECK(homogenized_density(power(2.0), {1.5, 0.0}, c1) == doctest::Approx(1.125).epsilon(1e-12));
    CHECK(homogenized_density(power(4.0), {1.0, 0.0}, c1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(homogenized_density(power(2.0, 2), {0.3, 0.4}, c2) == doctest::Approx(0.125).epsilon(1e-12));
    FluxOperator log;
    log.family = FluxFamily::log_type;
    CHECK_THROWS_AS(homogenized_density(log, {1.0, 0.0}, c1), Error);
    CHECK(std::isnan(solve_corrector(log, {1.0, 0.0}, c1).h_value));
}

TEST_CASE("cell problems need a periodic grid of matching dimension") {
    CHECK_THROWS_AS(solve_corrector(power(2.0), {1.0, 0.0}, Grid::dirichlet(1, 8)), Error);
    CHECK_THROWS_AS(solve_corrector(power(2.0), {1.0, 0.0}, Grid::periodic_cell(2, 8)), Error);
    CHECK_THROWS_AS(solve_corrector(power(2.0), {std::nan(""), 0.0}, Grid::periodic_cell(1, 8)), Error);
}

TEST_CASE("non-invertible 1D flux is reported") {
    FluxOperator w = harmonic();
    w.gamma = PeriodicField::sinusoidal(0.5, 1.0);
    CHECK_THROWS_AS(solve_corrector(w, {1.0, 0.0}, Grid::periodic_cell(1, 16)), Error);
}

namespace {

FluxOperator checkerboard(double p) {
    FluxOperator op;
    op.dim = 2;
    op.family = FluxFamily::weighted_p;
    op.exponent = ExponentField::constant(p);
    op.gamma = PeriodicField::sinusoidal(2.0, 1.5);
    return op;
}

}  // namespace

TEST_CASE("2D corrector: zero mean, small residual, Newton and Gauss-Seidel agree") {
    FluxOperator op;
    op.dim = 2;
    op.family = FluxFamily::weighted_px;
    op.exponent = ExponentField::from_shape(PeriodicField::sinusoidal(2.4, 0.6));
    op.gamma = PeriodicField::piecewise(0.5, 2.0);
    Grid cell = Grid::periodic_cell(2, 16);
    CorrectorSolution a = solve_corrector(op, {0.7, -0.4}, cell);
    CellParams gs;
    gs.method = CellMethod::gauss_seidel;
    CorrectorSolution b = solve_corrector(op, {0.7, -0.4}, cell, gs);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(std::abs(mean(a.v.values)) <= 1e-12);
    CHECK(std::abs(mean(b.v.values)) <= 1e-12);
    CHECK(a.flux_avg[0] == doctest::Approx(b.flux_avg[0]).epsilon(1e-7));
    CHECK(a.flux_avg[1] == doctest::Approx(b.flux_avg[1]).epsilon(1e-7));
    CHECK(a.h_value == doctest::Approx(b.h_value).epsilon(1e-9));
}

TEST_CASE("2D p = 2 effective coefficient lies between harmonic and arithmetic means") {
    FluxOperator op = checkerboard(2.0);
    Grid cell = Grid::periodic_cell(2, 32);
    const int n = 512;
    double am = 0.0, hm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double g = op.gamma.eval({(i + 0.5) / n, (j + 0.5) / n}, 2);
            am += g;
            hm += 1.0 / g;
        }
    am /= double(n) * n;
    hm = double(n) * n / hm;
    for (Vec xi : {Vec{1.0, 0.0}, Vec{0.0, 1.0}, Vec{0.6, 0.8}}) {
        Vec a = homogenized_flux(op, xi, cell);
        double q = dot(a, xi);
        CHECK(q > hm);
        CHECK(q < am);
    }
}

TEST_CASE("odd symmetry, homogeneity and the competitor bound") {
    FluxOperator op = checkerboard(3.0);
    Grid cell = Grid::periodic_cell(2, 16);
    Vec xi{0.5, 0.3};
    CorrectorSolution s = solve_corrector(op, xi, cell);
    Vec am = homogenized_flux(op, -1.0 * xi, cell);
    CHECK(am[0] == doctest::Approx(-s.flux_avg[0]).epsilon(1e-9));
    CHECK(am[1] == doctest::Approx(-s.flux_avg[1]).epsilon(1e-9));
    Vec a2 = homogenized_flux(op, 2.0 * xi, cell);
    CHECK(a2[0] == doctest::Approx(4.0 * s.flux_avg[0]).epsilon(1e-6));
    CHECK(a2[1] == doctest::Approx(4.0 * s.flux_avg[1]).epsilon(1e-6));
    // v = 0 is a competitor: h(xi) <= int gamma |xi|^p / p
    Mesh mesh(cell);
    double competitor = 0.0;
    for (const auto &e : mesh.elements()) competitor += e.weight * op.at(e.x).potential(xi);
    CHECK(s.h_value <= competitor);
}

TEST_CASE("tables: identity, harmonic mean and interpolation rules") {
    TableParams tp;
    tp.xi_max = 2.0;
    tp.samples_1d = 33;
    HomogenizedOperatorTable id = tabulate(power(2.0), Grid::periodic_cell(1, 32), tp);
    for (std::size_t k = 0; k < id.sample_count(); ++k) CHECK(id.a0_values[k][0] == doctest::Approx(id.xi_samples[k][0]).epsilon(1e-14));
    CHECK(eval_table(id, {0.3, 0.0})[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(eval_table(id, {0.0, 0.0})[0] == 0.0);
    CHECK(eval_table(id, {-0.7, 0.0})[0] == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(eval_table(id, id.xi_samples[5])[0] == id.a0_values[5][0]);
    CHECK_THROWS_AS(eval_table(id, {2.5, 0.0}), TableRangeError);

    HomogenizedOperatorTable hm = tabulate(harmonic(), Grid::periodic_cell(1, 256), tp);
    for (std::size_t k = 0; k < hm.sample_count(); ++k)
        CHECK(hm.a0_values[k][0] == doctest::Approx(hm.xi_samples[k][0] / 2).epsilon(1e-12));

    HomogenizedOperatorTable cube = tabulate(power(3.0), Grid::periodic_cell(1, 32), tp);
    for (std::size_t a = 0; a < cube.sample_count(); ++a)
        for (std::size_t b = a + 1; b < cube.sample_count(); ++b)
            CHECK((cube.a0_values[a][0] - cube.a0_values[b][0]) * (cube.xi_samples[a][0] - cube.xi_samples[b][0]) > 0.0);
}

TEST_CASE("2D polar table interpolates a linear map exactly along rays") {
    TableParams tp;
    tp.xi_max = 3.0;
    tp.n_r = 8;
    tp.n_theta = 12;
    HomogenizedOperatorTable t = tabulate(power(2.0, 2), Grid::periodic_cell(2, 8), tp);
    CHECK(t.sample_count() == 96);
    CHECK(eval_table(t, {0.0, 0.0})[0] == 0.0);
    Vec xi = t.xi_samples[3 * 12 + 5];
    Vec a = eval_table(t, xi);
    CHECK(a == t.a0_values[3 * 12 + 5]);
    Vec mid = eval_table(t, {1.0, 1.0});
    CHECK(norm(mid - Vec{1.0, 1.0}) < 0.05);
    CHECK_THROWS_AS(eval_table(t, {3.0, 3.0}), TableRangeError);
}

TEST_CASE("tabulation is deterministic and serializes exactly") {
    TableParams tp;
    tp.n_r = 5;
    tp.n_theta = 8;
    FluxOperator op = checkerboard(2.5);
    Grid cell = Grid::periodic_cell(2, 8);
    HomogenizedOperatorTable a = tabulate(op, cell, tp), b = tabulate_serial(op, cell, tp);
    CHECK(a.a0_values == b.a0_values);
    CHECK(a.h_values == b.h_values);
    std::stringstream ss;
    write_table(a, ss);
    HomogenizedOperatorTable c = read_table(ss);
    CHECK(c.a0_values == a.a0_values);
    CHECK(c.h_values == a.h_values);
    CHECK(c.xi_samples == a.xi_samples);
    CHECK(c.radii == a.radii);
    CHECK(c.family == a.family);
    CHECK(c.parameters == a.parameters);
    std::stringstream again;
    write_table(c, again);
    CHECK(again.str() == ss.str());
    std::stringstream bad("homobst-table 9\n");
    CHECK_THROWS_AS(read_table(bad), Error);
}

TEST_CASE("homogenized density: convexity, growth and Delta_2 diagnostics") {
    TableParams tp;
    tp.xi_max = 3.0;
    tp.samples_1d = 17;
    FluxOperator op;
    op.exponent = ExponentField::from_shape(PeriodicField::sinusoidal(2.25, 0.75));
    Grid cell = Grid::periodic_cell(1, 256);
    HomogenizedOperatorTable t = tabulate(op, cell, tp);
    TableDiagnostics d = diagnose_table(t, op, cell);
    CHECK(d.monotonicity_min > 0.0);
    CHECK(d.convexity_violation <= 1e-8);
    CHECK(d.c0 > 0.0);
    CHECK(d.c1 > 0.0);
    CHECK(d.c2 > 0.0);
    CHECK(std::isfinite(d.delta2_K));
    CHECK(d.grad_h_discrepancy < 1e-2);
}
