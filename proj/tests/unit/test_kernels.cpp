#include "homobst/kernels.hpp"

#include <doctest.h>

#include <random>

using namespace homobst;

namespace {

FluxOperator variable_operator(int dim) {
    FluxOperator op;
    op.family = FluxFamily::weighted_px;
    op.dim = dim;
    op.exponent = ExponentField::from_shape(PeriodicField::sinusoidal(2.25, 0.75, 2));
    op.gamma = PeriodicField::sinusoidal(1.5, 0.5);
    op.eps = 0.25;
    return op;
}

ScalarField random_field(const Grid &g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = g.is_boundary(i) ? 0.0 : u(rng);
    return f;
}

}  // namespace

TEST_CASE("parallel kernels reproduce the serial reference bit for bit") {
    for (int dim : {1, 2}) {
        Grid g = dim == 1 ? Grid::dirichlet(1, 999) : Grid::dirichlet(2, 37);
        Mesh mesh(g);
        FluxModel model = variable_operator(dim);
        DiscreteFlux flux(model, mesh);
        ScalarField u = random_field(g, 3u + static_cast<unsigned>(dim));
        const Vec shift{0.1, -0.2};

        std::vector<Vec> a(mesh.elements().size()), b(a.size());
        kernels::element_fluxes(mesh, flux, u.values, shift, a);
        kernels::element_fluxes_serial(mesh, flux, u.values, shift, b);
        CHECK(a == b);

        std::vector<double> ra(g.node_count()), rb(g.node_count());
        kernels::divergence(mesh, a, ra);
        kernels::divergence_serial(mesh, b, rb);
        CHECK(ra == rb);

        CHECK(kernels::potential_energy(mesh, flux, u.values, shift) ==
              kernels::potential_energy_serial(mesh, flux, u.values, shift));
        CHECK(kernels::flux_work(mesh, flux, u.values, shift) == kernels::flux_work_serial(mesh, flux, u.values, shift));
    }
}

TEST_CASE("divergence is the gradient of the discrete energy") {
    Grid g = Grid::dirichlet(2, 9);
    Mesh mesh(g);
    FluxModel model = variable_operator(2);
    DiscreteFlux flux(model, mesh);
    ScalarField u = random_field(g, 17);
    std::vector<Vec> fl(mesh.elements().size());
    kernels::element_fluxes(mesh, flux, u.values, {0.0, 0.0}, fl);
    std::vector<double> r(g.node_count());
    kernels::divergence(mesh, fl, r);
    for (std::size_t i : g.interior_nodes()) {
        const double h = 1e-6;
        std::vector<double> up = u.values, dn = u.values;
        up[i] += h;
        dn[i] -= h;
        double d = (kernels::potential_energy(mesh, flux, up, {0.0, 0.0}) -
                    kernels::potential_energy(mesh, flux, dn, {0.0, 0.0})) /
                   (2 * h) / g.cell_volume();
        CHECK(r[i] == doctest::Approx(d).epsilon(1e-6));
    }
}

TEST_CASE("eigenvalue floor lifts only the small eigenvalue") {
    Mat2 m = kernels::floor_eigenvalues({2.0, 0.0, 0.0, -1.0}, 0.5);
    CHECK(m[0] == doctest::Approx(3.5));
    CHECK(m[3] == doctest::Approx(0.5));
    Mat2 keep = kernels::floor_eigenvalues({2.0, 0.5, 0.5, 3.0}, 1e-3);
    CHECK(keep[0] == 2.0);
    CHECK(keep[1] == 0.5);
}

TEST_CASE("Hausdorff distance of point sets") {
    std::vector<Vec> a{{0.0, 0.0}, {1.0, 0.0}}, b{{0.0, 0.0}, {0.0, 3.0}};
    CHECK(kernels::hausdorff(a, b) == doctest::Approx(3.0));
    CHECK(kernels::hausdorff(a, a) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Vec> c(300), d(200);
    for (auto &p : c) p = {u(rng), u(rng)};
    for (auto &p : d) p = {u(rng), u(rng)};
    CHECK(kernels::hausdorff(c, d) == kernels::hausdorff_serial(c, d));
}
