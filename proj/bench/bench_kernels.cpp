#include "homobst/cell.hpp"
#include "homobst/kernels.hpp"
#include "homobst/vi_solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace homobst;

namespace {

FluxOperator variable_exponent(int dim) {
    FluxOperator op;
    op.dim = dim;
    op.exponent = ExponentField::from_shape(PeriodicField::sinusoidal(2.2, 0.5));
    op.eps = 0.125;
    return op;
}

struct Setup {
    Mesh mesh;
    DiscreteFlux flux;
    std::vector<double> u;
    std::vector<Vec> fl;
    std::vector<double> r;

    explicit Setup(int n) : Setup(Grid::dirichlet(2, n)) {}
    explicit Setup(const Grid &g)
        : mesh(g), flux(variable_exponent(2), mesh), u(g.node_count()), fl(mesh.elements().size()), r(g.node_count()) {
        for (std::size_t i = 0; i < u.size(); ++i) {
            Vec x = g.node_coord(i);
            u[i] = std::sin(3.0 * x[0]) * std::sin(2.0 * x[1]);
        }
    }
};

void BM_element_fluxes(benchmark::State &state) {
    Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        kernels::element_fluxes(s.mesh, s.flux, s.u, {0.0, 0.0}, s.fl);
        benchmark::DoNotOptimize(s.fl.data());
    }
}

void BM_element_fluxes_serial(benchmark::State &state) {
    Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        kernels::element_fluxes_serial(s.mesh, s.flux, s.u, {0.0, 0.0}, s.fl);
        benchmark::DoNotOptimize(s.fl.data());
    }
}

void BM_divergence(benchmark::State &state) {
    Setup s(static_cast<int>(state.range(0)));
    kernels::element_fluxes(s.mesh, s.flux, s.u, {0.0, 0.0}, s.fl);
    for (auto _ : state) {
        kernels::divergence(s.mesh, s.fl, s.r);
        benchmark::DoNotOptimize(s.r.data());
    }
}

void BM_divergence_serial(benchmark::State &state) {
    Setup s(static_cast<int>(state.range(0)));
    kernels::element_fluxes(s.mesh, s.flux, s.u, {0.0, 0.0}, s.fl);
    for (auto _ : state) {
        kernels::divergence_serial(s.mesh, s.fl, s.r);
        benchmark::DoNotOptimize(s.r.data());
    }
}

void BM_potential_energy(benchmark::State &state) {
    Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::potential_energy(s.mesh, s.flux, s.u, {0.0, 0.0}));
}

void BM_potential_energy_serial(benchmark::State &state) {
    Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::potential_energy_serial(s.mesh, s.flux, s.u, {0.0, 0.0}));
}

void BM_obstacle_newton_1d(benchmark::State &state) {
    const Grid g = Grid::dirichlet(1, static_cast<int>(state.range(0)));
    ObstacleProblem p{g, variable_exponent(1), ScalarField(g, -16.0), ScalarField(g, -1.0), 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(solve_obstacle(p).u.values.data());
}

void BM_obstacle_gauss_seidel_1d(benchmark::State &state) {
    const Grid g = Grid::dirichlet(1, static_cast<int>(state.range(0)));
    ObstacleProblem p{g, variable_exponent(1), ScalarField(g, -16.0), ScalarField(g, -1.0), 1.0};
    SolverParams gs;
    gs.method = SolverMethod::gauss_seidel;
    for (auto _ : state) benchmark::DoNotOptimize(solve_obstacle(p, gs).u.values.data());
}

void BM_tabulate_1d(benchmark::State &state) {
    FluxOperator op = variable_exponent(1);
    op.eps = 1.0;
    const Grid cell = Grid::periodic_cell(1, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tabulate(op, cell, TableParams{}).a0_values.data());
}

void BM_tabulate_1d_serial(benchmark::State &state) {
    FluxOperator op = variable_exponent(1);
    op.eps = 1.0;
    const Grid cell = Grid::periodic_cell(1, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(tabulate_serial(op, cell, TableParams{}).a0_values.data());
}

}  // namespace

BENCHMARK(BM_element_fluxes)->Arg(64)->Arg(256);
BENCHMARK(BM_element_fluxes_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_divergence)->Arg(64)->Arg(256);
BENCHMARK(BM_divergence_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_potential_energy)->Arg(64)->Arg(256);
BENCHMARK(BM_potential_energy_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_obstacle_newton_1d)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_obstacle_gauss_seidel_1d)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tabulate_1d)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tabulate_1d_serial)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
