#include "homobst/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace homobst {

Grid Grid::dirichlet(int dim, int n, double length) {
    if (dim != 1 && dim != 2) throw Error("grid dimension must be 1 or 2");
    if (n < 2) throw Error("grid needs at least 2 cells per axis");
    if (!(length > 0.0)) throw Error("grid length must be positive");
    return Grid{dim, n, length, Boundary::dirichlet_zero};
}

Grid Grid::periodic_cell(int dim, int n) {
    if (dim != 1 && dim != 2) throw Error("grid dimension must be 1 or 2");
    if (n < 2) throw Error("grid needs at least 2 cells per axis");
    return Grid{dim, n, 1.0, Boundary::periodic};
}

std::size_t Grid::node_count() const {
    auto m = static_cast<std::size_t>(nodes_per_axis());
    return dim == 1 ? m : m * m;
}

std::size_t Grid::cell_count() const {
    auto m = static_cast<std::size_t>(n);
    return dim == 1 ? m : m * m;
}

std::size_t Grid::node(int i, int j) const {
    if (periodic()) {
        i = ((i % n) + n) % n;
        j = ((j % n) + n) % n;
    }
    auto m = static_cast<std::size_t>(nodes_per_axis());
    return dim == 1 ? static_cast<std::size_t>(i) : static_cast<std::size_t>(j) * m + static_cast<std::size_t>(i);
}

std::array<int, 2> Grid::node_axes(std::size_t idx) const {
    if (dim == 1) return {static_cast<int>(idx), 0};
    auto m = static_cast<std::size_t>(nodes_per_axis());
    return {static_cast<int>(idx % m), static_cast<int>(idx / m)};
}

Vec Grid::node_coord(std::size_t idx) const {
    auto [i, j] = node_axes(idx);
    return {i * h(), dim == 2 ? j * h() : 0.0};
}

Vec Grid::cell_center(std::size_t cell) const {
    if (dim == 1) return {(static_cast<double>(cell) + 0.5) * h(), 0.0};
    auto m = static_cast<std::size_t>(n);
    return {(static_cast<double>(cell % m) + 0.5) * h(), (static_cast<double>(cell / m) + 0.5) * h()};
}

bool Grid::is_boundary(std::size_t idx) const {
    if (periodic()) return false;
    auto [i, j] = node_axes(idx);
    if (i == 0 || i == n) return true;
    return dim == 2 && (j == 0 || j == n);
}

std::vector<std::size_t> Grid::interior_nodes() const {
    std::vector<std::size_t> out;
    out.reserve(node_count());
    for (std::size_t i = 0; i < node_count(); ++i)
        if (!is_boundary(i)) out.push_back(i);
    return out;
}

std::vector<double> exponent_on_grid(const Grid &g, const ExponentField &p) {
    return sample_cells(g, [&](const Vec &x) { return eval_exponent(p, x, g.dim); });
}

std::vector<double> exponent_on_grid(const Grid &g, double p) { return std::vector<double>(g.cell_count(), p); }

// ---------------------------------------------------------------------------

Mesh::Mesh(const Grid &g) : grid_(g) {
    const double h = g.h();
    const double ih = 1.0 / h;
    if (g.dim == 1) {
        elements_.reserve(g.cell_count());
        for (int c = 0; c < g.n; ++c) {
            Element e;
            e.x = g.cell_center(static_cast<std::size_t>(c));
            e.weight = h;
            e.count = 2;
            e.nodes = {g.node(c), g.node(c + 1), 0};
            e.coeff = {Vec{-ih, 0.0}, Vec{ih, 0.0}, Vec{0.0, 0.0}};
            e.cell = static_cast<std::size_t>(c);
            elements_.push_back(e);
        }
    } else {
        elements_.reserve(2 * g.cell_count());
        for (int j = 0; j < g.n; ++j) {
            for (int i = 0; i < g.n; ++i) {
                std::size_t cell = static_cast<std::size_t>(j) * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(i);
                Vec xc = g.cell_center(cell);
                // lower-left triangle
                Element a;
                a.x = xc;
                a.weight = 0.5 * h * h;
                a.count = 3;
                a.nodes = {g.node(i, j), g.node(i + 1, j), g.node(i, j + 1)};
                a.coeff = {Vec{-ih, -ih}, Vec{ih, 0.0}, Vec{0.0, ih}};
                a.cell = cell;
                elements_.push_back(a);
                // upper-right triangle
                Element b;
                b.x = xc;
                b.weight = 0.5 * h * h;
                b.count = 3;
                b.nodes = {g.node(i + 1, j + 1), g.node(i, j + 1), g.node(i + 1, j)};
                b.coeff = {Vec{ih, ih}, Vec{-ih, 0.0}, Vec{0.0, -ih}};
                b.cell = cell;
                elements_.push_back(b);
            }
        }
    }
    const std::size_t nn = g.node_count();
    offsets_.assign(nn + 1, 0);
    for (const auto &e : elements_)
        for (int k = 0; k < e.count; ++k) ++offsets_[e.nodes[k] + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    incidence_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t ei = 0; ei < elements_.size(); ++ei) {
        const auto &e = elements_[ei];
        for (int k = 0; k < e.count; ++k) incidence_[fill[e.nodes[k]]++] = {ei, k};
    }
}

// ---------------------------------------------------------------------------

VectorField gradient(const ScalarField &u) {
    const Grid &g = u.grid;
    VectorField out(g);
    const double ih = 1.0 / g.h();
    if (g.dim == 1) {
        for (int c = 0; c < g.n; ++c)
            out.values[static_cast<std::size_t>(c)] = {(u[g.node(c + 1)] - u[g.node(c)]) * ih, 0.0};
        return out;
    }
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            double u00 = u[g.node(i, j)], u10 = u[g.node(i + 1, j)];
            double u01 = u[g.node(i, j + 1)], u11 = u[g.node(i + 1, j + 1)];
            std::size_t cell = static_cast<std::size_t>(j) * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(i);
            out.values[cell] = {0.5 * ((u10 - u00) + (u11 - u01)) * ih, 0.5 * ((u01 - u00) + (u11 - u10)) * ih};
        }
    }
    return out;
}

std::vector<double> cell_average(const ScalarField &u) {
    const Grid &g = u.grid;
    std::vector<double> out(g.cell_count());
    if (g.dim == 1) {
        for (int c = 0; c < g.n; ++c)
            out[static_cast<std::size_t>(c)] = 0.5 * (u[g.node(c)] + u[g.node(c + 1)]);
        return out;
    }
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
            out[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(i)] =
                0.25 * (u[g.node(i, j)] + u[g.node(i + 1, j)] + u[g.node(i, j + 1)] + u[g.node(i + 1, j + 1)]);
    return out;
}

double modular_cells_serial(std::span<const double> v, std::span<const double> p, double vol) {
    if (v.size() != p.size()) throw Error("modular: field and exponent sizes differ");
    double s = 0.0;
    for (std::size_t c = 0; c < v.size(); ++c) s += std::pow(std::abs(v[c]), p[c]);
    return s * vol;
}

double modular_cells(std::span<const double> v, std::span<const double> p, double vol) {
    if (v.size() != p.size()) throw Error("modular: field and exponent sizes differ");
    // Powers in parallel, sum in index order so the result does not depend on the thread count.
    std::vector<double> terms(v.size());
    const long n = static_cast<long>(v.size());
#pragma omp parallel for schedule(static)
    for (long c = 0; c < n; ++c) terms[static_cast<std::size_t>(c)] = std::pow(std::abs(v[static_cast<std::size_t>(c)]), p[static_cast<std::size_t>(c)]);
    double s = 0.0;
    for (double t : terms) s += t;
    return s * vol;
}

double modular(const ScalarField &u, std::span<const double> p_cells) {
    auto avg = cell_average(u);
    return modular_cells(avg, p_cells, u.grid.cell_volume());
}

double luxembourg_norm_cells(std::span<const double> v, std::span<const double> p, double vol) {
    const double vmax = max_abs(v);
    if (vmax == 0.0) return 0.0;
    if (!std::isfinite(vmax)) throw Error("luxembourg_norm: non-finite field values");
    std::vector<double> scaled(v.size());
    auto mod = [&](double lambda) {
        for (std::size_t c = 0; c < v.size(); ++c) scaled[c] = v[c] / lambda;
        return modular_cells(scaled, p, vol);
    };
    double hi = vmax;
    int guard = 0;
    while (mod(hi) > 1.0) {
        hi *= 2.0;
        if (++guard > 2000) throw Error("luxembourg_norm: failed to bracket");
    }
    double lo = hi;
    guard = 0;
    while (mod(lo) <= 1.0) {
        lo *= 0.5;
        if (++guard > 2000) throw Error("luxembourg_norm: failed to bracket");
    }
    for (int it = 0; it < 200 && hi - lo > std::max(1e-12 * hi, 1e-14); ++it) {
        double mid = 0.5 * (lo + hi);
        if (mod(mid) <= 1.0) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

double luxembourg_norm(const ScalarField &u, std::span<const double> p_cells) {
    auto avg = cell_average(u);
    return luxembourg_norm_cells(avg, p_cells, u.grid.cell_volume());
}

double norm_w1p0(const ScalarField &u, std::span<const double> p_cells) {
    if (u.grid.periodic()) throw Error("norm_w1p0 requires a Dirichlet grid");
    auto g = gradient(u);
    double total = 0.0;
    std::vector<double> comp(g.values.size());
    for (int d = 0; d < u.grid.dim; ++d) {
        for (std::size_t c = 0; c < comp.size(); ++c) comp[c] = g.values[c][static_cast<std::size_t>(d)];
        total += luxembourg_norm_cells(comp, p_cells, u.grid.cell_volume());
    }
    return total;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace homobst
