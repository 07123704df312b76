#pragma once

#include "homobst/fields.hpp"
#include "homobst/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace homobst {

enum class Boundary { dirichlet_zero, periodic };

/// Uniform grid on [0, L]^dim (Dirichlet, nodes 0..n per axis) or on the unit
/// periodicity cell (periodic, nodes 0..n-1 per axis, node n identified with node 0).
struct Grid {
    int dim = 1;
    int n = 1;
    double length = 1.0;
    Boundary boundary = Boundary::dirichlet_zero;

    static Grid dirichlet(int dim, int n, double length = 1.0);
    static Grid periodic_cell(int dim, int n);

    double h() const { return length / n; }
    double cell_volume() const { return dim == 1 ? h() : h() * h(); }
    double domain_measure() const { return dim == 1 ? length : length * length; }
    bool periodic() const { return boundary == Boundary::periodic; }

    int nodes_per_axis() const { return periodic() ? n : n + 1; }
    std::size_t node_count() const;
    std::size_t cell_count() const;

    /// Node index from axis indices; periodic grids wrap.
    std::size_t node(int i, int j = 0) const;
    std::array<int, 2> node_axes(std::size_t idx) const;
    Vec node_coord(std::size_t idx) const;
    Vec cell_center(std::size_t cell) const;
    bool is_boundary(std::size_t idx) const;
    std::vector<std::size_t> interior_nodes() const;
    /// Nodes carrying unknowns: interior for Dirichlet, all for periodic.
    std::vector<std::size_t> free_nodes() const { return interior_nodes(); }

    bool operator==(const Grid &o) const = default;
};

/// Nodal data; boundary values are stored but stay zero for Dirichlet unknowns.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid &g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}

    double &operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

/// One dim-vector per cell (cell-center values).
struct VectorField {
    Grid grid;
    std::vector<Vec> values;

    VectorField() = default;
    explicit VectorField(const Grid &g) : grid(g), values(g.cell_count(), Vec{0.0, 0.0}) {}
};

template <class Fn>
ScalarField sample_nodes(const Grid &g, Fn &&fn) {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(g.node_coord(i));
    return f;
}

template <class Fn>
std::vector<double> sample_cells(const Grid &g, Fn &&fn) {
    std::vector<double> v(g.cell_count());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = fn(g.cell_center(c));
    return v;
}

/// Exponent sampled once at cell midpoints.
std::vector<double> exponent_on_grid(const Grid &g, const ExponentField &p);
std::vector<double> exponent_on_grid(const Grid &g, double p);

/// Finite-difference stencil of one quadrature element: grad = sum_k u[nodes[k]] * coeff[k].
/// 1D uses one element per cell; 2D splits each cell into two right triangles.
struct Element {
    Vec x;
    double weight = 0.0;
    int count = 0;
    std::array<std::size_t, 3> nodes{};
    std::array<Vec, 3> coeff{};
    std::size_t cell = 0;
};

/// Grid plus element stencils and node-to-element adjacency (CSR, fixed order).
class Mesh {
public:
    explicit Mesh(const Grid &g);

    const Grid &grid() const { return grid_; }
    const std::vector<Element> &elements() const { return elements_; }

    struct Incidence {
        std::size_t element;
        int local;
    };
    std::span<const Incidence> incident(std::size_t node) const {
        return {incidence_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
    }

    Vec element_gradient(std::size_t e, std::span<const double> u, const Vec &shift = {0.0, 0.0}) const {
        const Element &el = elements_[e];
        Vec g = shift;
        for (int k = 0; k < el.count; ++k) {
            g[0] += u[el.nodes[k]] * el.coeff[k][0];
            g[1] += u[el.nodes[k]] * el.coeff[k][1];
        }
        return g;
    }

private:
    Grid grid_;
    std::vector<Element> elements_;
    std::vector<std::size_t> offsets_;
    std::vector<Incidence> incidence_;
};

/// Cell gradient: 1D forward difference at the midpoint; 2D the average of the two
/// one-sided differences along each axis at the cell center.
VectorField gradient(const ScalarField &u);

/// Cell averages of a nodal field.
std::vector<double> cell_average(const ScalarField &u);

/// Midpoint quadrature of |v|^p over cell data.
double modular_cells(std::span<const double> cell_values, std::span<const double> p_cells, double cell_volume);
double modular_cells_serial(std::span<const double> cell_values, std::span<const double> p_cells,
                            double cell_volume);
/// Midpoint quadrature of |u|^p with u cell-averaged.
double modular(const ScalarField &u, std::span<const double> p_cells);

double luxembourg_norm_cells(std::span<const double> cell_values, std::span<const double> p_cells,
                             double cell_volume);
double luxembourg_norm(const ScalarField &u, std::span<const double> p_cells);

/// Sum over coordinate directions of the Luxembourg norm of each gradient component.
double norm_w1p0(const ScalarField &u, std::span<const double> p_cells);

double max_abs(std::span<const double> v);

}  // namespace homobst
