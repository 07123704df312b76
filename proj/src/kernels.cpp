#include "homobst/kernels.hpp"

#include "homobst/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace homobst {

DiscreteFlux::DiscreteFlux(const FluxModel &model, const Mesh &mesh) {
    if (const auto *t = std::get_if<HomogenizedOperatorTable>(&model)) {
        table_ = t;
        return;
    }
    const auto &op = std::get<FluxOperator>(model);
    local_.reserve(mesh.elements().size());
    for (const auto &e : mesh.elements()) local_.push_back(op.at(e.x));
}

Vec eval_model(const FluxModel &model, const Vec &x, const Vec &xi) {
    if (const auto *t = std::get_if<HomogenizedOperatorTable>(&model)) return t->eval(xi);
    return std::get<FluxOperator>(model).eval(x, xi);
}

double model_alpha(const FluxModel &model) {
    if (const auto *t = std::get_if<HomogenizedOperatorTable>(&model)) return t->alpha;
    return std::get<FluxOperator>(model).exponent.alpha;
}

namespace kernels {

void element_fluxes(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift,
                    std::span<Vec> out) {
    parallel_for(static_cast<long>(mesh.elements().size()), [&](long e) {
        auto ue = static_cast<std::size_t>(e);
        out[ue] = flux.flux(ue, mesh.element_gradient(ue, u, shift));
    });
}

void element_fluxes_serial(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u,
                           const Vec &shift, std::span<Vec> out) {
    for (std::size_t e = 0; e < mesh.elements().size(); ++e) out[e] = flux.flux(e, mesh.element_gradient(e, u, shift));
}

void divergence(const Mesh &mesh, std::span<const Vec> fluxes, std::span<double> r) {
    const Grid &g = mesh.grid();
    const double inv_vol = 1.0 / g.cell_volume();
    const auto &els = mesh.elements();
    parallel_for(static_cast<long>(g.node_count()), [&](long i) {
        auto node = static_cast<std::size_t>(i);
        if (g.is_boundary(node)) {
            r[node] = 0.0;
            return;
        }
        double s = 0.0;
        for (const auto &inc : mesh.incident(node)) {
            const Element &el = els[inc.element];
            s += el.weight * dot(fluxes[inc.element], el.coeff[static_cast<std::size_t>(inc.local)]);
        }
        r[node] = s * inv_vol;
    });
}

void divergence_serial(const Mesh &mesh, std::span<const Vec> fluxes, std::span<double> r) {
    const Grid &g = mesh.grid();
    std::fill(r.begin(), r.end(), 0.0);
    const auto &els = mesh.elements();
    for (std::size_t e = 0; e < els.size(); ++e)
        for (int k = 0; k < els[e].count; ++k)
            r[els[e].nodes[static_cast<std::size_t>(k)]] += els[e].weight * dot(fluxes[e], els[e].coeff[static_cast<std::size_t>(k)]);
    const double inv_vol = 1.0 / g.cell_volume();
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = g.is_boundary(i) ? 0.0 : r[i] * inv_vol;
}

namespace {

template <class Term>
double ordered_element_sum(const Mesh &mesh, Term &&term) {
    std::vector<double> terms(mesh.elements().size());
    parallel_for(static_cast<long>(terms.size()), [&](long e) { terms[static_cast<std::size_t>(e)] = term(static_cast<std::size_t>(e)); });
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

}  // namespace

double potential_energy(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift) {
    return ordered_element_sum(mesh, [&](std::size_t e) {
        return mesh.elements()[e].weight * flux.potential(e, mesh.element_gradient(e, u, shift));
    });
}

double potential_energy_serial(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u,
                               const Vec &shift) {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.elements().size(); ++e)
        s += mesh.elements()[e].weight * flux.potential(e, mesh.element_gradient(e, u, shift));
    return s;
}

double flux_work(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift) {
    return ordered_element_sum(mesh, [&](std::size_t e) {
        Vec g = mesh.element_gradient(e, u, shift);
        return mesh.elements()[e].weight * dot(flux.flux(e, g), g);
    });
}

double flux_work_serial(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift) {
    double s = 0.0;
    for (std::size_t e = 0; e < mesh.elements().size(); ++e) {
        Vec g = mesh.element_gradient(e, u, shift);
        s += mesh.elements()[e].weight * dot(flux.flux(e, g), g);
    }
    return s;
}

Mat2 floor_eigenvalues(const Mat2 &m, double floor) {
    double a = m[0], b = 0.5 * (m[1] + m[2]), d = m[3];
    double mean = 0.5 * (a + d);
    double rad = std::hypot(0.5 * (a - d), b);
    double lmin = mean - rad;
    if (!std::isfinite(lmin)) return {floor, 0.0, 0.0, floor};
    double shift = lmin < floor ? floor - lmin : 0.0;
    return {a + shift, b, b, d + shift};
}

void element_jacobians(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift,
                       double floor, std::span<Mat2> out) {
    parallel_for(static_cast<long>(mesh.elements().size()), [&](long e) {
        auto ue = static_cast<std::size_t>(e);
        out[ue] = floor_eigenvalues(flux.jacobian(ue, mesh.element_gradient(ue, u, shift)), floor);
    });
}

double hausdorff(std::span<const Vec> a, std::span<const Vec> b) {
    auto directed = [](std::span<const Vec> from, std::span<const Vec> to) {
        double worst = 0.0;
        const long n = static_cast<long>(from.size());
#pragma omp parallel for reduction(max : worst) schedule(static)
        for (long i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec &q : to) best = std::min(best, norm(from[static_cast<std::size_t>(i)] - q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

double hausdorff_serial(std::span<const Vec> a, std::span<const Vec> b) {
    auto directed = [](std::span<const Vec> from, std::span<const Vec> to) {
        double worst = 0.0;
        for (const Vec &p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec &q : to) best = std::min(best, norm(p - q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(directed(a, b), directed(b, a));
}

}  // namespace kernels
}  // namespace homobst
