#pragma once

// Data-parallel kernels of the discrete operator.  Each kernel has an OpenMP version and a
// plain serial reference; both accumulate in the same order and agree bit for bit.

#include "homobst/discrete_flux.hpp"
#include "homobst/grid.hpp"

#include <span>
#include <vector>

namespace homobst::kernels {

/// a(x_e, grad_e u + shift) for every element.
void element_fluxes(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift,
                    std::span<Vec> out);
void element_fluxes_serial(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u,
                           const Vec &shift, std::span<Vec> out);

/// Nodal discrete divergence: r_i = (1 / |cell|) sum_{e ni i} w_e a_e . coeff_{e,i}.
/// Dirichlet boundary nodes are set to zero.  The parallel version gathers per node over the
/// fixed incidence order; the serial one scatters per element.
void divergence(const Mesh &mesh, std::span<const Vec> fluxes, std::span<double> r);
void divergence_serial(const Mesh &mesh, std::span<const Vec> fluxes, std::span<double> r);

/// sum_e w_e Phi_e(grad_e u + shift).
double potential_energy(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift);
double potential_energy_serial(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u,
                               const Vec &shift);

/// sum_e w_e a_e . grad_e (the flux work a(x, grad u) . grad u integrated).
double flux_work(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift);
double flux_work_serial(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift);

/// Element Jacobians of the flux, symmetrized and with eigenvalues floored at `floor`.
void element_jacobians(const Mesh &mesh, const DiscreteFlux &flux, std::span<const double> u, const Vec &shift,
                       double floor, std::span<Mat2> out);

/// Directed-and-symmetrized Hausdorff distance between two point sets (both nonempty).
double hausdorff(std::span<const Vec> a, std::span<const Vec> b);
double hausdorff_serial(std::span<const Vec> a, std::span<const Vec> b);

/// Smallest eigenvalue shift making a symmetric 2x2 matrix have eigenvalues >= floor.
Mat2 floor_eigenvalues(const Mat2 &m, double floor);

}  // namespace homobst::kernels
