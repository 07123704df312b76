#pragma once

#include "homobst/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace homobst {

enum class FieldKind { constant, sinusoidal, reciprocal_sinusoidal, piecewise };

/// A 1-periodic scalar field on R^dim.
///
///  - constant:              base
///  - sinusoidal:            base + amplitude * s(x)
///  - reciprocal_sinusoidal: 1 / (base + amplitude * s(x))
///  - piecewise:             low/high on a step (1D) or checkerboard (2D) pattern
///
/// where s(x) is the mean over coordinates of sin(2 pi k x_i) and k = periods.
struct PeriodicField {
    FieldKind kind = FieldKind::constant;
    double base = 1.0;
    double amplitude = 0.0;
    int periods = 1;
    double low = 1.0;
    double high = 1.0;

    static PeriodicField constant(double value) { return {FieldKind::constant, value}; }
    static PeriodicField sinusoidal(double base, double amplitude, int periods = 1) {
        return {FieldKind::sinusoidal, base, amplitude, periods};
    }
    static PeriodicField reciprocal_sinusoidal(double base, double amplitude, int periods = 1) {
        return {FieldKind::reciprocal_sinusoidal, base, amplitude, periods};
    }
    static PeriodicField piecewise(double low, double high, int periods = 1) {
        PeriodicField f;
        f.kind = FieldKind::piecewise;
        f.low = low;
        f.high = high;
        f.periods = periods;
        return f;
    }

    double eval(const Vec &x, int dim) const;
    /// Exact infimum / supremum over the cell.
    double lower_bound() const;
    double upper_bound() const;
    bool is_constant() const;
};

/// Variable exponent p(x) with 1 < alpha <= p <= beta < inf; values are clamped into [alpha, beta].
struct ExponentField {
    PeriodicField shape = PeriodicField::constant(2.0);
    double alpha = 2.0;
    double beta = 2.0;

    /// Bounds taken from the shape; throws if they violate 1 < alpha <= beta.
    static ExponentField from_shape(const PeriodicField &shape);
    static ExponentField constant(double p) { return from_shape(PeriodicField::constant(p)); }

    void validate() const;
};

double eval_exponent(const ExponentField &field, const Vec &x, int dim = 1);

enum class FluxFamily { px_laplace, weighted_p, weighted_px, log_type };

std::string to_string(FluxFamily f);
FluxFamily flux_family_from_string(const std::string &s);
std::string to_string(FieldKind k);
FieldKind field_kind_from_string(const std::string &s);

/// Coefficients of a(x, .) frozen at one point x.  Every family is radial in xi:
/// a(x, xi) = phi(|xi|) xi / |xi|.
struct LocalFlux {
    FluxFamily family = FluxFamily::px_laplace;
    double p = 2.0;
    double weight = 1.0;  // gamma or gamma_1
    double log_scale = 1.0;  // gamma_2
    double log_shift = 2.0;  // gamma_3
    double delta = 0.0;

    bool regularized() const { return family != FluxFamily::log_type && delta > 0.0 && p < 2.0; }

    /// phi(r) = |a(x, xi)| at |xi| = r.
    double magnitude(double r) const;
    double dmagnitude(double r) const;
    /// Phi(r) = int_0^r phi.
    double potential(double r) const;
    /// lim_{r->0} phi(r)/r.
    double slope_at_zero() const;
    /// r >= 0 with phi(r) = c, c >= 0.
    double inverse_magnitude(double c) const;

    Vec flux(const Vec &xi) const;
    Mat2 jacobian(const Vec &xi) const;
    double potential(const Vec &xi) const { return potential(norm(xi)); }
};

struct FluxOperator {
    FluxFamily family = FluxFamily::px_laplace;
    int dim = 1;
    ExponentField exponent;
    PeriodicField gamma = PeriodicField::constant(1.0);
    PeriodicField gamma1 = PeriodicField::constant(1.0);
    PeriodicField gamma2 = PeriodicField::constant(1.0);
    PeriodicField gamma3 = PeriodicField::constant(2.0);
    /// Structural constants; unset means the documented family default.
    std::optional<double> C1;
    std::optional<double> C2;
    double delta = 1e-8;
    /// Oscillation scale: a view evaluates a(x / eps, xi).
    double eps = 1.0;

    LocalFlux at(const Vec &x) const;
    double exponent_at(const Vec &x) const;
    Vec eval(const Vec &x, const Vec &xi) const { return at(x).flux(xi); }

    double resolved_C1() const;
    double resolved_C2() const;
    /// True when no coefficient depends on x.
    bool x_independent() const;
    /// Families with a declared convex potential usable as the homogenized density.
    bool gradient_type() const { return family != FluxFamily::log_type; }
    void validate() const;
};

Vec eval_flux(const FluxOperator &op, const Vec &x, const Vec &xi);

/// View evaluating a(x / eps, xi) and p(x / eps).
FluxOperator rescale(const FluxOperator &op, double eps);

struct StructuralReport {
    int n_samples = 0;
    double monotonicity_min = 0.0;
    double coercivity_margin_min = 0.0;
    double boundedness_margin_min = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    bool pass = false;
};

struct StructuralOptions {
    int n_samples = 10000;
    std::uint64_t seed = 1;
    double radius = 10.0;
    double tol = 1e-9;
};

StructuralReport verify_structural(const FluxOperator &op, const StructuralOptions &opts = {});
StructuralReport verify_structural_serial(const FluxOperator &op, const StructuralOptions &opts = {});

}  // namespace homobst
