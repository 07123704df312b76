#include "homobst/fields.hpp"

#include "homobst/scalar_root.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace homobst {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double mean_sine(const Vec &x, int dim, int periods) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += std::sin(two_pi * periods * wrap_unit(x[i]));
    return s / dim;
}

}  // namespace

double PeriodicField::eval(const Vec &x, int dim) const {
    switch (kind) {
    case FieldKind::constant:
        return base;
    case FieldKind::sinusoidal:
        return base + amplitude * mean_sine(x, dim, periods);
    case FieldKind::reciprocal_sinusoidal:
        return 1.0 / (base + amplitude * mean_sine(x, dim, periods));
    case FieldKind::piecewise: {
        long parity = 0;
        for (int i = 0; i < dim; ++i)
            parity += static_cast<long>(std::floor(2.0 * periods * wrap_unit(x[i])));
        return (parity % 2 == 0) ? low : high;
    }
    }
    return base;
}

double PeriodicField::lower_bound() const {
    switch (kind) {
    case FieldKind::constant: return base;
    case FieldKind::sinusoidal: return base - std::abs(amplitude);
    case FieldKind::reciprocal_sinusoidal: return 1.0 / (base + std::abs(amplitude));
    case FieldKind::piecewise: return std::min(low, high);
    }
    return base;
}

double PeriodicField::upper_bound() const {
    switch (kind) {
    case FieldKind::constant: return base;
    case FieldKind::sinusoidal: return base + std::abs(amplitude);
    case FieldKind::reciprocal_sinusoidal: {
        double d = base - std::abs(amplitude);
        return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
    }
    case FieldKind::piecewise: return std::max(low, high);
    }
    return base;
}

bool PeriodicField::is_constant() const {
    switch (kind) {
    case FieldKind::constant: return true;
    case FieldKind::sinusoidal:
    case FieldKind::reciprocal_sinusoidal: return amplitude == 0.0;
    case FieldKind::piecewise: return low == high;
    }
    return false;
}

ExponentField ExponentField::from_shape(const PeriodicField &shape) {
    ExponentField f;
    f.shape = shape;
    f.alpha = shape.lower_bound();
    f.beta = shape.upper_bound();
    f.validate();
    return f;
}

void ExponentField::validate() const {
    if (!(alpha > 1.0) || !(alpha <= beta) || !std::isfinite(beta))
        throw Error("exponent bounds must satisfy 1 < alpha <= beta < inf");
}

double eval_exponent(const ExponentField &field, const Vec &x, int dim) {
    return std::clamp(field.shape.eval(x, dim), field.alpha, field.beta);
}

std::string to_string(FluxFamily f) {
    switch (f) {
    case FluxFamily::px_laplace: return "px_laplace";
    case FluxFamily::weighted_p: return "weighted_p";
    case FluxFamily::weighted_px: return "weighted_px";
    case FluxFamily::log_type: return "log_type";
    }
    return "?";
}

FluxFamily flux_family_from_string(const std::string &s) {
    if (s == "px_laplace") return FluxFamily::px_laplace;
    if (s == "weighted_p") return FluxFamily::weighted_p;
    if (s == "weighted_px") return FluxFamily::weighted_px;
    if (s == "log_type") return FluxFamily::log_type;
    throw Error("unknown operator family '" + s + "'");
}

std::string to_string(FieldKind k) {
    switch (k) {
    case FieldKind::constant: return "constant";
    case FieldKind::sinusoidal: return "sinusoidal";
    case FieldKind::reciprocal_sinusoidal: return "reciprocal_sinusoidal";
    case FieldKind::piecewise: return "piecewise";
    }
    return "?";
}

FieldKind field_kind_from_string(const std::string &s) {
    if (s == "constant") return FieldKind::constant;
    if (s == "sinusoidal") return FieldKind::sinusoidal;
    if (s == "reciprocal_sinusoidal") return FieldKind::reciprocal_sinusoidal;
    if (s == "piecewise") return FieldKind::piecewise;
    throw Error("unknown field kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// LocalFlux

double LocalFlux::magnitude(double r) const {
    if (r <= 0.0) return 0.0;
    if (family == FluxFamily::log_type)
        return weight * std::pow(r, p) * std::log(log_scale * r + log_shift);
    if (p == 2.0) return weight * r;
    double m = regularized() ? std::sqrt(r * r + delta * delta) : r;
    return weight * std::pow(m, p - 2.0) * r;
}

double LocalFlux::dmagnitude(double r) const {
    if (family == FluxFamily::log_type) {
        if (r <= 0.0) return 0.0;
        double arg = log_scale * r + log_shift;
        return weight * (p * std::pow(r, p - 1.0) * std::log(arg) + std::pow(r, p) * log_scale / arg);
    }
    if (p == 2.0) return weight;
    if (regularized()) {
        double m2 = r * r + delta * delta;
        return weight * std::pow(m2, 0.5 * (p - 2.0)) * (1.0 + (p - 2.0) * r * r / m2);
    }
    if (r <= 0.0) return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return weight * (p - 1.0) * std::pow(r, p - 2.0);
}

double LocalFlux::slope_at_zero() const {
    if (family == FluxFamily::log_type) return 0.0;
    if (p == 2.0) return weight;
    if (regularized()) return weight * std::pow(delta, p - 2.0);
    return p > 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

double LocalFlux::potential(double r) const {
    if (r <= 0.0) return 0.0;
    if (family == FluxFamily::log_type) {
        auto integrand = [this](double s) { return magnitude(s); };
        return boost::math::quadrature::gauss<double, 30>::integrate(integrand, 0.0, r);
    }
    if (p == 2.0) return 0.5 * weight * r * r;
    if (regularized()) {
        double m = std::sqrt(r * r + delta * delta);
        return weight * (std::pow(m, p) - std::pow(delta, p)) / p;
    }
    return weight * std::pow(r, p) / p;
}

double LocalFlux::inverse_magnitude(double c) const {
    if (c <= 0.0) return 0.0;
    if (!(weight > 0.0)) throw Error("flux magnitude is not invertible for a non-positive weight");
    if (family != FluxFamily::log_type && !regularized()) return std::pow(c / weight, 1.0 / (p - 1.0));
    auto g = [&](double r) { return magnitude(r) - c; };
    double lo = 0.0, hi = 0.0;
    double guess = family == FluxFamily::log_type ? 1.0 : std::pow(c / weight, 1.0 / (p - 1.0));
    if (!bracket_increasing(g, 0.0, std::max(guess, 1e-300), lo, hi))
        throw Error("flux magnitude inversion failed to bracket");
    auto gd = [&](double r) { return std::pair{magnitude(r) - c, dmagnitude(r)}; };
    auto res = safeguarded_newton(gd, lo, hi, guess, 1e-14 * std::max(hi, 1e-300), 400);
    return res.x;
}

Vec LocalFlux::flux(const Vec &xi) const {
    double r = norm(xi);
    if (r == 0.0) return {0.0, 0.0};
    double k = magnitude(r) / r;
    Vec out = k * xi;
    if (!std::isfinite(out[0]) || !std::isfinite(out[1]))
        throw Error("non-finite flux value; check operator parameters");
    return out;
}

Mat2 LocalFlux::jacobian(const Vec &xi) const {
    double r = norm(xi);
    if (r == 0.0) {
        double k0 = slope_at_zero();
        return {k0, 0.0, 0.0, k0};
    }
    double k = magnitude(r) / r;
    double c = (dmagnitude(r) - k) / (r * r);
    return {k + c * xi[0] * xi[0], c * xi[0] * xi[1], c * xi[1] * xi[0], k + c * xi[1] * xi[1]};
}

// ---------------------------------------------------------------------------
// FluxOperator

LocalFlux FluxOperator::at(const Vec &x) const {
    Vec y = (eps == 1.0) ? x : Vec{x[0] / eps, x[1] / eps};
    LocalFlux lf;
    lf.family = family;
    lf.delta = delta;
    switch (family) {
    case FluxFamily::px_laplace:
        lf.p = eval_exponent(exponent, y, dim);
        break;
    case FluxFamily::weighted_p:
        lf.p = exponent.alpha;
        lf.weight = gamma.eval(y, dim);
        break;
    case FluxFamily::weighted_px:
        lf.p = eval_exponent(exponent, y, dim);
        lf.weight = gamma.eval(y, dim);
        break;
    case FluxFamily::log_type:
        lf.p = eval_exponent(exponent, y, dim);
        lf.weight = gamma1.eval(y, dim);
        lf.log_scale = gamma2.eval(y, dim);
        lf.log_shift = gamma3.eval(y, dim);
        break;
    }
    return lf;
}

double FluxOperator::exponent_at(const Vec &x) const {
    Vec y = (eps == 1.0) ? x : Vec{x[0] / eps, x[1] / eps};
    return family == FluxFamily::weighted_p ? exponent.alpha : eval_exponent(exponent, y, dim);
}

double FluxOperator::resolved_C1() const {
    if (C1) return *C1;
    switch (family) {
    case FluxFamily::weighted_p:
    case FluxFamily::weighted_px: return gamma.lower_bound();
    default: return 1.0;
    }
}

double FluxOperator::resolved_C2() const {
    if (C2) return *C2;
    switch (family) {
    case FluxFamily::weighted_p:
    case FluxFamily::weighted_px: return gamma.upper_bound();
    default: return 1.0;
    }
}

bool FluxOperator::x_independent() const {
    switch (family) {
    case FluxFamily::px_laplace: return exponent.shape.is_constant();
    case FluxFamily::weighted_p: return gamma.is_constant();
    case FluxFamily::weighted_px: return gamma.is_constant() && exponent.shape.is_constant();
    case FluxFamily::log_type:
        return exponent.shape.is_constant() && gamma1.is_constant() && gamma2.is_constant() &&
               gamma3.is_constant();
    }
    return false;
}

void FluxOperator::validate() const {
    if (dim != 1 && dim != 2) throw Error("operator dimension must be 1 or 2");
    exponent.validate();
    if (family == FluxFamily::weighted_p && !exponent.shape.is_constant())
        throw Error("weighted_p requires a constant exponent");
    if (family == FluxFamily::log_type) {
        if (!(gamma1.lower_bound() > 0.0) || !(gamma2.lower_bound() > 0.0))
            throw Error("log_type requires gamma1, gamma2 > 0");
        if (!(gamma3.lower_bound() > 1.0)) throw Error("log_type requires gamma3 > 1");
    }
    if (!(delta >= 0.0)) throw Error("delta must be nonnegative");
    if (!(eps > 0.0)) throw Error("eps must be positive");
}

Vec eval_flux(const FluxOperator &op, const Vec &x, const Vec &xi) { return op.eval(x, xi); }

FluxOperator rescale(const FluxOperator &op, double eps) {
    if (!(eps > 0.0)) throw Error("rescale: eps must be positive");
    FluxOperator out = op;
    out.eps = op.eps * eps;
    return out;
}

// ---------------------------------------------------------------------------
// Structural sampling

namespace {

struct StructuralSample {
    Vec x, xi, eta;
};

std::vector<StructuralSample> draw_samples(const FluxOperator &op, const StructuralOptions &opts) {
    if (opts.n_samples < 1) throw Error("verify_structural: n_samples must be >= 1");
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto ball = [&]() -> Vec {
        if (op.dim == 1) return {opts.radius * (2.0 * unit(rng) - 1.0), 0.0};
        double r = opts.radius * std::sqrt(unit(rng));
        double t = two_pi * unit(rng);
        return {r * std::cos(t), r * std::sin(t)};
    };
    std::vector<StructuralSample> s(static_cast<std::size_t>(opts.n_samples));
    for (auto &smp : s) {
        smp.x = {unit(rng), op.dim == 2 ? unit(rng) : 0.0};
        smp.xi = ball();
        smp.eta = ball();
    }
    return s;
}

struct Margins {
    double mono, coer, bound;
};

Margins sample_margins(const FluxOperator &op, const StructuralSample &s, double C1, double C2) {
    // The cell is sampled directly, not through the eps view.
    LocalFlux lf = op.at(op.eps == 1.0 ? s.x : Vec{s.x[0] * op.eps, s.x[1] * op.eps});
    Vec a = lf.flux(s.xi), b = lf.flux(s.eta);
    double r = norm(s.xi);
    double rp = std::pow(r, lf.p);
    Margins m;
    m.mono = (s.xi == s.eta) ? std::numeric_limits<double>::infinity() : dot(a - b, s.xi - s.eta);
    m.coer = dot(a, s.xi) - C1 * (rp - 1.0);
    m.bound = C2 * (std::pow(r, lf.p - 1.0) + 1.0) - norm(a);
    return m;
}

StructuralReport finish(const FluxOperator &op, const StructuralOptions &opts, double mono, double coer,
                        double bound) {
    StructuralReport rep;
    rep.n_samples = opts.n_samples;
    rep.monotonicity_min = mono;
    rep.coercivity_margin_min = coer;
    rep.boundedness_margin_min = bound;
    rep.C1 = op.resolved_C1();
    rep.C2 = op.resolved_C2();
    rep.pass = mono > 0.0 && coer >= -opts.tol && bound >= -opts.tol;
    return rep;
}

}  // namespace

StructuralReport verify_structural_serial(const FluxOperator &op, const StructuralOptions &opts) {
    auto samples = draw_samples(op, opts);
    double C1 = op.resolved_C1(), C2 = op.resolved_C2();
    double mono = std::numeric_limits<double>::infinity(), coer = mono, bound = mono;
    for (const auto &s : samples) {
        Margins m = sample_margins(op, s, C1, C2);
        mono = std::min(mono, m.mono);
        coer = std::min(coer, m.coer);
        bound = std::min(bound, m.bound);
    }
    return finish(op, opts, mono, coer, bound);
}

StructuralReport verify_structural(const FluxOperator &op, const StructuralOptions &opts) {
    auto samples = draw_samples(op, opts);
    double C1 = op.resolved_C1(), C2 = op.resolved_C2();
    double mono = std::numeric_limits<double>::infinity(), coer = mono, bound = mono;
    const long n = static_cast<long>(samples.size());
#pragma omp parallel for reduction(min : mono, coer, bound) schedule(static)
    for (long i = 0; i < n; ++i) {
        Margins m = sample_margins(op, samples[static_cast<std::size_t>(i)], C1, C2);
        mono = std::min(mono, m.mono);
        coer = std::min(coer, m.coer);
        bound = std::min(bound, m.bound);
    }
    return finish(op, opts, mono, coer, bound);
}

}  // namespace homobst
