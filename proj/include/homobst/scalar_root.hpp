#pragma once

#include <cmath>
#include <limits>

namespace homobst {

struct RootResult {
    double x = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Root of a nondecreasing scalar map g on the bracket [lo, hi] with g(lo) <= 0 <= g(hi).
/// Newton steps are taken when they stay inside the current bracket and
/// shrink |g| fast enough; bisection otherwise.
template <class Fn>
RootResult safeguarded_newton(Fn &&g_and_dg, double lo, double hi, double x0, double xtol,
                              int max_iter = 200) {
    RootResult res;
    double x = (x0 >= lo && x0 <= hi) ? x0 : 0.5 * (lo + hi);
    double prev_step = hi - lo;
    for (int it = 0; it < max_iter; ++it) {
        res.iterations = it + 1;
        auto [g, dg] = g_and_dg(x);
        if (g == 0.0) {
            res.x = x;
            res.converged = true;
            return res;
        }
        if (g < 0.0) lo = x; else hi = x;
        double next;
        bool newton_ok = std::isfinite(dg) && dg > 0.0;
        if (newton_ok) {
            next = x - g / dg;
            if (!(next >= lo && next <= hi) || std::abs(next - x) > 0.5 * prev_step) newton_ok = false;
        }
        if (!newton_ok) next = 0.5 * (lo + hi);
        prev_step = std::abs(next - x);
        x = next;
        if (hi - lo <= xtol || prev_step <= xtol) {
            res.x = x;
            res.converged = true;
            return res;
        }
    }
    res.x = x;
    return res;
}

/// Grows [lo, hi] around x0 by doubling until g(lo) <= 0 <= g(hi).  Returns false when the
/// bracket cannot be found (non-finite values or no sign change).
template <class Fn>
bool bracket_increasing(Fn &&g, double x0, double step, double &lo, double &hi, int max_doublings = 200) {
    if (!(step > 0.0)) step = 1.0;
    double g0 = g(x0);
    if (!std::isfinite(g0)) return false;
    if (g0 == 0.0) {
        lo = hi = x0;
        return true;
    }
    if (g0 < 0.0) {
        lo = x0;
        for (int k = 0; k < max_doublings; ++k) {
            hi = lo + step;
            double gh = g(hi);
            if (!std::isfinite(gh)) return false;
            if (gh == 0.0) lo = hi;
            if (gh >= 0.0) return true;
            lo = hi;
            step *= 2.0;
        }
    } else {
        hi = x0;
        for (int k = 0; k < max_doublings; ++k) {
            lo = hi - step;
            double gl = g(lo);
            if (!std::isfinite(gl)) return false;
            if (gl == 0.0) hi = lo;
            if (gl <= 0.0) return true;
            hi = lo;
            step *= 2.0;
        }
    }
    return false;
}

}  // namespace homobst
