#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace homobst {

/// Points and gradients live in R^1 or R^2; 1D data keeps the second slot at zero.
using Vec = std::array<double, 2>;

/// Symmetric 2x2 matrix stored row-major.
using Mat2 = std::array<double, 4>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double dot(const Vec &a, const Vec &b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec &a) { return std::sqrt(a[0] * a[0] + a[1] * a[1]); }
inline Vec operator+(const Vec &a, const Vec &b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(const Vec &a, const Vec &b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec &a) { return {s * a[0], s * a[1]}; }

inline Vec mat_vec(const Mat2 &m, const Vec &v) {
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

/// x - floor(x): reduces a coordinate onto the unit period, exactly for representable shifts.
inline double wrap_unit(double x) {
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

}  // namespace homobst
