#pragma once

#include "homobst/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace homobst {

/// Raised when a table is evaluated beyond its sampled radius; callers re-tabulate.
class TableRangeError : public Error {
public:
    using Error::Error;
};

/// Sampled homogenized flux a0 and density h.
///
/// 1D layout: samples xi_k = k * xi_max / (m - 1), k = 0..m-1, on the nonnegative half line;
/// negative arguments use the odd extension a0(-xi) = -a0(xi) and h(-xi) = h(xi).
///
/// 2D layout: polar grid, sample (i, j) at radius radii[i] (log-spaced from r_min to xi_max)
/// and angle 2 pi j / n_theta, stored at index i * n_theta + j.  Interpolation is bilinear
/// in (r, theta); below r_min the value is scaled linearly to a0(0) = 0.
struct HomogenizedOperatorTable {
    int dim = 1;
    double xi_max = 1.0;
    std::vector<double> radii;  // 1D: the sample abscissae
    int n_theta = 1;

    std::vector<Vec> xi_samples;
    std::vector<Vec> a0_values;
    std::vector<double> h_values;
    bool has_density = false;

    // provenance
    std::string family;
    std::string parameters;
    int n_cell = 0;
    double alpha = 2.0;
    double beta = 2.0;

    std::size_t sample_count() const { return xi_samples.size(); }
    double r_min() const { return radii.empty() ? 0.0 : radii.front(); }

    /// Recomputes the cumulative potential used by the 1D solver path.
    void finalize();

    Vec eval(const Vec &xi) const;
    Mat2 jacobian(const Vec &xi) const;
    /// Potential of the interpolated flux: exact for 1D, ray integral in 2D.
    double potential(const Vec &xi) const;
    double density(const Vec &xi) const;

    // 1D cumulative integral of the interpolant at the sample abscissae.
    std::vector<double> cumulative;
};

Vec eval_table(const HomogenizedOperatorTable &table, const Vec &xi);

/// Versioned text record; all reals with 17 significant digits.
void write_table(const HomogenizedOperatorTable &table, std::ostream &os);
HomogenizedOperatorTable read_table(std::istream &is);
void save_table(const HomogenizedOperatorTable &table, const std::string &path);
HomogenizedOperatorTable load_table(const std::string &path);

/// Decimal text with 17 significant digits; infinities as "+inf"/"-inf".
std::string format_real(double v);

}  // namespace homobst
