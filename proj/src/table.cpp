#include "homobst/table.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace homobst {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Bracket {
    std::size_t k;
    double t;
};

Bracket locate(const std::vector<double> &r, double x) {
    auto it = std::upper_bound(r.begin(), r.end(), x);
    std::size_t k = it == r.begin() ? 0 : static_cast<std::size_t>(it - r.begin()) - 1;
    k = std::min(k, r.size() - 2);
    return {k, (x - r[k]) / (r[k + 1] - r[k])};
}

Vec lerp_any(const Vec &a, const Vec &b, double t) { return {(1.0 - t) * a[0] + t * b[0], (1.0 - t) * a[1] + t * b[1]}; }
double lerp_any(double a, double b, double t) { return (1.0 - t) * a + t * b; }
Vec scale_any(const Vec &a, double s) { return s * a; }
double scale_any(double a, double s) { return s * a; }

// Weights within rounding of a node snap to it, so stored samples evaluate exactly.
double snap(double t) { return t < 1e-12 ? 0.0 : (t > 1.0 - 1e-12 ? 1.0 : t); }

template <class Getter>
auto polar_interp(const HomogenizedOperatorTable &tab, const Vec &xi, Getter &&get) {
    double r = norm(xi);
    double theta = std::atan2(xi[1], xi[0]);
    if (theta < 0.0) theta += two_pi;
    double jf = theta / (two_pi / tab.n_theta);
    double jfl = std::floor(jf);
    double tt = snap(jf - jfl);
    auto j0 = static_cast<std::size_t>(static_cast<long>(jfl) % tab.n_theta);
    auto j1 = (j0 + 1) % static_cast<std::size_t>(tab.n_theta);
    auto at = [&](std::size_t i, std::size_t j) { return get(i * static_cast<std::size_t>(tab.n_theta) + j); };
    if (r < tab.r_min()) {
        double s = r / tab.r_min();
        auto v = lerp_any(at(0, j0), at(0, j1), tt);
        return scale_any(v, s);
    }
    Bracket b = locate(tab.radii, r);
    b.t = snap(b.t);
    auto lo = lerp_any(at(b.k, j0), at(b.k, j1), tt);
    auto hi = lerp_any(at(b.k + 1, j0), at(b.k + 1, j1), tt);
    return lerp_any(lo, hi, b.t);
}

}  // namespace

void HomogenizedOperatorTable::finalize() {
    cumulative.clear();
    if (dim != 1) return;
    cumulative.assign(radii.size(), 0.0);
    for (std::size_t k = 1; k < radii.size(); ++k)
        cumulative[k] = cumulative[k - 1] + 0.5 * (radii[k] - radii[k - 1]) * (a0_values[k - 1][0] + a0_values[k][0]);
}

namespace {

Vec eval_unchecked(const HomogenizedOperatorTable &tab, const Vec &xi) {
    if (tab.dim == 1) {
        double r = std::abs(xi[0]);
        Bracket b = locate(tab.radii, r);
        double v = (1.0 - b.t) * tab.a0_values[b.k][0] + b.t * tab.a0_values[b.k + 1][0];
        return {xi[0] < 0.0 ? -v : v, 0.0};
    }
    return polar_interp(tab, xi, [&](std::size_t idx) { return tab.a0_values[idx]; });
}

void check_range(const HomogenizedOperatorTable &tab, const Vec &xi) {
    double r = norm(xi);
    if (!(r <= tab.xi_max)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "table evaluated at |xi| = %.6g beyond xi_max = %.6g", r, tab.xi_max);
        throw TableRangeError(buf);
    }
}

}  // namespace

Vec HomogenizedOperatorTable::eval(const Vec &xi) const {
    check_range(*this, xi);
    return eval_unchecked(*this, xi);
}

Mat2 HomogenizedOperatorTable::jacobian(const Vec &xi) const {
    check_range(*this, xi);
    if (dim == 1) {
        Bracket b = locate(radii, std::abs(xi[0]));
        double slope = (a0_values[b.k + 1][0] - a0_values[b.k][0]) / (radii[b.k + 1] - radii[b.k]);
        return {slope, 0.0, 0.0, slope};
    }
    double r = norm(xi);
    double s = 1e-6 * std::max(r, r_min());
    auto clamp_eval = [&](Vec y) {
        double ry = norm(y);
        if (ry > xi_max) y = (xi_max / ry) * y;
        return eval_unchecked(*this, y);
    };
    Mat2 J{};
    for (int c = 0; c < 2; ++c) {
        Vec e{0.0, 0.0};
        e[static_cast<std::size_t>(c)] = s;
        Vec d = (0.5 / s) * (clamp_eval(xi + e) - clamp_eval(xi - e));
        J[static_cast<std::size_t>(c)] = d[0];
        J[static_cast<std::size_t>(2 + c)] = d[1];
    }
    double off = 0.5 * (J[1] + J[2]);
    J[1] = J[2] = off;
    return J;
}

double HomogenizedOperatorTable::potential(const Vec &xi) const {
    check_range(*this, xi);
    if (dim == 1) {
        double r = std::abs(xi[0]);
        Bracket b = locate(radii, r);
        double ar = (1.0 - b.t) * a0_values[b.k][0] + b.t * a0_values[b.k + 1][0];
        return cumulative[b.k] + 0.5 * (r - radii[b.k]) * (a0_values[b.k][0] + ar);
    }
    auto f = [&](double t) { return dot(eval_unchecked(*this, t * xi), xi); };
    return boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, 1.0);
}

double HomogenizedOperatorTable::density(const Vec &xi) const {
    check_range(*this, xi);
    if (!has_density) throw Error("table carries no homogenized density");
    if (dim == 1) {
        Bracket b = locate(radii, std::abs(xi[0]));
        return (1.0 - b.t) * h_values[b.k] + b.t * h_values[b.k + 1];
    }
    return polar_interp(*this, xi, [&](std::size_t idx) { return h_values[idx]; });
}

Vec eval_table(const HomogenizedOperatorTable &table, const Vec &xi) { return table.eval(xi); }

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_table(const HomogenizedOperatorTable &t, std::ostream &os) {
    os << "homobst-table 1\n";
    os << "family " << t.family << "\n";
    os << "parameters " << t.parameters << "\n";
    os << "dim " << t.dim << "\n";
    os << "n_cell " << t.n_cell << "\n";
    os << "xi_max " << format_real(t.xi_max) << "\n";
    os << "alpha " << format_real(t.alpha) << "\n";
    os << "beta " << format_real(t.beta) << "\n";
    os << "has_density " << (t.has_density ? 1 : 0) << "\n";
    if (t.dim == 1)
        os << "layout uniform_half " << t.radii.size() << "\n";
    else
        os << "layout polar " << t.radii.size() << " " << t.n_theta << " " << format_real(t.r_min()) << "\n";
    os << "samples " << t.sample_count() << "\n";
    for (std::size_t k = 0; k < t.sample_count(); ++k) {
        os << format_real(t.xi_samples[k][0]) << " " << format_real(t.xi_samples[k][1]) << " "
           << format_real(t.a0_values[k][0]) << " " << format_real(t.a0_values[k][1]) << " "
           << format_real(t.has_density ? t.h_values[k] : 0.0) << "\n";
    }
    os << "end\n";
}

namespace {

std::string expect_key(std::istream &is, const std::string &key) {
    std::string line;
    if (!std::getline(is, line)) throw Error("table: unexpected end of file, wanted '" + key + "'");
    if (line.compare(0, key.size() + 1, key + " ") != 0 && line != key)
        throw Error("table: expected '" + key + "', got '" + line + "'");
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
}

}  // namespace

HomogenizedOperatorTable read_table(std::istream &is) {
    HomogenizedOperatorTable t;
    std::string version = expect_key(is, "homobst-table");
    if (version != "1") throw Error("table: unsupported version '" + version + "'");
    t.family = expect_key(is, "family");
    t.parameters = expect_key(is, "parameters");
    t.dim = std::stoi(expect_key(is, "dim"));
    t.n_cell = std::stoi(expect_key(is, "n_cell"));
    t.xi_max = std::stod(expect_key(is, "xi_max"));
    t.alpha = std::stod(expect_key(is, "alpha"));
    t.beta = std::stod(expect_key(is, "beta"));
    t.has_density = expect_key(is, "has_density") == "1";
    std::istringstream layout(expect_key(is, "layout"));
    std::string kind;
    std::size_t n_r = 0;
    layout >> kind >> n_r;
    if (t.dim == 1 && kind == "uniform_half") {
        t.n_theta = 1;
    } else if (t.dim == 2 && kind == "polar") {
        layout >> t.n_theta;
    } else {
        throw Error("table: layout '" + kind + "' does not match dim");
    }
    std::size_t count = std::stoul(expect_key(is, "samples"));
    if (count != n_r * static_cast<std::size_t>(t.n_theta) || n_r < 2) throw Error("table: inconsistent sample count");
    t.xi_samples.resize(count);
    t.a0_values.resize(count);
    t.h_values.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::string line;
        if (!std::getline(is, line)) throw Error("table: truncated sample block");
        std::istringstream ls(line);
        std::string f[5];
        for (auto &s : f)
            if (!(ls >> s)) throw Error("table: malformed sample line " + std::to_string(k));
        t.xi_samples[k] = {std::stod(f[0]), std::stod(f[1])};
        t.a0_values[k] = {std::stod(f[2]), std::stod(f[3])};
        t.h_values[k] = std::stod(f[4]);
    }
    expect_key(is, "end");
    t.radii.resize(n_r);
    for (std::size_t i = 0; i < n_r; ++i)
        t.radii[i] = norm(t.xi_samples[i * static_cast<std::size_t>(t.n_theta)]);
    if (!t.has_density) t.h_values.clear();
    t.finalize();
    return t;
}

void save_table(const HomogenizedOperatorTable &table, const std::string &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write table file '" + path + "'");
    write_table(table, os);
    if (!os) throw Error("error writing table file '" + path + "'");
}

HomogenizedOperatorTable load_table(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open table file '" + path + "'");
    return read_table(is);
}

}  // namespace homobst
