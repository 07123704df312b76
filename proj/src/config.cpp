#include "homobst/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace homobst {

ScalarField make_source(const SourceSpec &spec, const Grid &grid) {
    const double L = grid.length;
    return sample_nodes(grid, [&](const Vec &x) {
        double shape = 1.0;
        switch (spec.kind) {
        case SourceKind::constant: break;
        case SourceKind::sine_bump:
            for (int d = 0; d < grid.dim; ++d) shape *= std::sin(std::numbers::pi * x[static_cast<std::size_t>(d)] / L);
            break;
        case SourceKind::indicator_bump:
            for (int d = 0; d < grid.dim; ++d) {
                double t = x[static_cast<std::size_t>(d)] / L;
                if (t < 0.25 || t > 0.75) shape = 0.0;
            }
            break;
        }
        return spec.offset + spec.value * shape;
    });
}

double SweepConfig::resolved_s_exponent() const {
    return s_exponent ? *s_exponent : default_s_exponent(op.dim, op.exponent.alpha);
}

void SweepConfig::validate() const {
    op.validate();
    if (!(length > 0.0)) throw Error("domain length must be positive");
    if (n_fine < 2) throw Error("n_fine must be at least 2");
    if (eps_list.empty()) throw Error("eps_list must not be empty");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw Error("eps_list entries must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw Error("eps_list must be strictly decreasing");
    }
    if (static_cast<double>(n_fine) * eps_list.back() < 16.0 * length)
        throw Error("n_fine * min(eps_list) must be at least 16 * length (16 nodes per oscillation period)");
    if (cell_resolution() < 4) throw Error("n_cell must be at least 4");
    if (!(table.xi_max > 0.0)) throw Error("xi_max must be positive");
    if (psi_amplitude < 0.0) throw Error("psi_amplitude must be nonnegative");
    if (s_exponent && !(*s_exponent >= 1.0)) throw Error("s_exponent must be >= 1");
    if (format != "csv" && format != "json") throw Error("output format must be csv or json");
    if (!(solver.tol_rel > 0.0)) throw Error("solver tol_rel must be positive");
}

namespace {

const std::map<std::string, std::set<std::string>> &schema() {
    static const std::set<std::string> field_keys{"kind", "base", "amplitude", "periods", "low", "high"};
    static const std::map<std::string, std::set<std::string>> s{
        {"operator", {"family", "dim", "delta", "C1", "C2"}},
        {"exponent", {"kind", "base", "amplitude", "periods", "low", "high", "alpha", "beta"}},
        {"gamma", field_keys},
        {"gamma1", field_keys},
        {"gamma2", field_keys},
        {"gamma3", field_keys},
        {"domain", {"length"}},
        {"cell", {"n_cell", "xi_max", "samples", "n_r", "n_theta", "r_min_ratio", "method", "tol"}},
        {"problem",
         {"f_kind", "f_value", "f_offset", "f_oscillation", "psi_kind", "psi_value", "psi_offset", "psi_mode",
          "psi_amplitude", "s_exponent"}},
        {"sweep", {"eps_list", "n_fine", "seed", "structural_samples", "structural_radius"}},
        {"solver", {"tol_rel", "max_iters", "method"}},
        {"output", {"dir", "format", "name"}},
    };
    return s;
}

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line;
};

class Keys {
public:
    std::map<std::string, Entry> items;

    bool has(const std::string &k) const { return items.count(k) != 0; }

    std::string str(const std::string &k, const std::string &def) const {
        auto it = items.find(k);
        return it == items.end() ? def : it->second.value;
    }

    double real(const std::string &k, double def) const {
        auto it = items.find(k);
        return it == items.end() ? def : parse_real(it->second.value, k, it->second.line);
    }

    long integer(const std::string &k, long def) const {
        auto it = items.find(k);
        if (it == items.end()) return def;
        const std::string &v = it->second.value;
        long out = 0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size()) fail(k, it->second.line, "expected an integer");
        return out;
    }

    [[noreturn]] static void fail(const std::string &k, int line, const std::string &what) {
        throw Error("config line " + std::to_string(line) + ": key '" + k + "': " + what);
    }

    /// Decimal reals and a/b fractions.
    static double parse_real(const std::string &raw, const std::string &k, int line) {
        std::string v = trim(raw);
        auto slash = v.find('/');
        if (slash != std::string::npos)
            return parse_real(v.substr(0, slash), k, line) / parse_real(v.substr(slash + 1), k, line);
        double out = 0.0;
        auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
            fail(k, line, "expected a finite real, got '" + raw + "'");
        return out;
    }
};

PeriodicField read_field(const Keys &keys, const std::string &sec, const PeriodicField &def) {
    PeriodicField f = def;
    if (keys.has(sec + ".kind")) f.kind = field_kind_from_string(keys.str(sec + ".kind", ""));
    f.base = keys.real(sec + ".base", f.base);
    f.amplitude = keys.real(sec + ".amplitude", f.amplitude);
    f.periods = static_cast<int>(keys.integer(sec + ".periods", f.periods));
    f.low = keys.real(sec + ".low", f.low);
    f.high = keys.real(sec + ".high", f.high);
    if (f.periods < 1) throw Error("config: " + sec + ".periods must be >= 1");
    return f;
}

SourceKind source_kind(const std::string &s) {
    if (s == "constant") return SourceKind::constant;
    if (s == "sine_bump") return SourceKind::sine_bump;
    if (s == "indicator_bump") return SourceKind::indicator_bump;
    throw Error("config: unknown source kind '" + s + "'");
}

}  // namespace

SweepConfig parse_config(const std::string &text) {
    Keys keys;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw Error("config line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section))
                throw Error("config line " + std::to_string(lineno) + ": unknown section '" + section + "'");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string full;
        if (section.empty()) {
            for (const auto &[sec, names] : schema()) {
                if (!names.count(key)) continue;
                if (!full.empty())
                    throw Error("config line " + std::to_string(lineno) + ": key '" + key +
                                "' is ambiguous outside a section");
                full = sec + "." + key;
            }
        } else if (schema().at(section).count(key)) {
            full = section + "." + key;
        }
        if (full.empty()) throw Error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (keys.has(full)) throw Error("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        keys.items[full] = {value, lineno};
    }

    for (const char *req : {"operator.family", "sweep.eps_list", "sweep.n_fine"})
        if (!keys.has(req)) throw Error(std::string("config: missing required key '") + (std::strchr(req, '.') + 1) + "'");

    SweepConfig c;
    c.source_text = text;
    FluxOperator &op = c.op;
    op.family = flux_family_from_string(keys.str("operator.family", ""));
    op.dim = static_cast<int>(keys.integer("operator.dim", 1));
    if (op.dim != 1 && op.dim != 2) throw Error("config: dim must be 1 or 2");
    op.delta = keys.real("operator.delta", op.delta);
    if (keys.has("operator.C1")) op.C1 = keys.real("operator.C1", 0.0);
    if (keys.has("operator.C2")) op.C2 = keys.real("operator.C2", 0.0);

    PeriodicField shape = read_field(keys, "exponent", PeriodicField::constant(2.0));
    op.exponent.shape = shape;
    op.exponent.alpha = keys.real("exponent.alpha", shape.lower_bound());
    op.exponent.beta = keys.real("exponent.beta", shape.upper_bound());
    op.exponent.validate();
    op.gamma = read_field(keys, "gamma", op.gamma);
    op.gamma1 = read_field(keys, "gamma1", op.gamma1);
    op.gamma2 = read_field(keys, "gamma2", op.gamma2);
    op.gamma3 = read_field(keys, "gamma3", op.gamma3);

    c.length = keys.real("domain.length", 1.0);

    c.n_cell = static_cast<int>(keys.integer("cell.n_cell", 0));
    c.table.xi_max = keys.real("cell.xi_max", c.table.xi_max);
    c.table.samples_1d = static_cast<int>(keys.integer("cell.samples", c.table.samples_1d));
    c.table.n_r = static_cast<int>(keys.integer("cell.n_r", c.table.n_r));
    c.table.n_theta = static_cast<int>(keys.integer("cell.n_theta", c.table.n_theta));
    c.table.r_min_ratio = keys.real("cell.r_min_ratio", c.table.r_min_ratio);
    c.cell.tol_rel = keys.real("cell.tol", c.cell.tol_rel);
    if (keys.has("cell.method")) {
        std::string m = keys.str("cell.method", "");
        if (m == "newton") c.cell.method = CellMethod::newton;
        else if (m == "gauss_seidel") c.cell.method = CellMethod::gauss_seidel;
        else throw Error("config: unknown cell method '" + m + "'");
    }

    c.f.kind = source_kind(keys.str("problem.f_kind", "constant"));
    c.f.value = keys.real("problem.f_value", 0.0);
    c.f.offset = keys.real("problem.f_offset", 0.0);
    c.f_oscillation = keys.real("problem.f_oscillation", 0.0);
    c.psi.kind = source_kind(keys.str("problem.psi_kind", "constant"));
    c.psi.value = keys.real("problem.psi_value", c.psi.kind == SourceKind::constant ? -1.0 : 0.0);
    c.psi.offset = keys.real("problem.psi_offset", 0.0);
    if (c.psi.kind == SourceKind::constant) {
        c.psi.offset += c.psi.value;
        c.psi.value = 0.0;
    }
    std::string mode = keys.str("problem.psi_mode", "fixed");
    if (mode == "fixed") c.psi_mode = ObstacleMode::fixed;
    else if (mode == "oscillatory") c.psi_mode = ObstacleMode::oscillatory;
    else throw Error("config: unknown psi_mode '" + mode + "'");
    c.psi_amplitude = keys.real("problem.psi_amplitude", 0.0);
    if (keys.has("problem.s_exponent")) c.s_exponent = keys.real("problem.s_exponent", 1.0);

    {
        const Entry &e = keys.items.at("sweep.eps_list");
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) c.eps_list.push_back(Keys::parse_real(item, "eps_list", e.line));
        }
    }
    c.n_fine = static_cast<int>(keys.integer("sweep.n_fine", 0));
    c.structural.seed = static_cast<std::uint64_t>(keys.integer("sweep.seed", 1));
    c.structural.n_samples = static_cast<int>(keys.integer("sweep.structural_samples", c.structural.n_samples));
    c.structural.radius = keys.real("sweep.structural_radius", c.structural.radius);

    c.solver.tol_rel = keys.real("solver.tol_rel", c.solver.tol_rel);
    c.solver.max_iters = static_cast<int>(keys.integer("solver.max_iters", 0));
    if (keys.has("solver.method")) {
        std::string m = keys.str("solver.method", "");
        if (m == "projected_newton") c.solver.method = SolverMethod::projected_newton;
        else if (m == "gauss_seidel") c.solver.method = SolverMethod::gauss_seidel;
        else throw Error("config: unknown solver method '" + m + "'");
    }

    c.out_dir = keys.str("output.dir", c.out_dir);
    c.format = keys.str("output.format", c.format);
    c.name = keys.str("output.name", c.name);

    c.validate();
    return c;
}

SweepConfig load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace homobst
