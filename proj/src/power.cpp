#include "easched/power.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace easched {

namespace {

// Index of the greatest node <= q. Caller guarantees q is within [front, back].
std::size_t base_index(const std::vector<double>& nodes, double q) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), q);
    return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

std::array<double, 4> components(const UtilizationVector& u) {
    return {u.cpu_pct, u.mem_mb, u.disk_bps, u.net_bps};
}

constexpr const char* kAxisNames[4] = {"cpu_pct", "mem_mb", "disk_bps", "net_bps"};

// Least squares via Householder QR with column scaling. cols holds the design
// matrix one predictor at a time; a collapsing pivot means the named columns
// are collinear (or constant) and the fit is refused.
std::vector<double> solve_least_squares(std::vector<std::vector<double>> cols,
                                        std::vector<double> rhs,
                                        const std::vector<std::string>& names) {
    const std::size_t n = rhs.size();
    const std::size_t k = cols.size();

    std::vector<double> scale(k, 1.0);
    for (std::size_t j = 0; j < k; ++j) {
        double m = 0.0;
        for (double v : cols[j]) m = std::max(m, std::abs(v));
        if (m > 0.0) {
            scale[j] = m;
            for (double& v : cols[j]) v /= m;
        }
    }

    // Householder transformations applied to the columns and the rhs together.
    std::vector<std::size_t> deficient;
    for (std::size_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i) norm += cols[j][i] * cols[j][i];
        norm = std::sqrt(norm);
        if (norm <= 1e-10 * std::sqrt(static_cast<double>(n))) {
            deficient.push_back(j);
            continue;
        }
        double head = cols[j][j];
        double alpha = head >= 0.0 ? -norm : norm;
        std::vector<double> v(n - j, 0.0);
        v[0] = head - alpha;
        for (std::size_t i = j + 1; i < n; ++i) v[i - j] = cols[j][i];
        double vtv = 0.0;
        for (double x : v) vtv += x * x;
        if (vtv > 0.0) {
            auto reflect = [&](std::vector<double>& col) {
                double dot = 0.0;
                for (std::size_t i = j; i < n; ++i) dot += v[i - j] * col[i];
                double f = 2.0 * dot / vtv;
                for (std::size_t i = j; i < n; ++i) col[i] -= f * v[i - j];
            };
            for (std::size_t jj = j; jj < k; ++jj) reflect(cols[jj]);
            reflect(rhs);
        }
        cols[j][j] = alpha;
    }

    if (!deficient.empty()) {
        std::string msg = "rank-deficient design matrix; collinear column(s):";
        for (std::size_t j : deficient) msg += " " + names[j];
        throw CalibrationError(msg);
    }

    // Back-substitution on the triangular factor.
    std::vector<double> x(k, 0.0);
    for (std::size_t jj = k; jj-- > 0;) {
        double s = rhs[jj];
        for (std::size_t j2 = jj + 1; j2 < k; ++j2) s -= cols[j2][jj] * x[j2];
        x[jj] = s / cols[jj][jj];
    }
    for (std::size_t j = 0; j < k; ++j) x[j] /= scale[j];
    return x;
}

} // namespace

bool ResidualGrid::contains(const UtilizationVector& util) const {
    auto q = components(util);
    for (int a = 0; a < 4; ++a) {
        if (q[a] < axes[a].front() || q[a] > axes[a].back()) return false;
    }
    return true;
}

UtilizationVector ResidualGrid::clamp(const UtilizationVector& util) const {
    auto q = components(util);
    for (int a = 0; a < 4; ++a) {
        q[a] = std::clamp(q[a], axes[a].front(), axes[a].back());
    }
    return UtilizationVector{q[0], q[1], q[2], q[3]};
}

void ResidualGrid::validate() const {
    std::size_t expected = 1;
    for (int a = 0; a < 4; ++a) {
        const auto& nodes = axes[a];
        if (nodes.size() < 2) {
            throw std::invalid_argument(std::string("residual grid axis ") + kAxisNames[a] +
                                        " needs at least 2 nodes");
        }
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            if (!(nodes[i - 1] < nodes[i])) {
                throw std::invalid_argument(std::string("residual grid axis ") + kAxisNames[a] +
                                            " is not strictly increasing");
            }
        }
        expected *= nodes.size();
    }
    if (residuals.size() != expected) {
        throw std::invalid_argument("residual grid value count does not match the lattice");
    }
    for (double r : residuals) {
        if (!std::isfinite(r)) throw std::invalid_argument("non-finite residual value");
    }
}

double mlr_predict(const MlrCoefficients& c, const UtilizationVector& u) {
    return c.intercept_w + c.beta_cpu * u.cpu_pct + c.beta_mem * u.mem_mb +
           c.beta_disk * u.disk_bps + c.beta_net * u.net_bps;
}

double residual_correction(const ResidualGrid& grid, const UtilizationVector& util) {
    auto q = components(util);
    std::array<std::size_t, 4> base{};
    for (int a = 0; a < 4; ++a) {
        if (q[a] < grid.axes[a].front() || q[a] > grid.axes[a].back()) {
            std::ostringstream msg;
            msg << "utilization outside residual lattice on axis " << kAxisNames[a] << ": "
                << q[a] << " not in [" << grid.axes[a].front() << ", " << grid.axes[a].back()
                << "]";
            throw PowerRangeError(msg.str());
        }
        base[a] = base_index(grid.axes[a], q[a]);
    }

    double value = grid.at(base[0], base[1], base[2], base[3]);

    // One independent linear increment per axis from the base node. A query
    // sitting exactly on a node (including the top node of an axis) gets a
    // zero-weight increment there, so node queries return stored residuals.
    for (int a = 0; a < 4; ++a) {
        std::size_t k = base[a];
        if (k + 1 >= grid.axes[a].size()) continue;
        double x0 = grid.axes[a][k];
        double x1 = grid.axes[a][k + 1];
        double t = (q[a] - x0) / (x1 - x0);
        if (t == 0.0) continue;
        auto bumped = base;
        bumped[a] = k + 1;
        value += (grid.at(bumped[0], bumped[1], bumped[2], bumped[3]) -
                  grid.at(base[0], base[1], base[2], base[3])) *
                 t;
    }
    return value;
}

double lcmlr_predict(const PowerModel& model, const UtilizationVector& util) {
    if (model.kind != PowerModelKind::LcMlr || !model.grid) {
        throw std::invalid_argument("lcmlr_predict requires an LcMlr model with a residual grid");
    }
    double watts = mlr_predict(model.coeffs, util) + residual_correction(*model.grid, util);
    return std::max(0.0, watts);
}

double linear_cpu_mem_predict(const PowerModel& model, const UtilizationVector& util) {
    if (model.kind != PowerModelKind::LinearCpuMem) {
        throw std::invalid_argument("linear_cpu_mem_predict requires a LinearCpuMem model");
    }
    double watts = model.coeffs.intercept_w + model.coeffs.beta_cpu * util.cpu_pct +
                   model.coeffs.beta_mem * util.mem_mb;
    return std::max(0.0, watts);
}

double predict_power(const PowerModel& model, const UtilizationVector& util,
                     RangePolicy policy, ClampCounter* clamps) {
    if (model.kind == PowerModelKind::LinearCpuMem) {
        return linear_cpu_mem_predict(model, util);
    }
    if (policy == RangePolicy::ClampToGrid && model.grid && !model.grid->contains(util)) {
        if (clamps) ++clamps->events;
        return lcmlr_predict(model, model.grid->clamp(util));
    }
    return lcmlr_predict(model, util);
}

MlrCoefficients fit_mlr(std::span<const CalibrationSample> samples) {
    if (samples.size() < 5) {
        throw CalibrationError("fit_mlr needs at least 5 samples, got " +
                               std::to_string(samples.size()));
    }
    const std::size_t n = samples.size();
    std::vector<std::vector<double>> cols(5, std::vector<double>(n));
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = samples[i];
        cols[0][i] = 1.0;
        cols[1][i] = s.util.cpu_pct;
        cols[2][i] = s.util.mem_mb;
        cols[3][i] = s.util.disk_bps;
        cols[4][i] = s.util.net_bps;
        rhs[i] = s.power_w;
    }
    auto x = solve_least_squares(std::move(cols), std::move(rhs),
                                 {"intercept", "cpu_pct", "mem_mb", "disk_bps", "net_bps"});
    return MlrCoefficients{x[0], x[1], x[2], x[3], x[4]};
}

MlrCoefficients fit_linear_cpu_mem(std::span<const CalibrationSample> samples) {
    if (samples.size() < 5) {
        throw CalibrationError("fit_linear_cpu_mem needs at least 5 samples, got " +
                               std::to_string(samples.size()));
    }
    const std::size_t n = samples.size();
    std::vector<std::vector<double>> cols(3, std::vector<double>(n));
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        cols[0][i] = 1.0;
        cols[1][i] = samples[i].util.cpu_pct;
        cols[2][i] = samples[i].util.mem_mb;
        rhs[i] = samples[i].power_w;
    }
    auto x = solve_least_squares(std::move(cols), std::move(rhs),
                                 {"intercept", "cpu_pct", "mem_mb"});
    return MlrCoefficients{x[0], x[1], x[2], 0.0, 0.0};
}

ResidualGrid build_residual_grid(const MlrCoefficients& coeffs,
                                 std::span<const CalibrationSample> grid_samples) {
    ResidualGrid grid;
    for (const auto& s : grid_samples) {
        auto q = components(s.util);
        for (int a = 0; a < 4; ++a) grid.axes[a].push_back(q[a]);
    }
    for (int a = 0; a < 4; ++a) {
        auto& nodes = grid.axes[a];
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        if (nodes.size() < 2) {
            throw CalibrationError(std::string("calibration lattice axis ") + kAxisNames[a] +
                                   " has fewer than 2 distinct values");
        }
    }

    const std::size_t total =
        grid.axes[0].size() * grid.axes[1].size() * grid.axes[2].size() * grid.axes[3].size();
    grid.residuals.assign(total, std::numeric_limits<double>::quiet_NaN());

    for (const auto& s : grid_samples) {
        auto q = components(s.util);
        std::array<std::size_t, 4> idx{};
        for (int a = 0; a < 4; ++a) {
            auto it = std::lower_bound(grid.axes[a].begin(), grid.axes[a].end(), q[a]);
            idx[a] = static_cast<std::size_t>(it - grid.axes[a].begin());
        }
        double& slot = grid.residuals[grid.index(idx[0], idx[1], idx[2], idx[3])];
        double residual = s.power_w - mlr_predict(coeffs, s.util);
        if (!std::isnan(slot)) {
            std::ostringstream msg;
            msg << "duplicate calibration sample at node (" << q[0] << ", " << q[1] << ", "
                << q[2] << ", " << q[3] << ")";
            throw CalibrationError(msg.str());
        }
        slot = residual;
    }

    std::vector<std::string> missing;
    for (std::size_t ci = 0; ci < grid.axes[0].size(); ++ci)
        for (std::size_t mi = 0; mi < grid.axes[1].size(); ++mi)
            for (std::size_t di = 0; di < grid.axes[2].size(); ++di)
                for (std::size_t ni = 0; ni < grid.axes[3].size(); ++ni) {
                    if (std::isnan(grid.at(ci, mi, di, ni)) && missing.size() < 8) {
                        std::ostringstream node;
                        node << "(" << grid.axes[0][ci] << ", " << grid.axes[1][mi] << ", "
                             << grid.axes[2][di] << ", " << grid.axes[3][ni] << ")";
                        missing.push_back(node.str());
                    }
                }
    if (!missing.empty()) {
        std::string msg = "incomplete calibration lattice; missing node tuple(s):";
        for (const auto& m : missing) msg += " " + m;
        throw CalibrationError(msg);
    }

    grid.validate();
    return grid;
}

PowerModel make_lcmlr_model(std::span<const CalibrationSample> samples) {
    return make_lcmlr_model(fit_mlr(samples), samples);
}

PowerModel make_lcmlr_model(const MlrCoefficients& coeffs,
                            std::span<const CalibrationSample> samples) {
    PowerModel model;
    model.kind = PowerModelKind::LcMlr;
    model.coeffs = coeffs;
    model.grid = build_residual_grid(coeffs, samples);
    return model;
}

PowerModel make_linear_cpu_mem_model(const MlrCoefficients& coeffs) {
    PowerModel model;
    model.kind = PowerModelKind::LinearCpuMem;
    model.coeffs = coeffs;
    model.coeffs.beta_disk = 0.0;
    model.coeffs.beta_net = 0.0;
    return model;
}

namespace {

double parse_double_field(const std::string& field, int line_no, const char* what) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "calibration CSV line " << line_no << ": bad " << what << " value '" << field
            << "'";
        throw CalibrationError(msg.str());
    }
    return value;
}

} // namespace

std::vector<CalibrationSample> parse_calibration_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<CalibrationSample> samples;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != "cpu_pct,mem_mb,disk_bps,net_bps,power_w") {
                throw CalibrationError("calibration CSV line 1: unexpected header '" + line +
                                      "'");
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 5) {
            std::ostringstream msg;
            msg << "calibration CSV line " << line_no << ": expected 5 fields, got "
                << fields.size();
            throw CalibrationError(msg.str());
        }
        CalibrationSample s;
        s.util.cpu_pct = parse_double_field(fields[0], line_no, "cpu_pct");
        s.util.mem_mb = parse_double_field(fields[1], line_no, "mem_mb");
        s.util.disk_bps = parse_double_field(fields[2], line_no, "disk_bps");
        s.util.net_bps = parse_double_field(fields[3], line_no, "net_bps");
        s.power_w = parse_double_field(fields[4], line_no, "power_w");
        if (!s.util.is_valid() || s.power_w < 0.0) {
            std::ostringstream msg;
            msg << "calibration CSV line " << line_no << ": values out of range";
            throw CalibrationError(msg.str());
        }
        samples.push_back(s);
    }
    if (!header_seen) throw CalibrationError("calibration CSV is empty");
    if (samples.empty()) throw CalibrationError("calibration CSV has no data rows");
    return samples;
}

std::vector<CalibrationSample> load_calibration_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationError("cannot open calibration CSV: " + path);
    try {
        return parse_calibration_csv(in);
    } catch (const CalibrationError& e) {
        throw CalibrationError(path + ": " + e.what());
    }
}

} // namespace easched
