#ifndef EASCHED_POWER_HPP
#define EASCHED_POWER_HPP

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "easched/core.hpp"

namespace easched {

/// Regression intercept (idle watts) plus one slope per predictor.
/// Named intercept_w rather than alpha: the cost function owns that name.
struct MlrCoefficients {
    double intercept_w = 0.0;
    double beta_cpu = 0.0;   // W per CPU %
    double beta_mem = 0.0;   // W per MB
    double beta_disk = 0.0;  // W per B/s
    double beta_net = 0.0;   // W per B/s
};

/// A measured operating point: utilization in, watts out.
struct CalibrationSample {
    UtilizationVector util;
    double power_w = 0.0;
};

/// Regression errors (measured minus regression-predicted watts) stored on a
/// full 4-D lattice of calibration points. Axis order everywhere: cpu, mem,
/// disk, net. Residuals are flattened row-major in that order.
struct ResidualGrid {
    std::array<std::vector<double>, 4> axes;
    std::vector<double> residuals;

    std::size_t index(std::size_t ci, std::size_t mi, std::size_t di, std::size_t ni) const {
        return ((ci * axes[1].size() + mi) * axes[2].size() + di) * axes[3].size() + ni;
    }
    double at(std::size_t ci, std::size_t mi, std::size_t di, std::size_t ni) const {
        return residuals[index(ci, mi, di, ni)];
    }

    /// True when util lies inside the lattice bounding box on every axis.
    bool contains(const UtilizationVector& util) const;

    /// util with each component clamped into the lattice bounding box.
    UtilizationVector clamp(const UtilizationVector& util) const;

    /// Enforces >= 2 strictly increasing nodes per axis and a residual value
    /// for every node tuple. Throws std::invalid_argument on violation.
    void validate() const;
};

enum class PowerModelKind { LcMlr, LinearCpuMem };

/// A server power predictor. LcMlr carries the residual lattice for local
/// correction; LinearCpuMem is the baseline that sees only CPU and memory
/// (disk/net slopes are zero by construction).
struct PowerModel {
    PowerModelKind kind = PowerModelKind::LcMlr;
    MlrCoefficients coeffs;
    std::optional<ResidualGrid> grid;
};

/// Query outside the residual lattice under strict range policy.
class PowerRangeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rank-deficient fit or an incomplete calibration lattice.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Plain regression prediction: intercept + slopes . utilization.
double mlr_predict(const MlrCoefficients& coeffs, const UtilizationVector& util);

/// Locally corrected residual at util: the stored residual at the base node
/// (componentwise greatest lattice node <= util) plus, per axis, the linear
/// residual increment along that axis with the other three indices held at
/// the base node. Deliberately NOT tensor-product multilinear interpolation;
/// the four axis corrections are independent and additive. A query exactly on
/// a node returns that node's stored residual, on every node including
/// lattice corners. Throws PowerRangeError outside the bounding box --
/// extrapolating residuals would be guesswork, callers must clamp explicitly.
double residual_correction(const ResidualGrid& grid, const UtilizationVector& util);

/// Regression prediction plus residual correction, clamped below at 0 W.
/// Requires kind LcMlr; propagates PowerRangeError.
double lcmlr_predict(const PowerModel& model, const UtilizationVector& util);

/// Baseline prediction from CPU and memory only. disk/net never contribute.
double linear_cpu_mem_predict(const PowerModel& model, const UtilizationVector& util);

/// Strict: out-of-lattice queries throw. ClampToGrid: queries are clamped to
/// the lattice bounding box first (simulation policy; each clamp is counted).
enum class RangePolicy { Strict, ClampToGrid };

struct ClampCounter {
    long long events = 0;
};

/// Dispatch on model kind with the given range policy.
double predict_power(const PowerModel& model, const UtilizationVector& util,
                     RangePolicy policy = RangePolicy::Strict,
                     ClampCounter* clamps = nullptr);

/// Ordinary least squares over all four predictors. Requires >= 5 samples
/// and a full-rank design matrix; a deficient fit throws CalibrationError
/// naming the collinear columns.
MlrCoefficients fit_mlr(std::span<const CalibrationSample> samples);

/// Least squares restricted to intercept, CPU and memory; disk/net slopes
/// are fixed at zero. Produces the baseline model from the same data.
MlrCoefficients fit_linear_cpu_mem(std::span<const CalibrationSample> samples);

/// Residual at each lattice node = sample power - regression prediction.
/// The samples must cover a complete axis-aligned lattice; missing node
/// tuples are listed in the CalibrationError.
ResidualGrid build_residual_grid(const MlrCoefficients& coeffs,
                                 std::span<const CalibrationSample> grid_samples);

/// Fit + residual lattice in one step.
PowerModel make_lcmlr_model(std::span<const CalibrationSample> samples);

/// LcMlr model with externally supplied coefficients; residuals are computed
/// against those coefficients.
PowerModel make_lcmlr_model(const MlrCoefficients& coeffs,
                            std::span<const CalibrationSample> samples);

PowerModel make_linear_cpu_mem_model(const MlrCoefficients& coeffs);

/// CSV with header cpu_pct,mem_mb,disk_bps,net_bps,power_w. Parse errors
/// carry the 1-based line number.
std::vector<CalibrationSample> parse_calibration_csv(std::istream& in);
std::vector<CalibrationSample> load_calibration_csv(const std::string& path);

} // namespace easched

#endif
