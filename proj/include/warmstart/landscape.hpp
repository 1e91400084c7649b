#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "warmstart/loss.hpp"

namespace warmstart {

struct HypercubeRegion {
    Params center;
    double r = 0.0;
};

// Coordinates independent uniform on [c_i - r, c_i + r]. The underlying unit
// draws depend only on (seed, dimension, k), so the same seed gives the same
// points rescaled for every r.
std::vector<Params> sample_hypercube(const HypercubeRegion &region, std::uint64_t seed,
                                     std::size_t k);

struct VarianceEstimate {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t n_samples = 0;
    double std_error_of_variance = 0.0;
    std::uint64_t seed = 0;
};

// Unbiased variance and the fourth-moment standard error of a sample.
VarianceEstimate summarize(const std::vector<double> &values, std::uint64_t seed = 0);

VarianceEstimate estimate_variance(const LossContext &ctx, const HypercubeRegion &region,
                                   std::size_t n_samples, std::uint64_t seed);

std::vector<double> log_grid(double lo, double hi, std::size_t k);
// 40 log-spaced radii in [1e-3, pi].
std::vector<double> default_r_grid();

struct SweepRow {
    double r = 0.0;
    double mean_loss = 0.0;   // averaged over random unit infinity-norm directions
    double variance = 0.0;
    double var_stderr = 0.0;
    double sample_mean = 0.0; // mean over the hypercube samples
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t peak_index = 0;
    double r_max = 0.0;          // grid argmax of the variance
    double var_max = 0.0;
    double r_max_refined = 0.0;  // vertex of a parabola in (log r, log var) through the peak
    double mean_loss_at_peak = 0.0;
};

SweepResult variance_sweep_r(const LossContext &ctx, const std::vector<double> &r_grid,
                             std::size_t n_samples, std::uint64_t seed,
                             std::size_t n_directions = 500);

struct DtRow {
    double dt = 0.0;
    double variance = 0.0;
    double var_stderr = 0.0;
    double mean_loss = 0.0;
};

struct DtSweepResult {
    std::vector<DtRow> rows;
    std::size_t peak_index = 0;
    double dt_peak = 0.0;
    double var_peak = 0.0;
    double dt_peak_refined = 0.0;
};

// Variance in V(theta*, r) for each time step, centered at ctx.theta_star().
DtSweepResult variance_vs_dt(const LossContext &ctx, const std::vector<double> &dt_grid,
                             double r, std::size_t n_samples, std::uint64_t seed);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r_squared = 0.0;
};

// Least squares on (log x, log y): y ~ prefactor x^exponent.
PowerLawFit fit_power_law(const std::vector<double> &xs, const std::vector<double> &ys);
// Least squares on (x, log y): y ~ prefactor exp(exponent x).
PowerLawFit fit_log_linear(const std::vector<double> &xs, const std::vector<double> &ys);

struct CutRow {
    double dt = 0.0;
    double s = 0.0;
    double theta_inf = 0.0; // s * ||theta_b - theta_a||_inf
    double loss = 0.0;
};

// Loss along theta_a + s (theta_b - theta_a), s in [-margin, 1 + margin], per dt.
std::vector<CutRow> cut_1d(const LossContext &ctx, const std::vector<double> &dts,
                           const Params &theta_a, const Params &theta_b, std::size_t grid_points,
                           double margin = 0.25);

struct PcaPlane {
    Params mean;
    Params axis1, axis2;
    double explained1 = 0.0, explained2 = 0.0;
    bool rank_deficient = false;
};

PcaPlane pca_plane(const std::vector<Params> &trajectory);

struct GridRow {
    double u = 0.0, v = 0.0, loss = 0.0;
};

// extents = {u_min, u_max, v_min, v_max}; rows in row-major order (v outer).
std::vector<GridRow> grid_2d(const LossContext &ctx, const Params &origin, const Params &axis1,
                             const Params &axis2, const std::array<double, 4> &extents,
                             std::size_t resolution);

struct PathRow {
    double arclength = 0.0;
    double loss = 0.0;
    double directional_gradient = 0.0;
    double grad_norm = 0.0;
};

std::vector<PathRow> gradient_along_path(const LossContext &ctx, const std::vector<Params> &path);

double norm_inf(const Params &a);
double norm_2(const Params &a);
Params subtract(const Params &a, const Params &b);

} // namespace warmstart
