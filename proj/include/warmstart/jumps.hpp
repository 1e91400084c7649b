#pragma once

#include <cstdint>
#include <vector>

#include "warmstart/landscape.hpp"
#include "warmstart/optimize.hpp"

namespace warmstart {

struct JumpScanSettings {
    int instances = 10;
    double dt_max = 0.2;
    int dt_points = 10; // dt = j dt_max / dt_points, j = 1..dt_points
    int restarts = 20;
    JumpOptions jump;
};

struct JumpScanRow {
    int instance = 0;
    double dt = 0.0;
    JumpReport report;
};

struct JumpScan {
    std::vector<Params> theta_star; // per instance
    std::vector<JumpScanRow> rows;   // instance-major, dt ascending
    // Index of the first jumping row of every instance that has one.
    std::vector<std::size_t> jumps() const;
};

// theta* of instance s is uniform in [-pi, pi]^M from derive_seed(master, s).
// Each instance is tracked adiabatically on the dt grid, and at every tracked
// sample the adiabatic minimum is compared against random restarts.
JumpScan scan_minima_jumps(const Ansatz &a, const PauliSum &h, std::uint64_t master,
                           const JumpScanSettings &settings);

// The same instances with explicitly given centres.
JumpScan scan_minima_jumps(const Ansatz &a, const PauliSum &h, const std::vector<Params> &theta_star,
                           std::uint64_t master, const JumpScanSettings &settings);

// The image of `to` under shifts by multiples of period closest to `from`.
Params nearest_image(const Params &from, const Params &to, double period);

struct JumpPath {
    std::vector<Params> points;
    bool optimizer_path = false;
};

// The optimizer's trajectory from ctx.theta_star() when it ends within
// reach_tol (infinity norm, wrapped) of the jumped minimum; otherwise the
// straight segment from the adiabatic minimum to the nearest image of the
// jumped minimum.
JumpPath jump_trajectory(const LossContext &ctx, const JumpReport &report,
                         std::size_t segment_points = 101, double reach_tol = 0.1,
                         const OptimizerOptions &opt = {});

// Median 2-norm gradient at uniform points of [-pi, pi]^M.
double median_random_gradient(const LossContext &ctx, std::size_t samples, std::uint64_t seed);

struct PathGradientSummary {
    double path_median = 0.0;
    double path_max = 0.0;
    double random_median = 0.0;
    double ratio = 0.0; // path_median / random_median
};

PathGradientSummary summarize_path(const LossContext &ctx, const std::vector<PathRow> &rows,
                                   std::size_t baseline_samples, std::uint64_t seed);

} // namespace warmstart
