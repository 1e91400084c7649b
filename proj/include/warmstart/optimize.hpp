#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "warmstart/loss.hpp"

namespace warmstart {

struct OptimizerOptions {
    enum class Method { gradient_descent, quasi_newton };
    Method method = Method::quasi_newton;
    double grad_tol = 1e-8; // infinity norm
    int max_iters = 1000;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
    double gd_step = 0.5; // initial trial step for gradient descent
};

// Anything minimize can work on: value and gradient of a smooth function.
struct Objective {
    std::function<double(const Params &)> value;
    std::function<std::vector<double>(const Params &)> grad;
    double period = 0.0; // per-coordinate period for distances; 0 = none
};

// Losses built from Pauli rotations repeat with period pi in every parameter.
Objective objective_of(const LossContext &ctx);

struct MinimizeResult {
    Params theta;
    double loss = 0.0;
    double grad_norm = 0.0; // infinity norm at theta
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<Params> trajectory; // start plus every accepted point
    std::vector<double> losses;
};

MinimizeResult minimize(const Objective &f, const Params &theta0, const OptimizerOptions &opts = {});
MinimizeResult minimize(const LossContext &ctx, const Params &theta0,
                        const OptimizerOptions &opts = {});

// Infinity-norm distance; with period > 0 each coordinate difference is wrapped
// into [-period/2, period/2].
double distance_inf(const Params &a, const Params &b, double period = 0.0);
double distance_2(const Params &a, const Params &b, double period = 0.0);

struct TrackSample {
    double dt = 0.0;
    Params theta;
    double grad_norm = 0.0;
    double loss = 0.0;
    std::optional<double> beta_a;
    bool continuity_ok = true;
    bool failed = false;
    double dist_inf = 0.0; // from theta*
    double dist_2 = 0.0;
};

struct AdiabaticTrack {
    std::vector<TrackSample> samples;
    bool halted = false;
};

struct TrackOptions {
    OptimizerOptions opt = {.max_iters = 20000};
    double jump_guard = 0.3;
};

// Continuation on dt = j dt_max / n_steps, j = 0..n_steps; beta_A filled in for
// every accepted sample.
AdiabaticTrack adiabatic_track(const Ansatz &a, const PauliSum &h, const Params &theta_star,
                               const StateVector &psi0, double dt_max, int n_steps,
                               const TrackOptions &opts = {},
                               LossKind kind = LossKind::real_time);

// Directional curvature along the finite-difference velocity of the track.
// Empty when the velocity is below 1e-10.
std::optional<double> beta_A(const LossContext &ctx, const AdiabaticTrack &track, std::size_t index);

// Integral of 2 sqrt(M) lambda / beta_A over the track by the trapezoid rule,
// per sample. Where beta_A is missing or not positive the measured speed
// replaces the bound on the integrand.
std::vector<double> cumulative_shift_bound(const AdiabaticTrack &track, int m, double lambda);

void write_csv(std::ostream &os, const AdiabaticTrack &track);

struct FoundMinimum {
    Params theta;
    double loss = 0.0;
    double distance = 0.0; // infinity norm from the adiabatic minimum, wrapped
    bool converged = false;
};

struct JumpReport {
    Params theta_adiabatic;
    double loss_adiabatic = 0.0;
    std::vector<FoundMinimum> minima; // restarts in order
    bool jump = false;
    int best = -1; // index into minima of the lowest-loss jump
    double jump_distance = 0.0;
};

struct JumpOptions {
    OptimizerOptions opt;
    double jump_threshold = 0.5;
    double loss_margin = 1e-6;
    double start_low = -3.141592653589793;
    double start_high = 3.141592653589793;
};

// The adiabatic minimum is the local minimum reached from theta_start.
JumpReport detect_minima_jump(const Objective &f, const Params &theta_start, int n_restarts,
                              std::uint64_t seed, const JumpOptions &opts = {});
JumpReport detect_minima_jump(const LossContext &ctx, const Params &theta_start, int n_restarts,
                              std::uint64_t seed, const JumpOptions &opts = {});

// Two-parameter double well with a tilt that grows with dt:
// f = (x^2 - 1)^2 + (0.2 - 2 dt) x + (y - 0.3 x)^2. The left well is lower for
// dt < 0.1 and the right well afterwards.
Objective double_well(double dt);

struct CompressionStep {
    int k = 0;
    double dt = 0.0;
    double t = 0.0;
    Params theta;
    double final_loss = 0.0;
    double cumulative_fidelity = 0.0;
    int iters_used = 0;
};

struct CompressionLog {
    std::vector<CompressionStep> steps;
    bool completed = true;
};

struct CompressionSchedule {
    std::vector<double> fixed;   // used when non-empty
    double t_total = 0.0;        // adaptive mode
    double dt_init = 0.05;
    double dt_min = 1e-4;
    double dt_max = 0.2;
    double loss_threshold = 1e-4;
};

struct CompressionOptions {
    OptimizerOptions opt;
    double jitter = 0.0; // half-width of a random start around theta*
    std::uint64_t seed = 0;
    LossKind kind = LossKind::real_time;
};

CompressionLog compress_run(const Ansatz &a, const PauliSum &h, const StateVector &psi0,
                            const CompressionSchedule &schedule,
                            const CompressionOptions &opts = {});

void write_csv(std::ostream &os, const CompressionLog &log);

} // namespace warmstart
