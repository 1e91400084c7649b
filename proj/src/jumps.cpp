#include "warmstart/jumps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "warmstart/errors.hpp"
#include "warmstart/util.hpp"

namespace warmstart {

std::vector<std::size_t> JumpScan::jumps() const {
    std::vector<std::size_t> out;
    int last = -1;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i].report.jump && rows[i].instance != last) {
            out.push_back(i);
            last = rows[i].instance;
        }
    return out;
}

JumpScan scan_minima_jumps(const Ansatz &a, const PauliSum &h, std::uint64_t master,
                           const JumpScanSettings &settings) {
    WS_REQUIRE(settings.instances >= 1, "need at least one instance");
    std::vector<Params> ts;
    for (int s = 0; s < settings.instances; ++s)
        ts.push_back(sample_hypercube({Params(a.num_params(), 0.0), std::numbers::pi},
                                      derive_seed(master, s), 1)
                         .front());
    return scan_minima_jumps(a, h, ts, master, settings);
}

JumpScan scan_minima_jumps(const Ansatz &a, const PauliSum &h, const std::vector<Params> &theta_star,
                           std::uint64_t master, const JumpScanSettings &settings) {
    WS_REQUIRE(settings.dt_points >= 1, "need at least one time step");
    WS_REQUIRE(settings.dt_max > 0.0, "dt_max must be > 0");
    JumpScan scan;
    scan.theta_star = theta_star;
    const StateVector psi0(a.n());
    for (std::size_t s = 0; s < theta_star.size(); ++s) {
        const auto track = adiabatic_track(a, h, theta_star[s], psi0, settings.dt_max, settings.dt_points);
        LossContext ctx(a, theta_star[s], h, 0.0, psi0);
        for (std::size_t j = 1; j < track.samples.size(); ++j) {
            const auto &x = track.samples[j];
            if (x.failed) break;
            ctx.set_dt(x.dt);
            scan.rows.push_back({static_cast<int>(s), x.dt,
                                 detect_minima_jump(ctx, x.theta, settings.restarts,
                                                    derive_seed(master, 1000 * (s + 1) + j),
                                                    settings.jump)});
        }
    }
    return scan;
}

Params nearest_image(const Params &from, const Params &to, double period) {
    WS_REQUIRE(from.size() == to.size(), "parameter vectors differ in length");
    Params out(from.size());
    for (std::size_t i = 0; i < from.size(); ++i)
        out[i] = from[i] + (period > 0.0 ? std::remainder(to[i] - from[i], period) : to[i] - from[i]);
    return out;
}

JumpPath jump_trajectory(const LossContext &ctx, const JumpReport &report, std::size_t segment_points,
                         double reach_tol, const OptimizerOptions &opt) {
    WS_REQUIRE(report.jump && report.best >= 0, "report has no jump");
    WS_REQUIRE(segment_points >= 2, "segment needs at least two points");
    const Params &target = report.minima[report.best].theta;
    const double period = std::numbers::pi;
    JumpPath path;
    auto res = minimize(ctx, ctx.theta_star(), opt);
    if (res.converged && distance_inf(res.theta, target, period) < reach_tol) {
        path.points = std::move(res.trajectory);
        path.optimizer_path = true;
        return path;
    }
    const Params b = nearest_image(report.theta_adiabatic, target, period);
    for (std::size_t k = 0; k < segment_points; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(segment_points - 1);
        Params p = report.theta_adiabatic;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] += s * (b[i] - p[i]);
        path.points.push_back(std::move(p));
    }
    return path;
}

double median_random_gradient(const LossContext &ctx, std::size_t samples, std::uint64_t seed) {
    WS_REQUIRE(samples >= 1, "need at least one sample");
    const auto pts = sample_hypercube({Params(ctx.num_params(), 0.0), std::numbers::pi}, seed, samples);
    std::vector<double> g(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { g[i] = norm_2(gradient(ctx, pts[i])); });
    return median(g);
}

PathGradientSummary summarize_path(const LossContext &ctx, const std::vector<PathRow> &rows,
                                   std::size_t baseline_samples, std::uint64_t seed) {
    WS_REQUIRE(!rows.empty(), "empty path");
    PathGradientSummary s;
    std::vector<double> g;
    for (const auto &r : rows) g.push_back(r.grad_norm);
    s.path_median = median(g);
    s.path_max = *std::max_element(g.begin(), g.end());
    s.random_median = median_random_gradient(ctx, baseline_samples, seed);
    s.ratio = s.random_median > 0.0 ? s.path_median / s.random_median : 0.0;
    return s;
}

} // namespace warmstart
