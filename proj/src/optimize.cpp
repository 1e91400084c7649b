#include "warmstart/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "warmstart/csv.hpp"
#include "warmstart/errors.hpp"
#include "warmstart/landscape.hpp"
#include "warmstart/util.hpp"

namespace warmstart {

namespace {

constexpr double kMaxStep = 1.0; // infinity-norm cap on a single trial step

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Params axpy(const Params &x, double alpha, const std::vector<double> &p) {
    Params out(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * p[i];
    return out;
}

double wrap(double d, double period) {
    if (period <= 0.0) return d;
    return std::remainder(d, period);
}

Params finite_velocity(const AdiabaticTrack &track, std::size_t j, std::size_t usable) {
    const auto &s = track.samples;
    std::size_t lo = j > 0 ? j - 1 : j;
    std::size_t hi = j + 1 < usable ? j + 1 : j;
    if (lo == hi) return Params(s[j].theta.size(), 0.0);
    Params v = subtract(s[hi].theta, s[lo].theta);
    const double dt = s[hi].dt - s[lo].dt;
    for (double &x : v) x /= dt;
    return v;
}

std::size_t usable_samples(const AdiabaticTrack &track) {
    std::size_t n = 0;
    while (n < track.samples.size() && !track.samples[n].failed) ++n;
    return n;
}

} // namespace

Objective objective_of(const LossContext &ctx) {
    Objective f;
    f.value = [&ctx](const Params &t) { return ctx.loss(t); };
    f.grad = [&ctx](const Params &t) { return gradient(ctx, t); };
    f.period = std::numbers::pi;
    return f;
}

MinimizeResult minimize(const Objective &f, const Params &theta0, const OptimizerOptions &opts) {
    WS_REQUIRE(opts.grad_tol > 0.0, "grad_tol must be > 0");
    WS_REQUIRE(opts.max_iters >= 0, "max_iters must be >= 0");
    WS_REQUIRE(opts.armijo_c1 > 0.0 && opts.armijo_c1 < 1.0, "armijo_c1 must lie in (0, 1)");
    WS_REQUIRE(opts.backtrack > 0.0 && opts.backtrack < 1.0, "backtrack must lie in (0, 1)");
    const bool qn = opts.method == OptimizerOptions::Method::quasi_newton;
    const std::size_t m = theta0.size();

    MinimizeResult res;
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(m, m);
    bool scaled = false;
    int stalls = 0;
    auto ninf = [](const std::vector<double> &v) { return norm_inf(v); };
    Params x = theta0;
    std::vector<double> g;
    // BFGS update of the inverse Hessian from the move x -> xn.
    auto update = [&](const Params &xn, const std::vector<double> &gn) {
        Eigen::VectorXd s(m), y(m);
        for (std::size_t i = 0; i < m; ++i) {
            s(i) = xn[i] - x[i];
            y(i) = gn[i] - g[i];
        }
        const double sy = s.dot(y);
        if (!(sy > 1e-12 * s.norm() * y.norm() && sy > 0.0)) return;
        if (!scaled) {
            hinv *= sy / y.squaredNorm();
            scaled = true;
        }
        const double rho = 1.0 / sy;
        const Eigen::VectorXd hy = hinv * y;
        // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
        hinv += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                rho * (hy * s.transpose() + s * hy.transpose());
    };
    double fx = f.value(x);
    g = f.grad(x);
    WS_REQUIRE(g.size() == m, "gradient length does not match parameters");
    res.trajectory.push_back(x);
    res.losses.push_back(fx);

    while (true) {
        if (!std::isfinite(fx)) throw NumericError("objective returned a non-finite value");
        if (ninf(g) < opts.grad_tol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opts.max_iters) break;

        std::vector<double> p(m);
        if (qn) {
            Eigen::Map<const Eigen::VectorXd> gv(g.data(), m);
            Eigen::VectorXd pv = -(hinv * gv);
            if (!(pv.dot(gv) < 0.0)) {
                hinv.setIdentity();
                scaled = false;
                pv = -gv;
            }
            for (std::size_t i = 0; i < m; ++i) p[i] = pv(i);
        } else {
            for (std::size_t i = 0; i < m; ++i) p[i] = -g[i];
        }
        const double slope = dot(g, p);
        double alpha = qn ? 1.0 : opts.gd_step;
        if (alpha * ninf(p) > kMaxStep) alpha = kMaxStep / ninf(p);

        // Resolution of the objective value; decreases below it are noise.
        const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(fx), 1e-300);
        bool accepted = false;
        Params xn;
        double fn = 0.0;
        std::vector<double> gn;
        if (-opts.armijo_c1 * alpha * slope <= floor) {
            // Sufficient decrease cannot be resolved; accept the full step when
            // it keeps the value within rounding and shrinks the gradient.
            Params xt = axpy(x, alpha, p);
            const double ft = f.value(xt);
            if (std::isfinite(ft)) {
                gn = f.grad(xt);
                if (ft <= fx + floor && ninf(gn) < ninf(g)) {
                    accepted = true;
                    xn = std::move(xt);
                    fn = ft;
                }
            }
        } else {
            // Backtracking with safeguarded quadratic interpolation; the first
            // trial also tries the interpolated minimizer, which makes the
            // line search exact on quadratics.
            for (int k = 0; k <= opts.max_backtracks; ++k) {
                Params xt = axpy(x, alpha, p);
                const double ft = f.value(xt);
                const double curv = ft - fx - alpha * slope;
                const double aq = curv > 0.0 ? -slope * alpha * alpha / (2.0 * curv) : -1.0;
                if (std::isfinite(ft) && ft <= fx + opts.armijo_c1 * alpha * slope) {
                    accepted = true;
                    xn = std::move(xt);
                    fn = ft;
                    if (k == 0 && aq > 0.0 && std::abs(aq - alpha) > 1e-3 * alpha && aq < 10.0 * alpha) {
                        Params xq = axpy(x, aq, p);
                        const double fq = f.value(xq);
                        if (std::isfinite(fq) && fq < fn && fq <= fx + opts.armijo_c1 * aq * slope) {
                            xn = std::move(xq);
                            fn = fq;
                        }
                    }
                    break;
                }
                if (-opts.armijo_c1 * alpha * slope <= floor) break;
                const double lo = 0.1 * alpha, hi = opts.backtrack * alpha;
                alpha = (aq > 0.0 && std::isfinite(ft)) ? std::clamp(aq, lo, hi) : hi;
            }
            if (accepted) gn = f.grad(xn);
        }
        if (!accepted) {
            // A rejected trial still measured curvature along p; learn from it
            // and retry a few times before giving up.
            if (qn && !gn.empty() && stalls < 5) {
                ++stalls;
                update(axpy(x, alpha, p), gn);
                continue;
            }
            // Last resort for small problems: a Hessian differenced from gradients.
            if (qn && stalls < 6 && m <= 64) {
                ++stalls;
                const double h = 1e-4;
                Eigen::MatrixXd hm(m, m);
                for (std::size_t j = 0; j < m; ++j) {
                    Params xp = x, xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    const auto gp = f.grad(xp), gm = f.grad(xm);
                    for (std::size_t i = 0; i < m; ++i) hm(i, j) = (gp[i] - gm[i]) / (2.0 * h);
                }
                hm = 0.5 * (hm + hm.transpose()).eval();
                // Absolute eigenvalues keep the step a descent direction near
                // saddles, where a flat mode has just turned negative.
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
                const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
                const double top = ev.maxCoeff();
                if (std::isfinite(top) && top > 0.0) {
                    const Eigen::VectorXd inv = ev.cwiseMax(1e-8 * top).cwiseInverse();
                    hinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
                    scaled = true;
                    continue;
                }
            }
            res.line_search_failed = true;
            break;
        }
        stalls = 0;
        if (qn) update(xn, gn);
        x = std::move(xn);
        fx = fn;
        g = std::move(gn);
        ++res.iterations;
        res.trajectory.push_back(x);
        res.losses.push_back(fx);
    }
    res.theta = x;
    res.loss = fx;
    res.grad_norm = ninf(g);
    return res;
}

MinimizeResult minimize(const LossContext &ctx, const Params &theta0, const OptimizerOptions &opts) {
    WS_REQUIRE(static_cast<int>(theta0.size()) == ctx.num_params(),
               "start point length does not match the ansatz");
    return minimize(objective_of(ctx), theta0, opts);
}

double distance_inf(const Params &a, const Params &b, double period) {
    WS_REQUIRE(a.size() == b.size(), "parameter vectors differ in length");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(wrap(a[i] - b[i], period)));
    return m;
}

double distance_2(const Params &a, const Params &b, double period) {
    WS_REQUIRE(a.size() == b.size(), "parameter vectors differ in length");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = wrap(a[i] - b[i], period);
        s += d * d;
    }
    return std::sqrt(s);
}

AdiabaticTrack adiabatic_track(const Ansatz &a, const PauliSum &h, const Params &theta_star,
                               const StateVector &psi0, double dt_max, int n_steps,
                               const TrackOptions &opts, LossKind kind) {
    WS_REQUIRE(std::isfinite(dt_max) && dt_max >= 0.0, "dt_max must be finite and >= 0");
    WS_REQUIRE(n_steps >= 1, "need at least one continuation step");
    WS_REQUIRE(opts.jump_guard > 0.0, "jump_guard must be > 0");
    LossContext ctx(a, theta_star, h, 0.0, psi0, kind);
    AdiabaticTrack track;
    TrackSample s0;
    s0.theta = theta_star;
    s0.loss = ctx.loss(theta_star);
    s0.grad_norm = norm_inf(gradient(ctx, theta_star));
    WS_REQUIRE(s0.grad_norm < opts.opt.grad_tol, "theta* is not a minimum at dt = 0");
    track.samples.push_back(s0);
    if (dt_max > 0.0) {
        for (int j = 1; j <= n_steps; ++j) {
            const double dt = dt_max * j / n_steps;
            ctx.set_dt(dt);
            const TrackSample &prev = track.samples.back();
            const MinimizeResult r = minimize(ctx, prev.theta, opts.opt);
            TrackSample s;
            s.dt = dt;
            s.theta = r.theta;
            s.loss = r.loss;
            s.grad_norm = r.grad_norm;
            s.continuity_ok = distance_inf(r.theta, prev.theta) < opts.jump_guard;
            s.dist_inf = distance_inf(r.theta, theta_star);
            s.dist_2 = distance_2(r.theta, theta_star);
            s.failed = !r.converged;
            track.samples.push_back(s);
            if (s.failed) {
                track.halted = true;
                break;
            }
        }
    }
    const std::size_t usable = usable_samples(track);
    for (std::size_t j = 0; j < usable; ++j) track.samples[j].beta_a = beta_A(ctx, track, j);
    return track;
}

std::optional<double> beta_A(const LossContext &ctx, const AdiabaticTrack &track, std::size_t index) {
    const std::size_t usable = usable_samples(track);
    WS_REQUIRE(index < usable, "track index out of range");
    const Params v = finite_velocity(track, index, usable);
    const double vn = norm_2(v);
    if (vn < 1e-10) return std::nullopt;
    LossContext local = ctx;
    local.set_dt(track.samples[index].dt);
    const Eigen::MatrixXd hm = hessian(local, track.samples[index].theta);
    Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
    return vv.dot(hm * vv) / (vn * vn);
}

std::vector<double> cumulative_shift_bound(const AdiabaticTrack &track, int m, double lambda) {
    WS_REQUIRE(m >= 1 && lambda > 0.0, "shift bound needs M >= 1 and lambda > 0");
    const std::size_t usable = usable_samples(track);
    std::vector<double> integrand(usable), out(usable, 0.0);
    const double num = 2.0 * std::sqrt(static_cast<double>(m)) * lambda;
    for (std::size_t j = 0; j < usable; ++j) {
        const auto &b = track.samples[j].beta_a;
        integrand[j] = (b && *b > 0.0) ? num / *b : norm_2(finite_velocity(track, j, usable));
    }
    for (std::size_t j = 1; j < usable; ++j) {
        const double h = track.samples[j].dt - track.samples[j - 1].dt;
        out[j] = out[j - 1] + 0.5 * h * (integrand[j] + integrand[j - 1]);
    }
    return out;
}

void write_csv(std::ostream &os, const AdiabaticTrack &track) {
    const std::size_t m = track.samples.empty() ? 0 : track.samples.front().theta.size();
    std::vector<std::string> cols = {"dt",     "loss",   "grad_norm",     "dist_inf",
                                     "dist_2", "beta_a", "continuity_ok", "failed"};
    for (std::size_t i = 0; i < m; ++i) cols.push_back("theta_" + std::to_string(i + 1));
    CsvTable t(cols);
    for (const auto &s : track.samples) {
        std::vector<std::string> row = {format_number(s.dt),       format_number(s.loss),
                                        format_number(s.grad_norm), format_number(s.dist_inf),
                                        format_number(s.dist_2),
                                        s.beta_a ? format_number(*s.beta_a) : std::string(),
                                        s.continuity_ok ? "1" : "0", s.failed ? "1" : "0"};
        for (double x : s.theta) row.push_back(format_number(x));
        t.add_row(std::move(row));
    }
    t.write(os);
}

JumpReport detect_minima_jump(const Objective &f, const Params &theta_start, int n_restarts,
                              std::uint64_t seed, const JumpOptions &opts) {
    WS_REQUIRE(n_restarts >= 1, "need at least one restart");
    WS_REQUIRE(opts.start_high > opts.start_low, "empty restart box");
    const MinimizeResult adi = minimize(f, theta_start, opts.opt);
    JumpReport rep;
    rep.theta_adiabatic = adi.theta;
    rep.loss_adiabatic = adi.loss;

    std::mt19937_64 rng(seed);
    std::vector<Params> starts(n_restarts, Params(theta_start.size()));
    for (auto &s : starts)
        for (double &x : s)
            x = opts.start_low +
                (opts.start_high - opts.start_low) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    rep.minima.resize(n_restarts);
    parallel_for(starts.size(), [&](std::size_t i) {
        const MinimizeResult r = minimize(f, starts[i], opts.opt);
        rep.minima[i] = {r.theta, r.loss, distance_inf(r.theta, adi.theta, f.period), r.converged};
    });
    for (std::size_t i = 0; i < rep.minima.size(); ++i) {
        const FoundMinimum &fm = rep.minima[i];
        if (fm.distance > opts.jump_threshold && fm.loss < rep.loss_adiabatic - opts.loss_margin &&
            (rep.best < 0 || fm.loss < rep.minima[rep.best].loss))
            rep.best = static_cast<int>(i);
    }
    rep.jump = rep.best >= 0;
    if (rep.jump) rep.jump_distance = rep.minima[rep.best].distance;
    return rep;
}

JumpReport detect_minima_jump(const LossContext &ctx, const Params &theta_start, int n_restarts,
                              std::uint64_t seed, const JumpOptions &opts) {
    return detect_minima_jump(objective_of(ctx), theta_start, n_restarts, seed, opts);
}

Objective double_well(double dt) {
    const double tilt = 0.2 - 2.0 * dt;
    Objective f;
    f.value = [tilt](const Params &p) {
        const double x = p[0], y = p[1];
        const double w = x * x - 1.0, c = y - 0.3 * x;
        return w * w + tilt * x + c * c;
    };
    f.grad = [tilt](const Params &p) {
        const double x = p[0], y = p[1];
        const double w = x * x - 1.0, c = y - 0.3 * x;
        return std::vector<double>{4.0 * x * w + tilt - 0.6 * c, 2.0 * c};
    };
    return f;
}

CompressionLog compress_run(const Ansatz &a, const PauliSum &h, const StateVector &psi0,
                            const CompressionSchedule &schedule, const CompressionOptions &opts) {
    WS_REQUIRE(opts.kind == LossKind::real_time || opts.kind == LossKind::imaginary_time,
               "compression runs on real or imaginary time losses");
    WS_REQUIRE(opts.jitter >= 0.0, "jitter must be >= 0");
    const bool imag = opts.kind == LossKind::imaginary_time;
    CompressionLog log;
    Params theta(a.num_params(), 0.0);
    CVec exact = psi0.amplitudes();
    a.apply(theta, exact);
    std::mt19937_64 rng(opts.seed);
    double t = 0.0;

    // Runs one iteration; returns false when the step was rejected.
    auto step = [&](double dt, bool check) {
        LossContext ctx(a, theta, h, dt, psi0, opts.kind);
        Params start = theta;
        for (double &x : start)
            x += opts.jitter * (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0);
        const MinimizeResult r = minimize(ctx, start, opts.opt);
        if (check && r.loss > schedule.loss_threshold) return false;
        theta = r.theta;
        t += dt;
        exact = imag ? evolve_imaginary(exact, h, dt) : evolve_real(exact, h, dt);
        CVec now = psi0.amplitudes();
        a.apply(theta, now);
        CompressionStep s;
        s.k = static_cast<int>(log.steps.size()) + 1;
        s.dt = dt;
        s.t = t;
        s.theta = theta;
        s.final_loss = r.loss;
        s.cumulative_fidelity = fidelity(exact, now);
        s.iters_used = r.iterations;
        log.steps.push_back(std::move(s));
        return true;
    };

    if (!schedule.fixed.empty()) {
        for (double dt : schedule.fixed) {
            WS_REQUIRE(std::isfinite(dt) && dt >= 0.0, "time steps must be finite and >= 0");
            step(dt, false);
        }
        return log;
    }
    WS_REQUIRE(schedule.t_total > 0.0, "adaptive schedule needs t_total > 0");
    WS_REQUIRE(schedule.dt_min > 0.0 && schedule.dt_init >= schedule.dt_min &&
                   schedule.dt_max >= schedule.dt_init,
               "adaptive schedule needs 0 < dt_min <= dt_init <= dt_max");
    double dt = schedule.dt_init;
    while (t < schedule.t_total - 1e-12) {
        const double use = std::min(dt, schedule.t_total - t);
        if (step(use, true)) {
            dt = std::min(2.0 * use, schedule.dt_max);
            continue;
        }
        dt = use / 2.0;
        if (dt < schedule.dt_min) {
            log.completed = false;
            break;
        }
    }
    return log;
}

void write_csv(std::ostream &os, const CompressionLog &log) {
    const std::size_t m = log.steps.empty() ? 0 : log.steps.front().theta.size();
    std::vector<std::string> cols = {"k", "dt", "t", "final_loss", "cumulative_fidelity", "iters_used"};
    for (std::size_t i = 0; i < m; ++i) cols.push_back("theta_" + std::to_string(i + 1));
    CsvTable t(cols);
    for (const auto &s : log.steps) {
        std::vector<double> row = {static_cast<double>(s.k), s.dt, s.t, s.final_loss,
                                   s.cumulative_fidelity, static_cast<double>(s.iters_used)};
        row.insert(row.end(), s.theta.begin(), s.theta.end());
        t.add_numbers(row);
    }
    t.write(os);
}

} // namespace warmstart
