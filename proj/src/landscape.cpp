#include "warmstart/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "warmstart/errors.hpp"
#include "warmstart/util.hpp"

namespace warmstart {

namespace {

// Uniform [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementation.
double unit_draw(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> eval_all(const LossContext &ctx, const std::vector<Params> &pts) {
    std::vector<double> out(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { out[i] = ctx.loss(pts[i]); });
    return out;
}

// Vertex of the parabola through three points, clamped to [x0, x2].
double parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
    const double d1 = (y1 - y0) / (x1 - x0);
    const double d2 = (y2 - y1) / (x2 - x1);
    const double a = (d2 - d1) / (x2 - x0);
    if (!(a < 0.0)) return x1;
    const double v = 0.5 * (x0 + x1) - d1 / (2.0 * a);
    return std::clamp(v, x0, x2);
}

// Refine a grid argmax of ys over positive xs in (log x, log y).
double refine_peak(const std::vector<double> &xs, const std::vector<double> &ys, std::size_t i) {
    if (i == 0 || i + 1 >= xs.size()) return xs[i];
    for (std::size_t k = i - 1; k <= i + 1; ++k)
        if (!(xs[k] > 0.0 && ys[k] > 0.0)) return xs[i];
    const double v = parabola_vertex(std::log(xs[i - 1]), std::log(ys[i - 1]), std::log(xs[i]),
                                     std::log(ys[i]), std::log(xs[i + 1]), std::log(ys[i + 1]));
    return std::exp(v);
}

void check_params(const LossContext &ctx, const Params &p, const char *what) {
    WS_REQUIRE(static_cast<int>(p.size()) == ctx.num_params(),
               std::string(what) + " length does not match the ansatz");
}

} // namespace

double norm_inf(const Params &a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

double norm_2(const Params &a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

Params subtract(const Params &a, const Params &b) {
    WS_REQUIRE(a.size() == b.size(), "parameter vectors differ in length");
    Params d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

std::vector<Params> sample_hypercube(const HypercubeRegion &region, std::uint64_t seed,
                                     std::size_t k) {
    WS_REQUIRE(k >= 1, "need at least one sample");
    WS_REQUIRE(std::isfinite(region.r) && region.r >= 0.0, "hypercube half-width must be >= 0");
    std::mt19937_64 rng(seed);
    std::vector<Params> out(k, region.center);
    for (auto &p : out)
        for (double &x : p) x += region.r * (2.0 * unit_draw(rng) - 1.0);
    return out;
}

VarianceEstimate summarize(const std::vector<double> &values, std::uint64_t seed) {
    const std::size_t n = values.size();
    WS_REQUIRE(n >= 2, "variance needs at least two samples");
    VarianceEstimate e;
    e.n_samples = n;
    e.seed = seed;
    const double dn = static_cast<double>(n);
    e.mean = pairwise_sum(values) / dn;
    std::vector<double> d2(n), d4(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = values[i] - e.mean;
        d2[i] = d * d;
        d4[i] = d2[i] * d2[i];
    }
    const double m2 = pairwise_sum(d2) / dn;
    const double m4 = pairwise_sum(d4) / dn;
    e.variance = m2 * dn / (dn - 1.0);
    // Var(s^2) ~ (m4 - (n - 3)/(n - 1) s^4) / n
    const double s4 = e.variance * e.variance;
    const double v = (m4 - (dn - 3.0) / (dn - 1.0) * s4) / dn;
    e.std_error_of_variance = std::sqrt(std::max(0.0, v));
    return e;
}

VarianceEstimate estimate_variance(const LossContext &ctx, const HypercubeRegion &region,
                                   std::size_t n_samples, std::uint64_t seed) {
    WS_REQUIRE(n_samples >= 2, "variance needs at least two samples");
    check_params(ctx, region.center, "hypercube center");
    return summarize(eval_all(ctx, sample_hypercube(region, seed, n_samples)), seed);
}

std::vector<double> log_grid(double lo, double hi, std::size_t k) {
    WS_REQUIRE(lo > 0.0 && hi > lo && k >= 2, "log grid needs 0 < lo < hi and k >= 2");
    std::vector<double> g(k);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < k; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1));
    g.back() = hi;
    return g;
}

std::vector<double> default_r_grid() { return log_grid(1e-3, std::numbers::pi, 40); }

SweepResult variance_sweep_r(const LossContext &ctx, const std::vector<double> &r_grid,
                             std::size_t n_samples, std::uint64_t seed, std::size_t n_directions) {
    WS_REQUIRE(!r_grid.empty(), "empty r grid");
    WS_REQUIRE(n_directions >= 1, "need at least one direction");
    const Params &c = ctx.theta_star();
    const std::size_t m = c.size();
    // Directions with unit infinity norm, shared across every r.
    std::mt19937_64 drng(derive_seed(seed, 1));
    std::vector<Params> dirs(n_directions, Params(m));
    for (auto &d : dirs) {
        for (double &x : d) x = 2.0 * unit_draw(drng) - 1.0;
        const double ni = norm_inf(d);
        if (ni > 0.0)
            for (double &x : d) x /= ni;
    }
    const std::uint64_t sample_seed = derive_seed(seed, 0);

    SweepResult res;
    for (double r : r_grid) {
        SweepRow row;
        row.r = r;
        const VarianceEstimate e = estimate_variance(ctx, {c, r}, n_samples, sample_seed);
        row.variance = e.variance;
        row.var_stderr = e.std_error_of_variance;
        row.sample_mean = e.mean;
        std::vector<Params> pts(dirs);
        for (auto &p : pts)
            for (std::size_t i = 0; i < m; ++i) p[i] = c[i] + r * p[i];
        row.mean_loss = pairwise_sum(eval_all(ctx, pts)) / static_cast<double>(pts.size());
        res.rows.push_back(row);
    }
    std::vector<double> rs, vs;
    for (const auto &row : res.rows) {
        rs.push_back(row.r);
        vs.push_back(row.variance);
    }
    res.peak_index = static_cast<std::size_t>(std::max_element(vs.begin(), vs.end()) - vs.begin());
    res.r_max = rs[res.peak_index];
    res.var_max = vs[res.peak_index];
    res.r_max_refined = refine_peak(rs, vs, res.peak_index);
    res.mean_loss_at_peak = res.rows[res.peak_index].mean_loss;
    return res;
}

DtSweepResult variance_vs_dt(const LossContext &ctx, const std::vector<double> &dt_grid, double r,
                             std::size_t n_samples, std::uint64_t seed) {
    WS_REQUIRE(!dt_grid.empty(), "empty time-step grid");
    LossContext local = ctx;
    const std::uint64_t sample_seed = derive_seed(seed, 0); // same draws as variance_sweep_r
    DtSweepResult res;
    std::vector<double> ds, vs;
    for (double dt : dt_grid) {
        local.set_dt(dt);
        const VarianceEstimate e = estimate_variance(local, {local.theta_star(), r}, n_samples, sample_seed);
        res.rows.push_back({dt, e.variance, e.std_error_of_variance, e.mean});
        ds.push_back(dt);
        vs.push_back(e.variance);
    }
    res.peak_index = static_cast<std::size_t>(std::max_element(vs.begin(), vs.end()) - vs.begin());
    res.dt_peak = ds[res.peak_index];
    res.var_peak = vs[res.peak_index];
    res.dt_peak_refined = refine_peak(ds, vs, res.peak_index);
    return res;
}

namespace {

PowerLawFit least_squares(const std::vector<double> &lx, const std::vector<double> &ly) {
    const std::size_t n = lx.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    WS_REQUIRE(sxx > 0.0, "power-law fit needs distinct x values");
    PowerLawFit f;
    f.exponent = sxy / sxx;
    f.prefactor = std::exp(my - f.exponent * mx);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ly[i] - (my + f.exponent * (lx[i] - mx));
        sse += e * e;
    }
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return f;
}

} // namespace

PowerLawFit fit_power_law(const std::vector<double> &xs, const std::vector<double> &ys) {
    WS_REQUIRE(xs.size() == ys.size(), "power-law fit needs equal-length data");
    WS_REQUIRE(xs.size() >= 3, "power-law fit needs at least three points");
    std::vector<double> lx(xs.size()), ly(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        WS_REQUIRE(xs[i] > 0.0 && ys[i] > 0.0, "power-law fit needs positive data");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    return least_squares(lx, ly);
}

PowerLawFit fit_log_linear(const std::vector<double> &xs, const std::vector<double> &ys) {
    WS_REQUIRE(xs.size() == ys.size(), "log-linear fit needs equal-length data");
    WS_REQUIRE(xs.size() >= 3, "log-linear fit needs at least three points");
    std::vector<double> ly(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        WS_REQUIRE(std::isfinite(xs[i]) && ys[i] > 0.0, "log-linear fit needs positive data");
        ly[i] = std::log(ys[i]);
    }
    return least_squares(xs, ly);
}

std::vector<CutRow> cut_1d(const LossContext &ctx, const std::vector<double> &dts,
                           const Params &theta_a, const Params &theta_b, std::size_t grid_points,
                           double margin) {
    check_params(ctx, theta_a, "cut start");
    check_params(ctx, theta_b, "cut end");
    WS_REQUIRE(grid_points >= 2, "cut needs at least two grid points");
    WS_REQUIRE(margin >= 0.0, "cut margin must be >= 0");
    const Params dir = subtract(theta_b, theta_a);
    const double span = norm_inf(dir);
    WS_REQUIRE(span > 0.0, "degenerate cut direction");
    std::vector<double> ss(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k)
        ss[k] = -margin + (1.0 + 2.0 * margin) * static_cast<double>(k) /
                              static_cast<double>(grid_points - 1);
    std::vector<Params> pts(grid_points, theta_a);
    for (std::size_t k = 0; k < grid_points; ++k)
        for (std::size_t i = 0; i < dir.size(); ++i) pts[k][i] += ss[k] * dir[i];
    LossContext local = ctx;
    std::vector<CutRow> rows;
    for (double dt : dts) {
        local.set_dt(dt);
        const auto ls = eval_all(local, pts);
        for (std::size_t k = 0; k < grid_points; ++k) rows.push_back({dt, ss[k], ss[k] * span, ls[k]});
    }
    return rows;
}

PcaPlane pca_plane(const std::vector<Params> &trajectory) {
    WS_REQUIRE(trajectory.size() >= 3, "PCA needs at least three points");
    const std::size_t m = trajectory.front().size();
    WS_REQUIRE(m >= 2, "PCA plane needs at least two parameters");
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        WS_REQUIRE(trajectory[i].size() == m, "trajectory points differ in length");
        bool fresh = true;
        for (std::size_t j = 0; j < i && fresh; ++j) fresh = trajectory[i] != trajectory[j];
        distinct += fresh;
    }
    WS_REQUIRE(distinct >= 3, "PCA needs at least three distinct points");

    const Eigen::Index n = static_cast<Eigen::Index>(trajectory.size());
    Eigen::MatrixXd x(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) x(i, j) = trajectory[i][j];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd &ev = es.eigenvalues();
    const double total = std::max(0.0, ev.sum());

    auto fix_sign = [](Eigen::VectorXd v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (std::abs(v(i)) > 1e-12) {
                if (v(i) < 0) v = -v;
                break;
            }
        return v;
    };
    const Eigen::Index top = static_cast<Eigen::Index>(m) - 1;
    Eigen::VectorXd a1 = fix_sign(es.eigenvectors().col(top));
    Eigen::VectorXd a2 = fix_sign(es.eigenvectors().col(top - 1));

    PcaPlane p;
    p.mean.assign(mean.data(), mean.data() + m);
    const double l1 = std::max(0.0, ev(top));
    double l2 = std::max(0.0, ev(top - 1));
    p.rank_deficient = !(l2 > 1e-12 * std::max(l1, 1e-300));
    if (p.rank_deficient) {
        // Complete with the first basis vector not parallel to axis 1.
        for (std::size_t k = 0; k < m; ++k) {
            Eigen::VectorXd e = Eigen::VectorXd::Unit(m, k);
            e -= a1.dot(e) * a1;
            if (e.norm() > 1e-6) {
                a2 = fix_sign(e.normalized());
                break;
            }
        }
        l2 = 0.0;
    }
    p.axis1.assign(a1.data(), a1.data() + m);
    p.axis2.assign(a2.data(), a2.data() + m);
    p.explained1 = total > 0.0 ? l1 / total : 0.0;
    p.explained2 = total > 0.0 ? l2 / total : 0.0;
    return p;
}

std::vector<GridRow> grid_2d(const LossContext &ctx, const Params &origin, const Params &axis1,
                             const Params &axis2, const std::array<double, 4> &extents,
                             std::size_t resolution) {
    check_params(ctx, origin, "grid origin");
    check_params(ctx, axis1, "grid axis 1");
    check_params(ctx, axis2, "grid axis 2");
    WS_REQUIRE(resolution >= 2, "grid resolution must be >= 2");
    WS_REQUIRE(extents[1] > extents[0] && extents[3] > extents[2], "grid extents are empty");
    auto coord = [&](double lo, double hi, std::size_t k) {
        return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(resolution - 1);
    };
    std::vector<GridRow> rows;
    std::vector<Params> pts;
    for (std::size_t iv = 0; iv < resolution; ++iv)
        for (std::size_t iu = 0; iu < resolution; ++iu) {
            const double u = coord(extents[0], extents[1], iu);
            const double v = coord(extents[2], extents[3], iv);
            Params p = origin;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] += u * axis1[i] + v * axis2[i];
            pts.push_back(std::move(p));
            rows.push_back({u, v, 0.0});
        }
    const auto ls = eval_all(ctx, pts);
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k].loss = ls[k];
    return rows;
}

std::vector<PathRow> gradient_along_path(const LossContext &ctx, const std::vector<Params> &path) {
    WS_REQUIRE(!path.empty(), "empty path");
    for (const auto &p : path) check_params(ctx, p, "path point");
    std::vector<PathRow> rows(path.size());
    double s = 0.0;
    for (std::size_t j = 0; j < path.size(); ++j) {
        if (j > 0) s += norm_2(subtract(path[j], path[j - 1]));
        // Forward tangent, backward at the end.
        Params t;
        if (path.size() > 1)
            t = j + 1 < path.size() ? subtract(path[j + 1], path[j]) : subtract(path[j], path[j - 1]);
        const std::vector<double> g = gradient(ctx, path[j]);
        PathRow &row = rows[j];
        row.arclength = s;
        row.loss = ctx.loss(path[j]);
        row.grad_norm = norm_2(g);
        const double tn = t.empty() ? 0.0 : norm_2(t);
        if (tn > 0.0) {
            double d = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) d += g[i] * t[i];
            row.directional_gradient = d / tn;
        }
    }
    return rows;
}

} // namespace warmstart
