#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dense.hpp"
#include "warmstart/errors.hpp"
#include "warmstart/bounds.hpp"
#include "warmstart/landscape.hpp"
#include "warmstart/util.hpp"

using namespace warmstart;

namespace {

constexpr double kPi = std::numbers::pi;

Ansatz single_x() {
    Ansatz a(1);
    a.add_rotation(PauliString("X"), 0);
    return a;
}

// Two X rotations on one qubit: L = sin^2(t0 + t1 - dt) for H = X.
LossContext two_x(double dt) {
    Ansatz a(1);
    a.add_rotation(PauliString("X"), 0);
    a.add_rotation(PauliString("X"), 1);
    return LossContext(a, {0.0, 0.0}, PauliSum::parse("1 X"), dt, StateVector(1));
}

} // namespace

TEST(Landscape, SampleHypercube) {
    const HypercubeRegion zero{{0.3, -1.0}, 0.0};
    for (const auto &p : sample_hypercube(zero, 1, 5)) EXPECT_EQ(p, zero.center);

    const HypercubeRegion reg{{0.5, -2.0, 1.0}, 0.25};
    const std::size_t k = 20000;
    const auto pts = sample_hypercube(reg, 9, k);
    for (std::size_t i = 0; i < 3; ++i) {
        double mean = 0.0;
        for (const auto &p : pts) {
            EXPECT_GE(p[i], reg.center[i] - reg.r);
            EXPECT_LE(p[i], reg.center[i] + reg.r);
            mean += p[i];
        }
        mean /= k;
        EXPECT_NEAR(mean, reg.center[i], 3 * reg.r / std::sqrt(3.0 * k));
    }
    EXPECT_EQ(sample_hypercube(reg, 9, 4), sample_hypercube(reg, 9, 4));
    EXPECT_NE(sample_hypercube(reg, 9, 4), sample_hypercube(reg, 10, 4));
}

TEST(Landscape, CommonUnitDrawsAcrossRadii) {
    const auto a = sample_hypercube({{0.0, 0.0}, 0.1}, 5, 3);
    const auto b = sample_hypercube({{0.0, 0.0}, 0.4}, 5, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(b[i][j], 4.0 * a[i][j], 1e-15);
}

TEST(Landscape, SummarizeMatchesHandComputation) {
    const auto e = summarize({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    EXPECT_DOUBLE_EQ(e.variance, 5.0 / 3.0);
    // m4 = (2*1.5^4 + 2*0.5^4) / 4 = 2.5625; (m4 - (1/3) s^4) / 4.
    EXPECT_NEAR(e.std_error_of_variance, std::sqrt((2.5625 - 25.0 / 27.0) / 4.0), 1e-15);
    EXPECT_THROW(summarize({1.0}), ValidationError);
}

TEST(Landscape, ConstantLossHasZeroVariance) {
    // A Z rotation on |0> only changes the global phase.
    Ansatz a(1);
    a.add_rotation(PauliString("Z"), 0);
    LossContext ctx(a, {0.0}, PauliSum(1), 0.0, StateVector(1));
    const auto e = estimate_variance(ctx, {{0.0}, 1.0}, 100, 3);
    EXPECT_NEAR(e.variance, 0.0, 1e-28);
}

TEST(Landscape, FullRangeSinSquaredVariance) {
    LossContext ctx(single_x(), {0.0}, PauliSum(1), 0.0, StateVector(1));
    const auto e = estimate_variance(ctx, {{0.0}, kPi}, 200000, 17);
    EXPECT_NEAR(e.variance, 0.125, 3 * e.std_error_of_variance);
    // At r = pi the analytic value is c+ - k+^2.
    EXPECT_NEAR(moment_gap(kPi), 0.125, 1e-15);
}

TEST(Landscape, SameSeedBitIdentical) {
    std::mt19937_64 rng(51);
    const Ansatz a = build_hea(3, 2);
    LossContext ctx(a, oracle::random_params(a.num_params(), rng),
                    chain_model(3, Axis::X, Axis::Z, -0.95, Axis::Y), 0.1, StateVector(3));
    const HypercubeRegion reg{ctx.theta_star(), 0.3};
    const auto x = estimate_variance(ctx, reg, 500, 8);
    const auto y = estimate_variance(ctx, reg, 500, 8);
    EXPECT_EQ(x.variance, y.variance);
    EXPECT_EQ(x.mean, y.mean);
    EXPECT_EQ(x.seed, 8u);
}

TEST(Landscape, GridHelpers) {
    const auto g = default_r_grid();
    ASSERT_EQ(g.size(), 40u);
    EXPECT_NEAR(g.front(), 1e-3, 1e-18);
    EXPECT_EQ(g.back(), kPi);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
    EXPECT_THROW(log_grid(0.0, 1.0, 5), ValidationError);
}

TEST(Landscape, SweepBasics) {
    std::mt19937_64 rng(52);
    const Ansatz a = build_hea(3, 3);
    LossContext ctx(a, oracle::random_params(a.num_params(), rng), PauliSum(3), 0.0, StateVector(3));
    const auto s = variance_sweep_r(ctx, default_r_grid(), 2000, 4, 100);
    ASSERT_EQ(s.rows.size(), 40u);
    EXPECT_LT(s.rows.front().mean_loss, 1e-5);
    EXPECT_EQ(s.r_max, s.rows[s.peak_index].r);
    EXPECT_EQ(s.var_max, s.rows[s.peak_index].variance);
    for (const auto &r : s.rows) EXPECT_LE(r.variance, s.var_max);
    EXPECT_GT(s.r_max_refined, 0.0);

    // Peak stays within one grid cell when the sample count doubles.
    const auto d = variance_sweep_r(ctx, default_r_grid(), 4000, 4, 100);
    EXPECT_LE(std::abs(static_cast<long>(d.peak_index) - static_cast<long>(s.peak_index)), 1);
}

TEST(Landscape, DtSweepAtZeroMatchesEstimate) {
    std::mt19937_64 rng(53);
    const Ansatz a = build_hea(3, 2);
    const PauliSum h = chain_model(3, Axis::X, Axis::Z, -0.95, Axis::Y);
    LossContext ctx(a, oracle::random_params(a.num_params(), rng), h, 0.0, StateVector(3));
    const auto res = variance_vs_dt(ctx, {0.0, 0.1, 1.0}, 0.2, 1000, 6);
    // The sweep draws from stream 0 of the seed, like variance_sweep_r.
    const auto ref = estimate_variance(ctx, {ctx.theta_star(), 0.2}, 1000, derive_seed(6, 0));
    EXPECT_EQ(res.rows[0].variance, ref.variance);
    EXPECT_EQ(res.rows.size(), 3u);
}

TEST(Landscape, PowerLawFits) {
    const std::vector<double> xs = {1, 2, 4, 8, 16};
    std::vector<double> ys, zs, es;
    for (double x : xs) {
        ys.push_back(std::pow(x, -0.5));
        zs.push_back(3 * x * x);
        es.push_back(2.0 * std::exp(-0.7 * x));
    }
    const auto f = fit_power_law(xs, ys);
    EXPECT_NEAR(f.exponent, -0.5, 1e-12);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
    const auto g = fit_power_law(xs, zs);
    EXPECT_NEAR(g.exponent, 2.0, 1e-12);
    EXPECT_NEAR(g.prefactor, 3.0, 1e-12);
    const auto h = fit_log_linear(xs, es);
    EXPECT_NEAR(h.exponent, -0.7, 1e-12);
    EXPECT_NEAR(h.prefactor, 2.0, 1e-12);
    EXPECT_THROW(fit_power_law({1, 2}, {1, 2}), ValidationError);
    EXPECT_THROW(fit_power_law({1, 2, 3}, {1, -2, 3}), ValidationError);
}

TEST(Landscape, CutClosedForm) {
    const auto ctx = two_x(0.0);
    const auto rows = cut_1d(ctx, {0.0, 0.3}, {0.0, 0.0}, {1.0, 0.0}, 11, 0.2);
    ASSERT_EQ(rows.size(), 22u);
    EXPECT_NEAR(rows.front().s, -0.2, 1e-15);
    for (const auto &r : rows) {
        EXPECT_NEAR(r.loss, std::pow(std::sin(r.s - r.dt), 2), 1e-13);
        EXPECT_NEAR(r.theta_inf, r.s, 1e-15);
    }
    const auto at0 = cut_1d(ctx, {0.0}, {0.0, 0.0}, {1.0, 0.0}, 5, 0.0);
    EXPECT_NEAR(at0.front().loss, 0.0, 1e-15);
    EXPECT_THROW(cut_1d(ctx, {0.0}, {0.1, 0.1}, {0.1, 0.1}, 5), ValidationError);
}

TEST(Landscape, Pca) {
    std::vector<Params> line;
    for (int k = 0; k < 5; ++k) line.push_back({static_cast<double>(k), 0.0, 0.0});
    const auto p = pca_plane(line);
    EXPECT_NEAR(std::abs(p.axis1[0]), 1.0, 1e-12);
    EXPECT_NEAR(p.explained1, 1.0, 1e-12);
    EXPECT_TRUE(p.rank_deficient);
    double dot = 0.0;
    for (int i = 0; i < 3; ++i) dot += p.axis1[i] * p.axis2[i];
    EXPECT_NEAR(dot, 0.0, 1e-12);

    const std::vector<Params> plane = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {1, 2, 0}, {0.5, 1.0, 0}};
    const auto q = pca_plane(plane);
    EXPECT_NEAR(q.explained1 + q.explained2, 1.0, 1e-12);
    EXPECT_NEAR(std::abs(q.axis1[1]), 1.0, 1e-12);
    EXPECT_NEAR(q.axis1[2], 0.0, 1e-12);
    EXPECT_NEAR(q.axis2[2], 0.0, 1e-12);
    EXPECT_GT(q.axis1[1], 0.0); // sign convention

    std::mt19937_64 rng(54);
    std::normal_distribution<double> g;
    std::vector<Params> cloud;
    for (int k = 0; k < 50; ++k) cloud.push_back({3 * g(rng), g(rng), 0.3 * g(rng)});
    const auto c = pca_plane(cloud);
    Eigen::MatrixXd x(50, 3);
    for (int k = 0; k < 50; ++k)
        for (int i = 0; i < 3; ++i) x(k, i) = cloud[k][i];
    x.rowwise() -= x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.transpose() * x / 49.0);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::abs(c.axis1[i]), std::abs(es.eigenvectors()(i, 2)), 1e-10);
    EXPECT_THROW(pca_plane({{0, 0}, {0, 0}, {1, 1}}), ValidationError);
}

TEST(Landscape, Grid2d) {
    const auto ctx = two_x(0.0);
    const auto rows = grid_2d(ctx, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {-kPi, kPi, -1.0, 1.0}, 5);
    ASSERT_EQ(rows.size(), 25u);
    EXPECT_NEAR(rows[1].u, -kPi / 2, 1e-15); // v outer, u inner
    EXPECT_NEAR(rows[5].v, -0.5, 1e-15);
    for (const auto &r : rows) EXPECT_NEAR(r.loss, std::pow(std::sin(r.u + r.v), 2), 1e-13);
    // Period pi along either axis.
    for (std::size_t iv = 0; iv < 5; ++iv)
        EXPECT_NEAR(rows[iv * 5].loss, rows[iv * 5 + 4].loss, 1e-13);
    const auto centre = grid_2d(ctx, {0.2, 0.1}, {1.0, 0.0}, {0.0, 1.0}, {-1, 1, -1, 1}, 3);
    EXPECT_NEAR(centre[4].loss, ctx.loss({0.2, 0.1}), 1e-15);
}

TEST(Landscape, GradientAlongPath) {
    const auto ctx = two_x(0.0);
    const auto still = gradient_along_path(ctx, {{0.4, 0.1}, {0.4, 0.1}, {0.4, 0.1}});
    for (const auto &r : still) EXPECT_EQ(r.directional_gradient, 0.0);

    std::vector<Params> line;
    for (int k = 0; k <= 10; ++k) line.push_back({0.05 * k, 0.0});
    const auto rows = gradient_along_path(ctx, line);
    for (const auto &r : rows) {
        const double t = r.arclength;
        EXPECT_NEAR(r.loss, std::pow(std::sin(t), 2), 1e-13);
        EXPECT_NEAR(r.directional_gradient, std::sin(2 * t), 1e-12);
        EXPECT_NEAR(r.grad_norm, std::sqrt(2.0) * std::abs(std::sin(2 * t)), 1e-12);
    }
}
