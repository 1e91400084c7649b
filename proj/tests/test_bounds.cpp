#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dense.hpp"
#include "warmstart/bounds.hpp"
#include "warmstart/errors.hpp"

using namespace warmstart;

namespace {
constexpr double kPi = std::numbers::pi;
}

// Reference moments from mpmath quadrature of cos^2 and cos^4 on [0, r].
TEST(Bounds, MomentsMatchQuadrature) {
    EXPECT_NEAR(k_plus(0.1), 0.996673326987653038, 1e-15);
    EXPECT_NEAR(c_plus(0.1), 0.993366558959106317, 1e-15);
    EXPECT_NEAR(k_plus(0.5), 0.920735492403948253, 1e-15);
    EXPECT_NEAR(c_plus(0.5), 0.852566581580553359, 1e-15);
    EXPECT_NEAR(k_plus(1.0), 0.727324356706420424, 1e-15);
    EXPECT_NEAR(c_plus(1.0), 0.578674278728047666, 1e-15);
    EXPECT_NEAR(k_plus(kPi), 0.5, 1e-15);
    EXPECT_NEAR(c_plus(kPi), 0.375, 1e-15);
    EXPECT_DOUBLE_EQ(k_plus(0.0), 1.0);
    EXPECT_DOUBLE_EQ(c_plus(0.0), 1.0);
    EXPECT_THROW(k_plus(-0.1), ValidationError);
}

TEST(Bounds, MomentGapIdentity) {
    for (double r : {0.1, 0.5, 1.0, kPi}) {
        const double closed = (-1 + 4 * r * r + std::cos(4 * r) + r * std::sin(4 * r)) / (32 * r * r);
        EXPECT_NEAR(c_plus(r) - k_plus(r) * k_plus(r), closed, 1e-12);
        EXPECT_NEAR(moment_gap(r), closed, 1e-12);
    }
    EXPECT_NEAR(moment_gap(0.1), 8.83823046916239112e-6, 1e-18);
    EXPECT_NEAR(moment_gap(kPi), 0.125, 1e-15);
    EXPECT_NEAR(moment_gap(1e-3), 8.8888838095251640209e-14, 1e-27);
    EXPECT_NEAR(moment_gap(0.5), 0.0048127346082123075876, 1e-17);
    // Either side of the switch to the closed form.
    EXPECT_NEAR(moment_gap(0.999), 0.049533727761116735306, 1e-16);
    EXPECT_NEAR(moment_gap(1.0), 0.049673558869639369812, 1e-16);
}

TEST(Bounds, Prop1) {
    EXPECT_NEAR(prop1_bound(0.4, 1, 0.7), moment_gap(0.4) * 0.49, 1e-16);
    EXPECT_DOUBLE_EQ(prop1_bound(0.4, 5, 0.0), 0.0);
    // M = 20, r = 0.1, Delta = 1: the stationary point -15.3 clamps to -1.
    EXPECT_NEAR(prop1_bound(0.1, 20, 1.0), 6.80240396661824322e-6, 1e-17);
    // Large M: the stationary point is feasible and the bound vanishes.
    EXPECT_DOUBLE_EQ(prop1_bound(1.0, 40, 1.0), 0.0);
    EXPECT_THROW(prop1_bound(0.1, 0, 1.0), ValidationError);
    EXPECT_THROW(prop1_bound(0.1, 3, 1.5), ValidationError);
}

TEST(Bounds, Thm5) {
    const auto a = thm5_bound(0.1, 0.5, 8, 1.0, 0.0);
    EXPECT_NEAR(a.value, 4.97142857142857143e-6, 1e-18);
    EXPECT_TRUE(a.valid);
    ASSERT_EQ(a.conditions.size(), 2u);

    const auto b = thm5_bound(0.1, 0.5, 8, 1.0, 0.01);
    EXPECT_NEAR(b.value, 4.967452224e-6, 1e-15);

    const auto edge = thm5_bound(0.1, 0.5, 8, 2.0, 0.25);
    EXPECT_NEAR(edge.value, 0.0, 1e-20);
    EXPECT_NEAR(edge.conditions[0].margin, 0.0, 1e-15);

    const auto pub = thm5_bound(0.1, 0.5, 8, 1.0, 0.0, R0Form::published);
    EXPECT_NEAR(pub.value, 2.20952380952380952e-6, 1e-18);

    // Region: r^2 <= 3 r0^2 / (2 (M - 1)) at dt = 0.
    const double rmax = std::sqrt(3 * 0.25 / (2 * 7));
    EXPECT_TRUE(thm5_bound(rmax * 0.99, 0.5, 8, 1.0, 0.0).valid);
    EXPECT_FALSE(thm5_bound(rmax * 1.01, 0.5, 8, 1.0, 0.0).valid);
    EXPECT_FALSE(thm5_bound(0.01, 0.5, 8, 1.0, 0.6).valid);
    EXPECT_THROW(thm5_bound(0.1, 1.0, 8, 1.0, 0.0), ValidationError);
    EXPECT_FALSE(to_text(a).empty());
}

TEST(Bounds, Thm4) {
    EXPECT_NEAR(thm4_bound(0.1, 0.5, 20, 1.0).value, thm5_bound(0.1, 0.5, 20, 1.0, 0.0).value, 1e-20);
    EXPECT_DOUBLE_EQ(thm4_bound(0.1, 0.5, 20, 0.5).value, 0.0);
    const auto r = thm4_bound(0.1, 0.5, 20, 0.75);
    EXPECT_NEAR(r.value, 1.24285714285714286e-6, 1e-18);
    EXPECT_FALSE(thm4_bound(0.1, 0.5, 20, 0.4).valid);
}

TEST(Bounds, Convexity) {
    const auto c = convexity_radius(0.1, 0.05, 20, 1.0, 1e-4);
    EXPECT_NEAR(c.value, 2.625e-5, 1e-17);
    EXPECT_TRUE(c.valid);
    const double limit = 0.2 / (16.0 * 20);
    const auto edge = convexity_radius(0.1, 0.05, 20, 1.0, limit);
    EXPECT_NEAR(edge.value, 0.0, 1e-18);
    EXPECT_FALSE(convexity_radius(0.1, 0.05, 20, 1.0, 2 * limit).valid);
}

TEST(Bounds, Ite) {
    const auto zero = ite_bounds(0.1, 0.5, 20, 1.0, 0.0, 0.1, 0.05, 1.0);
    EXPECT_NEAR(zero.variance.value, thm5_bound(0.1, 0.5, 20, 1.0, 0.0).value, 1e-20);
    EXPECT_NEAR(zero.convexity.value, convexity_radius(0.1, 0.05, 20, 1.0, 0.0).value, 1e-20);

    const auto spot = ite_bounds(0.1, 0.5, 20, 1.0, 0.05, 0.1, 0.05, 1.0);
    EXPECT_NEAR(spot.variance.value, 4.39275428571428571e-6, 1e-18);
    EXPECT_NEAR(spot.adiabatic.conditions[0].margin + 0.05, 0.00625, 1e-15);

    const auto edge = ite_bounds(0.1, 0.5, 20, 1.0, 1.0 / std::sqrt(24.0), 0.1, 0.05, 1.0);
    EXPECT_NEAR(edge.variance.value, 0.0, 1e-20);

    const auto noflow = ite_bounds(0.1, 0.5, 20, 1.0, 0.01, 0.1, 0.05, -0.5);
    EXPECT_FALSE(noflow.adiabatic.valid);

    const auto inside = ite_bounds(0.05, 0.5, 4, 1.0, 0.01, 0.1, 0.05, 1.0);
    EXPECT_TRUE(inside.variance.valid);
    EXPECT_GT(inside.variance.value, 0.0);
}

TEST(Bounds, Shift) {
    EXPECT_DOUBLE_EQ(adiabatic_shift_bound(4, 2.0, 0.0, 0.5).value, 0.0);
    EXPECT_NEAR(adiabatic_shift_bound(4, 2.0, 0.05, 0.5).value, 0.8, 1e-15);
    EXPECT_NEAR(adiabatic_shift_bound(4, 2.0, 0.05, 0.5, EvolutionKind::imaginary_time).value, 1.6, 1e-15);
    EXPECT_TRUE(adiabatic_shift_bound(4, 2.0, 0.05, 0.0).unbounded);
}

TEST(Bounds, DtLimits) {
    const auto l = adiabatic_dt_limits(4, 1.0, 1.0, 0.5, 0.3, 0.01);
    EXPECT_NEAR(l.dt_grad, 0.0625, 1e-15);
    EXPECT_DOUBLE_EQ(adiabatic_dt_limits(4, 1.0, 1.0, 0.5, 0.0, 0.0).dt_convex, 0.0);
    const auto d = adiabatic_dt_limits(4, 2.0, 1.0, 0.5, 0.3, 0.01);
    EXPECT_NEAR(d.dt_convex, 0.5 * l.dt_convex, 1e-15);
    EXPECT_THROW(adiabatic_dt_limits(4, 1.0, 0.0, 0.5, 0.3, 0.01), ValidationError);
}

TEST(Bounds, Gershgorin) {
    EXPECT_DOUBLE_EQ(gershgorin_row_bound(Eigen::MatrixXd::Identity(3, 3)), 1.0);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = -5;
    EXPECT_DOUBLE_EQ(gershgorin_row_bound(d), 5.0);
    std::mt19937_64 rng(41);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(10, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) a(i, j) = g(rng);
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    EXPECT_GE(gershgorin_row_bound(a), es.eigenvalues().maxCoeff());
    EXPECT_THROW(gershgorin_row_bound(Eigen::MatrixXd::Zero(2, 3)), ValidationError);
}

TEST(Bounds, DeltaThetaStar) {
    // dt = 0 with an orthogonal first generator: Delta = 1.
    const Ansatz hea = build_hea(3, 1);
    std::mt19937_64 rng(42);
    LossContext ctx(hea, oracle::random_params(hea.num_params(), rng),
                    chain_model(3, Axis::X, Axis::X, -0.95, Axis::Y), 0.0, StateVector(3));
    EXPECT_NEAR(delta_theta_star(ctx), 1.0, 1e-12);

    Ansatz z(2);
    z.add_rotation(PauliString("ZI"), 0);
    z.add_rotation(PauliString("XX"), 1);
    LossContext cz(z, {0.3, 0.2}, PauliSum(2), 0.0, StateVector(2));
    EXPECT_NEAR(delta_theta_star(cz), 0.0, 1e-12);
}

TEST(Bounds, DeltaThetaStarMatchesDense) {
    std::mt19937_64 rng(43);
    const PauliSum h = chain_model(3, Axis::X, Axis::X, -0.95, Axis::Y);
    const Ansatz a = build_hva(h, 2);
    const Params ts = oracle::random_params(a.num_params(), rng);
    LossContext ctx(a, ts, h, 0.04, StateVector(3));
    oracle::Vec zero = oracle::Vec::Zero(8);
    zero(0) = 1;
    const oracle::Mat u = oracle::unitary(a, ts);
    const oracle::Vec phi = u.adjoint() * oracle::expm_real(h, 0.04) * u * zero;
    const oracle::Mat s1 = oracle::dense(a.first_generator());
    const double ref = std::norm(zero.dot(phi)) - std::norm(zero.dot(s1 * phi));
    EXPECT_NEAR(delta_theta_star(ctx), ref, 1e-12);
}
