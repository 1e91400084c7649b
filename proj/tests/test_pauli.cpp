#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dense.hpp"
#include "warmstart/errors.hpp"
#include "warmstart/pauli.hpp"
#include "warmstart/state.hpp"

using namespace warmstart;

namespace {

CVec basis(int n, std::size_t k) {
    CVec v(std::size_t{1} << n, 0.0);
    v[k] = 1.0;
    return v;
}

std::string random_axes(int n, std::mt19937_64 &rng) {
    std::string s;
    for (int q = 0; q < n; ++q) s += "IXYZ"[rng() % 4];
    return s;
}

} // namespace

TEST(Pauli, SingleQubitActions) {
    const cplx i(0, 1);
    auto x = pauli_apply(PauliString("X"), basis(1, 0));
    EXPECT_EQ(x[0], cplx(0));
    EXPECT_EQ(x[1], cplx(1));
    auto z = pauli_apply(PauliString("Z"), basis(1, 1));
    EXPECT_EQ(z[1], cplx(-1));
    auto y = pauli_apply(PauliString("Y"), basis(1, 0));
    EXPECT_EQ(y[0], cplx(0));
    EXPECT_EQ(y[1], i);
}

TEST(Pauli, QubitOneIsMostSignificant) {
    // X on qubit 1 of |00> gives |10>, index 2.
    auto v = pauli_apply(PauliString("XI"), basis(2, 0));
    EXPECT_EQ(v[2], cplx(1));
    EXPECT_EQ(PauliString::single(3, 2, Axis::Y).str(), "IYI");
}

TEST(Pauli, DenseAgreementAndHermiticity) {
    std::mt19937_64 rng(11);
    for (int n = 1; n <= 3; ++n)
        for (int rep = 0; rep < 20; ++rep) {
            const PauliString p(random_axes(n, rng));
            const auto m = oracle::dense(p);
            EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
            const CVec v = StateVector::random(n, rng).amplitudes();
            EXPECT_LT(oracle::max_diff(pauli_apply(p, v), m * oracle::vec(v)), 1e-15);
        }
}

TEST(Pauli, SelfInverse) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const PauliString p(random_axes(n, rng));
        const CVec v = StateVector::random(n, rng).amplitudes();
        const CVec w = pauli_apply(p, pauli_apply(p, v));
        for (std::size_t k = 0; k < v.size(); ++k) EXPECT_LE(std::abs(w[k] - v[k]), 1e-15);
    }
}

TEST(Pauli, NormPreserved) {
    std::mt19937_64 rng(13);
    const PauliString p("XYZIY");
    const CVec v = StateVector::random(5, rng).amplitudes();
    EXPECT_NEAR(norm2(pauli_apply(p, v)), 1.0, 1e-14);
}

TEST(Pauli, MatvecExamples) {
    PauliSum z(1);
    z.add(1.0, "Z");
    auto a = pauli_sum_matvec(z, basis(1, 0));
    EXPECT_EQ(a[0], cplx(1));
    EXPECT_EQ(a[1], cplx(0));

    PauliSum xz(1);
    xz.add(0.5, "X");
    xz.add(0.5, "Z");
    auto b = pauli_sum_matvec(xz, basis(1, 0));
    EXPECT_NEAR(std::abs(b[0] - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(b[1] - 0.5), 0.0, 1e-15);
}

TEST(Pauli, MatvecMatchesDense) {
    std::mt19937_64 rng(14);
    const PauliSum h = chain_model(3, Axis::X, Axis::X, -0.95, Axis::Y);
    const CVec v = StateVector::random(3, rng).amplitudes();
    EXPECT_LT(oracle::max_diff(pauli_sum_matvec(h, v), oracle::dense(h) * oracle::vec(v)), 1e-12);
    for (int n = 1; n <= 3; ++n) {
        const PauliSum r = oracle::random_sum(n, 6, rng);
        const CVec w = StateVector::random(n, rng).amplitudes();
        EXPECT_LT(oracle::max_diff(pauli_sum_matvec(r, w), oracle::dense(r) * oracle::vec(w)), 1e-12);
    }
}

TEST(Pauli, MatvecLinear) {
    std::mt19937_64 rng(15);
    const PauliSum h = oracle::random_sum(4, 8, rng);
    const CVec u = StateVector::random(4, rng).amplitudes(), v = StateVector::random(4, rng).amplitudes();
    CVec s(u.size());
    const cplx a(0.3, -1.2);
    for (std::size_t k = 0; k < u.size(); ++k) s[k] = a * u[k] + v[k];
    const auto hu = pauli_sum_matvec(h, u), hv = pauli_sum_matvec(h, v), hs = pauli_sum_matvec(h, s);
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_LT(std::abs(hs[k] - (a * hu[k] + hv[k])), 1e-13);
}

TEST(Pauli, DimensionMismatchThrows) {
    EXPECT_THROW(pauli_apply(PauliString("XX"), basis(3, 0)), ValidationError);
    PauliSum h(2);
    h.add(1.0, "ZZ");
    EXPECT_THROW(pauli_sum_matvec(h, basis(1, 0)), ValidationError);
    EXPECT_THROW(h.add(1.0, "Z"), ValidationError);
    EXPECT_THROW(PauliString("XQ"), ValidationError);
}

TEST(Pauli, SpectralBoundExamples) {
    PauliSum z(1);
    z.add(1.0, "Z");
    EXPECT_NEAR(spectral_bound(z), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(spectral_bound(z, SpectralMode::triangle), 1.0);

    PauliSum xz(1);
    xz.add(0.5, "X");
    xz.add(0.5, "Z");
    EXPECT_NEAR(spectral_bound(xz), std::sqrt(0.5), 1e-12);
    EXPECT_DOUBLE_EQ(spectral_bound(xz, SpectralMode::triangle), 1.0);

    // X1X2 - 0.95 (Y1 + Y2); numpy eigvalsh of the 4x4 matrix gives max|eig| = 2.1470910553583886.
    const PauliSum h = PauliSum::parse("1 XX\n-0.95 YI\n-0.95 IY");
    EXPECT_NEAR(spectral_bound(h), 2.1470910553583886, 1e-10);
}

TEST(Pauli, SpectralNormUsesMagnitude) {
    // Eigenvalues {-3, 1}: the signed maximum would be 1.
    const PauliSum h = PauliSum::parse("-1 I\n-2 Z");
    EXPECT_NEAR(spectral_bound(h), 3.0, 1e-12);
    auto [lo, hi] = extremal_eigenvalues(h);
    EXPECT_NEAR(lo, -3.0, 1e-12);
    EXPECT_NEAR(hi, 1.0, 1e-12);
}

TEST(Pauli, ExactBelowTriangle) {
    std::mt19937_64 rng(16);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const PauliSum h = oracle::random_sum(n, 1 + static_cast<int>(rng() % 6), rng);
        EXPECT_LE(spectral_bound(h), spectral_bound(h, SpectralMode::triangle) + 1e-12);
    }
}

TEST(Pauli, ExactMatchesDenseEigensolve) {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        const PauliSum h = oracle::random_sum(3, 5, rng);
        Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::dense(h));
        const double ref = es.eigenvalues().cwiseAbs().maxCoeff();
        EXPECT_NEAR(spectral_bound(h), ref, 1e-10);
    }
}

TEST(Pauli, ExactRefusedAboveTwelveQubits) {
    const PauliSum h = chain_model(13, Axis::X, Axis::Z, -0.95, Axis::Y);
    EXPECT_THROW(spectral_bound(h), ValidationError);
    EXPECT_DOUBLE_EQ(spectral_bound(h, SpectralMode::triangle), 12 + 13 * 0.95);
}

TEST(Pauli, TextRoundTrip) {
    const std::string text = "# field\n-0.95 YIII\n 1   XZII \n0.125 IIXZ\n";
    const PauliSum h = PauliSum::parse(text);
    ASSERT_EQ(h.terms().size(), 3u);
    EXPECT_DOUBLE_EQ(h.terms()[0].coeff, -0.95);
    EXPECT_EQ(h.terms()[1].op.str(), "XZII");
    EXPECT_EQ(PauliSum::parse(h.serialize()), h);

    std::mt19937_64 rng(18);
    const PauliSum r = oracle::random_sum(4, 10, rng);
    EXPECT_EQ(PauliSum::parse(r.serialize()), r);
}

TEST(Pauli, TypographicMinusAccepted) {
    const PauliSum h = PauliSum::parse("\xE2\x88\x92" "0.95 YIII");
    EXPECT_DOUBLE_EQ(h.terms()[0].coeff, -0.95);
}

TEST(Pauli, ParseErrorsNameTheLine) {
    try {
        PauliSum::parse("1 XX\nabc ZZ\n");
        FAIL();
    } catch (const ValidationError &e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(PauliSum::parse("1 XX\n1 Z\n"), ValidationError);
    EXPECT_THROW(PauliSum::parse("# nothing\n"), ValidationError);
    EXPECT_THROW(PauliSum::parse("1 XX extra\n"), ValidationError);
}

TEST(Pauli, Commutation) {
    EXPECT_TRUE(PauliString("XX").commutes_with(PauliString("ZZ")));
    EXPECT_FALSE(PauliString("XI").commutes_with(PauliString("ZI")));
    EXPECT_TRUE(PauliString("XYZ").commutes_with(PauliString("XYZ")));
    EXPECT_EQ(PauliString("IXIZ").pattern(), "XZ");
}

TEST(Pauli, ChainModel) {
    const PauliSum h = chain_model(4, Axis::X, Axis::Z, -0.95, Axis::Y);
    ASSERT_EQ(h.terms().size(), 7u);
    EXPECT_EQ(h.terms()[0].op.str(), "XZII");
    EXPECT_EQ(h.terms()[2].op.str(), "IIXZ");
    EXPECT_EQ(h.terms()[3].op.str(), "YIII");
    EXPECT_DOUBLE_EQ(h.terms()[3].coeff, -0.95);
}
