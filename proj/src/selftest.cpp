#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "warmstart/bounds.hpp"
#include "warmstart/experiments.hpp"
#include "warmstart/loss.hpp"

namespace warmstart {

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Mat single(Axis a) {
    Mat m(2, 2);
    const cplx i(0, 1);
    switch (a) {
    case Axis::I: m << 1, 0, 0, 1; break;
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, -i, i, 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

// Kronecker product with qubit 1 as the most significant factor.
Mat dense(const PauliString &p) {
    Mat out = Mat::Identity(1, 1);
    for (int q = 1; q <= p.n(); ++q) {
        const Mat s = single(p.axis(q));
        Mat next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * s;
        out = next;
    }
    return out;
}

Mat dense(const PauliSum &h) {
    const Eigen::Index d = Eigen::Index{1} << h.n();
    Mat out = Mat::Zero(d, d);
    for (const auto &t : h.terms()) out += t.coeff * dense(t.op);
    return out;
}

Vec to_eigen(const CVec &v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

double max_diff(const CVec &a, const Vec &b) { return (to_eigen(a) - b).cwiseAbs().maxCoeff(); }

SelfCheck check(std::string name, double err, double tol) {
    std::ostringstream os;
    os.precision(3);
    os << "err=" << err << " tol=" << tol;
    return {std::move(name), err <= tol, os.str()};
}

CVec random_vec(int n, std::mt19937_64 &rng) { return StateVector::random(n, rng).amplitudes(); }

} // namespace

std::vector<SelfCheck> run_selftest() {
    std::vector<SelfCheck> out;
    std::mt19937_64 rng(20240611);
    const cplx i(0, 1);

    // Pauli action on every two-qubit string.
    {
        double err = 0;
        const CVec v = random_vec(2, rng);
        for (const char *a : {"I", "X", "Y", "Z"})
            for (const char *b : {"I", "X", "Y", "Z"}) {
                const PauliString p(std::string(a) + b);
                err = std::max(err, max_diff(pauli_apply(p, v), dense(p) * to_eigen(v)));
            }
        out.push_back(check("pauli_apply_2q", err, 1e-14));
    }
    // Rotations exp(-i a P) = cos a - i sin a P.
    {
        double err = 0;
        for (const char *s : {"X", "Y", "Z", "XY", "ZZ", "YI"}) {
            const PauliString p(s);
            CVec v = random_vec(p.n(), rng);
            const Vec ref = (std::cos(0.37) * Mat::Identity(1 << p.n(), 1 << p.n()) - i * std::sin(0.37) * dense(p)) * to_eigen(v);
            pauli_rotate(p, 0.37, v);
            err = std::max(err, max_diff(v, ref));
        }
        out.push_back(check("pauli_rotate", err, 1e-14));
    }
    // Real and imaginary time evolution against a dense eigendecomposition.
    {
        PauliSum h = PauliSum::parse("0.7 XZ\n-0.4 YI\n0.25 ZZ\n0.9 IX");
        const Mat hd = dense(h);
        Eigen::SelfAdjointEigenSolver<Mat> es(hd);
        const CVec v = random_vec(2, rng);
        const double t = 0.8;
        const Vec ev = es.eigenvalues().cast<cplx>();
        const Vec re = es.eigenvectors() * (-i * t * ev).array().exp().matrix().asDiagonal() *
                       es.eigenvectors().adjoint() * to_eigen(v);
        out.push_back(check("evolve_real_2q", max_diff(evolve_real(v, h, t), re), 1e-12));
        Vec im = es.eigenvectors() * (-t * ev).array().exp().matrix().asDiagonal() *
                 es.eigenvectors().adjoint() * to_eigen(v);
        im.normalize();
        out.push_back(check("evolve_imaginary_2q", max_diff(evolve_imaginary(v, h, t), im), 1e-12));
    }
    // One RY parameter: L = sin^2(theta - theta*), dL = sin 2(theta - theta*),
    // d2L = 2 cos 2(theta - theta*).
    {
        Ansatz a(1);
        a.add_rotation(PauliString("Y"), 0);
        const double ts = 0.4, th = -0.3, d = th - ts;
        LossContext ctx(a, {ts}, PauliSum(1), 0.0, StateVector(1));
        out.push_back(check("loss_sin2", std::abs(ctx.loss({th}) - std::pow(std::sin(d), 2)), 1e-14));
        out.push_back(check("gradient_sin2", std::abs(gradient(ctx, {th})[0] - std::sin(2 * d)), 1e-13));
        out.push_back(check("hessian_sin2", std::abs(hessian(ctx, {th})(0, 0) - 2 * std::cos(2 * d)), 1e-12));
    }
    // Two-qubit circuit loss against dense unitaries.
    {
        const Ansatz a = build_hea(2, 1);
        const PauliSum h = PauliSum::parse("1 XZ\n-0.95 YI\n-0.95 IY");
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        Params ts(a.num_params()), th(a.num_params());
        for (auto &x : ts) x = u(rng);
        for (auto &x : th) x = u(rng);
        const double dt = 0.2;
        LossContext ctx(a, ts, h, dt, StateVector(2));
        auto unitary = [&](const Params &p) {
            Mat m = Mat::Identity(4, 4);
            const auto ang = a.gate_angles(p);
            int k = 0;
            for (const auto &g : a.gates()) {
                Mat gm;
                if (g.kind == Gate::Kind::cz) {
                    gm = Mat::Identity(4, 4);
                    gm(3, 3) = -1;
                } else {
                    const double t = g.kind == Gate::Kind::rotation ? ang[k++] : g.angle;
                    gm = std::cos(t) * Mat::Identity(4, 4) - i * std::sin(t) * dense(g.gen);
                }
                m = gm * m;
            }
            return m;
        };
        Eigen::SelfAdjointEigenSolver<Mat> es(dense(h));
        const Mat ev = es.eigenvectors() *
                       (-i * dt * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
                       es.eigenvectors().adjoint();
        Vec zero = Vec::Zero(4);
        zero(0) = 1;
        const Vec target = ev * unitary(ts) * zero;
        const double ref = 1.0 - std::norm(target.dot(unitary(th) * zero));
        out.push_back(check("real_time_loss_2q", std::abs(ctx.loss(th) - ref), 1e-12));
    }
    // Hypercube moment identity.
    for (double r : {0.1, 1.0}) {
        const double lhs = c_plus(r) - k_plus(r) * k_plus(r);
        out.push_back(check("moment_gap_r" + std::to_string(r).substr(0, 3), std::abs(lhs - moment_gap(r)), 1e-12));
    }
    return out;
}

} // namespace warmstart
