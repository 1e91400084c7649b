#include "warmstart/state.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "warmstart/errors.hpp"

namespace warmstart {

namespace {

constexpr double kSeriesTol = 1e-14;

// One substep v <- sum_k (f h H)^k / k! v with |f h| ||H|| <= 1.
void taylor_step(CVec &v, const PauliSum &h, cplx f, CVec &term, CVec &tmp) {
    term = v;
    const double base = std::sqrt(norm2(v));
    for (int k = 1; k < 200; ++k) {
        pauli_sum_matvec(h, term, tmp);
        const cplx scale = f / static_cast<double>(k);
        double tn = 0.0;
        for (std::size_t b = 0; b < v.size(); ++b) {
            term[b] = scale * tmp[b];
            v[b] += term[b];
            tn += std::norm(term[b]);
        }
        if (std::sqrt(tn) < kSeriesTol * std::max(base, std::sqrt(norm2(v)))) return;
    }
    throw NumericError("taylor series did not converge");
}

void evolve_series(CVec &v, const PauliSum &h, double t, bool imaginary) {
    const double hn = h.one_norm();
    if (t == 0.0 || hn == 0.0) return;
    const auto steps = static_cast<long>(std::ceil(std::abs(t) * hn));
    WS_REQUIRE(steps < 100000000L, "evolution time too large");
    const double dt = t / static_cast<double>(steps);
    const cplx f = imaginary ? cplx(-dt, 0.0) : cplx(0.0, -dt);
    CVec term, tmp;
    for (long s = 0; s < steps; ++s) {
        taylor_step(v, h, f, term, tmp);
        if (imaginary) {
            const double nv = std::sqrt(norm2(v));
            if (!(nv > std::numeric_limits<double>::min()) || !std::isfinite(nv))
                throw NumericError("imaginary-time evolution underflowed");
            for (auto &a : v) a /= nv;
        }
    }
}

void check_state_dims(const CVec &v, const PauliSum &h) {
    WS_REQUIRE(v.size() == (std::size_t{1} << h.n()), "evolution: dimension mismatch");
}

} // namespace

double norm2(const CVec &v) {
    double s = 0.0;
    for (const auto &a : v) s += std::norm(a);
    return s;
}

cplx inner(const CVec &u, const CVec &v) {
    WS_REQUIRE(u.size() == v.size(), "inner product: dimension mismatch");
    cplx s{};
    for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
    return s;
}

void normalize(CVec &v) {
    const double nv = std::sqrt(norm2(v));
    if (!(nv > 0.0) || !std::isfinite(nv)) throw NumericError("cannot normalize vector");
    for (auto &a : v) a /= nv;
}

StateVector::StateVector(int n) : n_(n) {
    WS_REQUIRE(n >= 1 && n <= kMaxQubits, "qubit count out of range");
    amp_.assign(std::size_t{1} << n, cplx{});
    amp_[0] = 1.0;
}

StateVector::StateVector(int n, CVec amplitudes) : n_(n), amp_(std::move(amplitudes)) {
    WS_REQUIRE(n >= 1 && n <= kMaxQubits, "qubit count out of range");
    WS_REQUIRE(amp_.size() == (std::size_t{1} << n), "amplitude count does not match 2^n");
    const double nv = norm2(amp_);
    WS_REQUIRE(nv > 0.0 && std::isfinite(nv), "amplitudes must be finite and not all zero");
    normalize(amp_);
}

StateVector StateVector::basis(int n, std::uint64_t index) {
    StateVector s(n);
    WS_REQUIRE(index < s.dim(), "basis index out of range");
    s.amp_[0] = 0.0;
    s.amp_[index] = 1.0;
    return s;
}

StateVector StateVector::random(int n, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    CVec a(std::size_t{1} << n);
    for (auto &c : a) c = {g(rng), g(rng)};
    return StateVector(n, std::move(a));
}

double StateVector::norm() const { return std::sqrt(norm2(amp_)); }

void StateVector::write_csv(std::ostream &os) const {
    os << "basis_index,re,im\n" << std::setprecision(17);
    for (std::size_t i = 0; i < amp_.size(); ++i)
        os << i << ',' << amp_[i].real() << ',' << amp_[i].imag() << '\n';
}

CVec evolve_real(const CVec &v, const PauliSum &h, double t) {
    WS_REQUIRE(std::isfinite(t), "evolution time must be finite");
    check_state_dims(v, h);
    CVec out = v;
    evolve_series(out, h, t, false);
    // Unitary evolution; this only removes rounding drift.
    const double drift = std::sqrt(norm2(out) / norm2(v));
    for (auto &a : out) a /= drift;
    return out;
}

StateVector evolve_real(const StateVector &v, const PauliSum &h, double t) {
    return StateVector(v.n(), evolve_real(v.amplitudes(), h, t));
}

CVec evolve_imaginary(const CVec &v, const PauliSum &h, double tau) {
    WS_REQUIRE(std::isfinite(tau) && tau >= 0.0, "imaginary time must be finite and >= 0");
    check_state_dims(v, h);
    CVec out = v;
    normalize(out);
    evolve_series(out, h, tau, true);
    normalize(out);
    return out;
}

StateVector evolve_imaginary(const StateVector &v, const PauliSum &h, double tau) {
    return StateVector(v.n(), evolve_imaginary(v.amplitudes(), h, tau));
}

double fidelity(const CVec &u, const CVec &v) { return std::norm(inner(u, v)); }

double fidelity(const StateVector &u, const StateVector &v) {
    WS_REQUIRE(u.n() == v.n(), "fidelity: qubit count mismatch");
    return fidelity(u.amplitudes(), v.amplitudes());
}

StateVector bell_pair_state(int n) {
    WS_REQUIRE(n >= 1 && 2 * n <= 12, "bell pair register limited to 12 qubits");
    const std::size_t da = std::size_t{1} << n;
    CVec a(da * da, cplx{});
    // sum_x |x>_A |x>_B / sqrt(2^n): qubit Aj and Bj share bit value.
    const double amp = 1.0 / std::sqrt(static_cast<double>(da));
    for (std::size_t x = 0; x < da; ++x) a[x * da + x] = amp;
    return StateVector(2 * n, std::move(a));
}

StateVector tensor(const StateVector &a, const StateVector &b) {
    CVec out(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) out[i * b.dim() + j] = a[i] * b[j];
    return StateVector(a.n() + b.n(), std::move(out));
}

} // namespace warmstart
