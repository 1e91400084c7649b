#include "warmstart/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "warmstart/errors.hpp"

namespace warmstart {

namespace {

std::size_t dim_of(int n) { return std::size_t{1} << n; }

// i^k for k mod 4.
cplx i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}

inline double parity_sign(std::uint64_t b, std::uint64_t z) {
    return (std::popcount(b & z) & 1) ? -1.0 : 1.0;
}

void check_dims(const PauliString &p, const CVec &v) {
    WS_REQUIRE(v.size() == dim_of(p.n()),
               "pauli: vector length " + std::to_string(v.size()) +
                   " does not match " + std::to_string(p.n()) + " qubits");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

} // namespace

char axis_char(Axis a) {
    static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
    return kChars[static_cast<int>(a)];
}

PauliString::PauliString(std::string_view axes) {
    n_ = static_cast<int>(axes.size());
    WS_REQUIRE(n_ >= 1 && n_ <= kMaxQubits, "pauli string length out of range");
    for (int q = 1; q <= n_; ++q) {
        const std::uint64_t bit = std::uint64_t{1} << (n_ - q);
        switch (axes[q - 1]) {
        case 'I': break;
        case 'X': x_ |= bit; break;
        case 'Y': x_ |= bit; z_ |= bit; ++ny_; break;
        case 'Z': z_ |= bit; break;
        default:
            throw ValidationError("invalid Pauli letter '" +
                                  std::string(1, axes[q - 1]) + "'");
        }
    }
}

PauliString PauliString::single(int n, int qubit, Axis a) {
    WS_REQUIRE(qubit >= 1 && qubit <= n, "qubit index out of range");
    std::string s(n, 'I');
    s[qubit - 1] = axis_char(a);
    return PauliString(s);
}

PauliString PauliString::identity(int n) { return PauliString(std::string(n, 'I')); }

Axis PauliString::axis(int qubit) const {
    const std::uint64_t bit = std::uint64_t{1} << (n_ - qubit);
    const bool x = x_ & bit, z = z_ & bit;
    if (x && z) return Axis::Y;
    if (x) return Axis::X;
    if (z) return Axis::Z;
    return Axis::I;
}

std::string PauliString::pattern() const {
    std::string out;
    for (int q = 1; q <= n_; ++q)
        if (axis(q) != Axis::I) out.push_back(axis_char(axis(q)));
    return out;
}

std::string PauliString::str() const {
    std::string out(n_, 'I');
    for (int q = 1; q <= n_; ++q) out[q - 1] = axis_char(axis(q));
    return out;
}

bool PauliString::commutes_with(const PauliString &o) const {
    const int anti = std::popcount(x_ & o.z_) + std::popcount(z_ & o.x_);
    return anti % 2 == 0;
}

PauliString PauliString::padded(int n_total) const {
    WS_REQUIRE(n_total >= n_, "cannot pad to fewer qubits");
    return PauliString(str() + std::string(n_total - n_, 'I'));
}

void PauliSum::add(double coeff, const PauliString &p) {
    if (terms_.empty() && n_ == 0) n_ = p.n();
    WS_REQUIRE(p.n() == n_, "pauli sum: term qubit count mismatch");
    WS_REQUIRE(std::isfinite(coeff), "pauli sum: non-finite coefficient");
    terms_.push_back({coeff, p});
}

double PauliSum::one_norm() const {
    double s = 0.0;
    for (const auto &t : terms_) s += std::abs(t.coeff);
    return s;
}

PauliSum PauliSum::padded(int n_total) const {
    PauliSum out(n_total);
    for (const auto &t : terms_) out.add(t.coeff, t.op.padded(n_total));
    return out;
}

PauliSum PauliSum::scaled(double s) const {
    PauliSum out(n_);
    for (const auto &t : terms_) out.add(t.coeff * s, t.op);
    return out;
}

PauliSum PauliSum::parse(std::string_view text) {
    PauliSum out;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string line(text.substr(0, nl));
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        // Accept the typographic minus sign as well as '-'.
        for (std::size_t pos; (pos = line.find("\xE2\x88\x92")) != std::string::npos;)
            line.replace(pos, 3, "-");
        auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        std::istringstream in{std::string(body)};
        std::string coeff_tok, axes_tok, extra;
        in >> coeff_tok >> axes_tok;
        if (axes_tok.empty() || (in >> extra))
            throw ValidationError("hamiltonian line " + std::to_string(line_no) +
                                  ": expected '<coeff> <axes>'");
        double c = 0.0;
        const char *first = coeff_tok.data();
        if (*first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, coeff_tok.data() + coeff_tok.size(), c);
        if (ec != std::errc() || ptr != coeff_tok.data() + coeff_tok.size())
            throw ValidationError("hamiltonian line " + std::to_string(line_no) +
                                  ": bad coefficient '" + coeff_tok + "'");
        try {
            out.add(c, PauliString(axes_tok));
        } catch (const ValidationError &e) {
            throw ValidationError("hamiltonian line " + std::to_string(line_no) + ": " +
                                  e.what());
        }
    }
    WS_REQUIRE(!out.empty(), "hamiltonian has no terms");
    return out;
}

std::string PauliSum::serialize() const {
    std::string out;
    char buf[64];
    for (const auto &t : terms_) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, t.coeff);
        out.append(buf, ptr);
        out.push_back(' ');
        out += t.op.str();
        out.push_back('\n');
    }
    return out;
}

bool PauliSum::operator==(const PauliSum &o) const {
    if (n_ != o.n_ || terms_.size() != o.terms_.size()) return false;
    for (std::size_t k = 0; k < terms_.size(); ++k)
        if (terms_[k].coeff != o.terms_[k].coeff || !(terms_[k].op == o.terms_[k].op))
            return false;
    return true;
}

void pauli_apply(const PauliString &p, const CVec &v, CVec &out) {
    check_dims(p, v);
    out.resize(v.size());
    const std::uint64_t x = p.x_mask(), z = p.z_mask();
    const cplx iy = i_pow(p.y_count());
    for (std::uint64_t b = 0; b < v.size(); ++b)
        out[b ^ x] = iy * parity_sign(b, z) * v[b];
}

CVec pauli_apply(const PauliString &p, const CVec &v) {
    CVec out;
    pauli_apply(p, v, out);
    return out;
}

void pauli_rotate(const PauliString &p, double angle, CVec &v) {
    check_dims(p, v);
    const double c = std::cos(angle), s = std::sin(angle);
    const std::uint64_t x = p.x_mask(), z = p.z_mask();
    const std::uint64_t dim = v.size();
    const std::uint64_t support = x | z;
    if (std::has_single_bit(support)) {
        // Single-qubit kernels on (a0, a1) pairs, on raw doubles.
        const std::uint64_t m = support;
        double *d = reinterpret_cast<double *>(v.data());
        auto pairs = [&](auto &&kern) {
            for (std::uint64_t hi = 0; hi < dim; hi += 2 * m)
                for (std::uint64_t b = hi; b < hi + m; ++b) kern(d + 2 * b, d + 2 * (b | m));
        };
        if (z == 0) {
            pairs([c, s](double *a0, double *a1) {
                const double r0 = a0[0], i0 = a0[1], r1 = a1[0], i1 = a1[1];
                a0[0] = c * r0 + s * i1;
                a0[1] = c * i0 - s * r1;
                a1[0] = c * r1 + s * i0;
                a1[1] = c * i1 - s * r0;
            });
        } else if (x == 0) {
            pairs([c, s](double *a0, double *a1) {
                const double r0 = a0[0], i0 = a0[1], r1 = a1[0], i1 = a1[1];
                a0[0] = c * r0 + s * i0;
                a0[1] = c * i0 - s * r0;
                a1[0] = c * r1 - s * i1;
                a1[1] = c * i1 + s * r1;
            });
        } else {
            pairs([c, s](double *a0, double *a1) {
                const double r0 = a0[0], i0 = a0[1], r1 = a1[0], i1 = a1[1];
                a0[0] = c * r0 - s * r1;
                a0[1] = c * i0 - s * i1;
                a1[0] = s * r0 + c * r1;
                a1[1] = s * i0 + c * i1;
            });
        }
        return;
    }
    if (x == 0) {
        const cplx plus(c, -s), minus(c, s);
        for (std::uint64_t b = 0; b < dim; ++b) v[b] *= parity_sign(b, z) > 0 ? plus : minus;
        return;
    }
    const cplx k = cplx(0.0, -s) * i_pow(p.y_count());
    const std::uint64_t hb = std::bit_floor(x);
    for (std::uint64_t hi = 0; hi < dim; hi += 2 * hb) {
        for (std::uint64_t b = hi; b < hi + hb; ++b) {
            const std::uint64_t cidx = b ^ x;
            const cplx vb = v[b], vc = v[cidx];
            v[b] = c * vb + parity_sign(cidx, z) * k * vc;
            v[cidx] = c * vc + parity_sign(b, z) * k * vb;
        }
    }
}

void pauli_sum_matvec(const PauliSum &h, const CVec &v, CVec &out) {
    WS_REQUIRE(v.size() == dim_of(h.n()), "matvec: dimension mismatch");
    out.assign(v.size(), cplx{});
    for (const auto &t : h.terms()) {
        const std::uint64_t x = t.op.x_mask(), z = t.op.z_mask();
        const cplx f = t.coeff * i_pow(t.op.y_count());
        for (std::uint64_t b = 0; b < v.size(); ++b)
            out[b ^ x] += f * parity_sign(b, z) * v[b];
    }
}

CVec pauli_sum_matvec(const PauliSum &h, const CVec &v) {
    CVec out;
    pauli_sum_matvec(h, v, out);
    return out;
}

cplx pauli_expectation(const PauliString &p, const CVec &u, const CVec &v) {
    check_dims(p, v);
    WS_REQUIRE(u.size() == v.size(), "expectation: dimension mismatch");
    const std::uint64_t x = p.x_mask(), z = p.z_mask();
    cplx acc{};
    for (std::uint64_t b = 0; b < v.size(); ++b)
        acc += std::conj(u[b ^ x]) * parity_sign(b, z) * v[b];
    return acc * i_pow(p.y_count());
}

std::pair<double, double> extremal_eigenvalues(const PauliSum &h) {
    WS_REQUIRE(!h.empty(), "spectrum of an empty operator");
    WS_REQUIRE(h.n() <= 12, "exact spectral bound refused above 12 qubits");
    const std::size_t dim = dim_of(h.n());
    std::mt19937_64 rng(0x5eed1a2c705ULL);
    std::normal_distribution<double> gauss;
    CVec q(dim);
    for (auto &a : q) a = {gauss(rng), gauss(rng)};
    auto norm = [](const CVec &a) {
        double s = 0.0;
        for (const auto &c : a) s += std::norm(c);
        return std::sqrt(s);
    };
    const double q0 = norm(q);
    for (auto &a : q) a /= q0;

    std::vector<CVec> basis{q};
    std::vector<double> alpha, beta;
    CVec w;
    const double scale = std::max(h.one_norm(), 1e-300);
    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        pauli_sum_matvec(h, basis[k], w);
        // Two passes of Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j <= k; ++j) {
                cplx ov{};
                for (std::size_t b = 0; b < dim; ++b) ov += std::conj(basis[j][b]) * w[b];
                if (pass == 0 && j == k) alpha.push_back(ov.real());
                for (std::size_t b = 0; b < dim; ++b) w[b] -= ov * basis[j][b];
            }
        }
        const double bk = norm(w);
        const int m = static_cast<int>(alpha.size());
        Eigen::VectorXd d(m), e(std::max(m - 1, 0));
        for (int i = 0; i < m; ++i) d(i) = alpha[i];
        for (int i = 0; i + 1 < m; ++i) e(i) = beta[i];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        lo = es.eigenvalues()(0);
        hi = es.eigenvalues()(m - 1);
        const double res_lo = bk * std::abs(es.eigenvectors()(m - 1, 0));
        const double res_hi = bk * std::abs(es.eigenvectors()(m - 1, m - 1));
        if (bk < 1e-13 * scale || (res_lo < 1e-13 * scale && res_hi < 1e-13 * scale))
            break;
        beta.push_back(bk);
        for (auto &a : w) a /= bk;
        basis.push_back(w);
    }
    return {lo, hi};
}

double spectral_bound(const PauliSum &h, SpectralMode mode) {
    if (mode == SpectralMode::triangle) return h.one_norm();
    auto [lo, hi] = extremal_eigenvalues(h);
    return std::max(std::abs(lo), std::abs(hi));
}

PauliSum chain_model(int n, Axis a, Axis b, double field, Axis field_axis) {
    WS_REQUIRE(n >= 2, "chain model needs at least two qubits");
    PauliSum h(n);
    for (int q = 1; q < n; ++q) {
        std::string s(n, 'I');
        s[q - 1] = axis_char(a);
        s[q] = axis_char(b);
        h.add(1.0, PauliString(s));
    }
    for (int q = 1; q <= n; ++q) h.add(field, PauliString::single(n, q, field_axis));
    return h;
}

} // namespace warmstart
