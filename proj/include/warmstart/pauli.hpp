#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace warmstart {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Maximum qubit count supported by the 64-bit masks and by dense guards.
inline constexpr int kMaxQubits = 30;

enum class Axis : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char axis_char(Axis a);

// A tensor product of single-qubit Paulis without global phase.
// Qubit 1 is the most significant bit of a basis index.
class PauliString {
  public:
    PauliString() = default;
    explicit PauliString(std::string_view axes);

    static PauliString single(int n, int qubit, Axis a);
    static PauliString identity(int n);

    int n() const { return n_; }
    Axis axis(int qubit) const;
    std::uint64_t x_mask() const { return x_; }
    std::uint64_t z_mask() const { return z_; }
    int y_count() const { return ny_; }
    bool is_identity() const { return x_ == 0 && z_ == 0; }

    // Non-identity letters in qubit order, e.g. "XZ" for X1 Z2 or X3 Z4.
    std::string pattern() const;
    std::string str() const;

    bool commutes_with(const PauliString &other) const;

    // The same string acting on the first n() qubits of a larger register.
    PauliString padded(int n_total) const;

    bool operator==(const PauliString &o) const {
        return n_ == o.n_ && x_ == o.x_ && z_ == o.z_;
    }

  private:
    int n_ = 0;
    std::uint64_t x_ = 0;
    std::uint64_t z_ = 0;
    int ny_ = 0;
};

struct PauliTerm {
    double coeff;
    PauliString op;
};

// Real-weighted sum of Pauli strings, hence Hermitian.
class PauliSum {
  public:
    PauliSum() = default;
    explicit PauliSum(int n) : n_(n) {}

    void add(double coeff, const PauliString &p);
    void add(double coeff, std::string_view axes) { add(coeff, PauliString(axes)); }

    int n() const { return n_; }
    const std::vector<PauliTerm> &terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    double one_norm() const;

    PauliSum padded(int n_total) const;
    PauliSum scaled(double s) const;

    // One term per line: "<coeff> <axes>". Lines starting with '#' are comments.
    static PauliSum parse(std::string_view text);
    std::string serialize() const;

    bool operator==(const PauliSum &o) const;

  private:
    int n_ = 0;
    std::vector<PauliTerm> terms_;
};

// out = P v. Sizes must match 2^n.
void pauli_apply(const PauliString &p, const CVec &v, CVec &out);
CVec pauli_apply(const PauliString &p, const CVec &v);

// v <- exp(-i angle P) v = cos(angle) v - i sin(angle) P v, in place.
void pauli_rotate(const PauliString &p, double angle, CVec &v);

// out = sum_k a_k P_k v (unnormalized).
void pauli_sum_matvec(const PauliSum &h, const CVec &v, CVec &out);
CVec pauli_sum_matvec(const PauliSum &h, const CVec &v);

// <u|P|v>
cplx pauli_expectation(const PauliString &p, const CVec &u, const CVec &v);

enum class SpectralMode { exact, triangle };

// Spectral norm max|eig(H)| (exact, n <= 12) or the sum of |coefficients|.
double spectral_bound(const PauliSum &h, SpectralMode mode = SpectralMode::exact);

// Extremal eigenvalues (min, max) of H by Lanczos with full reorthogonalization.
std::pair<double, double> extremal_eigenvalues(const PauliSum &h);

// Common model families.
PauliSum chain_model(int n, Axis a, Axis b, double field, Axis field_axis);

} // namespace warmstart
