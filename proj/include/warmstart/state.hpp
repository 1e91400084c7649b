#pragma once

#include <cstdint>
#include <ostream>
#include <random>

#include "warmstart/pauli.hpp"

namespace warmstart {

// Normalized statevector on n qubits, qubit 1 = most significant index bit.
class StateVector {
  public:
    StateVector() = default;
    // |0...0>
    explicit StateVector(int n);
    // Normalizes the given amplitudes; throws on zero norm.
    StateVector(int n, CVec amplitudes);

    static StateVector basis(int n, std::uint64_t index);
    static StateVector random(int n, std::mt19937_64 &rng);

    int n() const { return n_; }
    std::size_t dim() const { return amp_.size(); }
    const CVec &amplitudes() const { return amp_; }
    const cplx &operator[](std::size_t i) const { return amp_[i]; }

    double norm() const;

    // Dump as CSV rows: basis_index,re,im.
    void write_csv(std::ostream &os) const;

  private:
    int n_ = 0;
    CVec amp_;
};

double norm2(const CVec &v);
cplx inner(const CVec &u, const CVec &v);
void normalize(CVec &v);

// exp(-i H t) v via scaled Taylor series on matvecs.
CVec evolve_real(const CVec &v, const PauliSum &h, double t);
StateVector evolve_real(const StateVector &v, const PauliSum &h, double t);

// exp(-tau H) v / ||exp(-tau H) v||.
CVec evolve_imaginary(const CVec &v, const PauliSum &h, double tau);
StateVector evolve_imaginary(const StateVector &v, const PauliSum &h, double tau);

// |<u|v>|^2
double fidelity(const StateVector &u, const StateVector &v);
double fidelity(const CVec &u, const CVec &v);

// Tensor product of n Bell pairs on 2n qubits ordered A1..An B1..Bn,
// with Aj paired to Bj.
StateVector bell_pair_state(int n);

// Kronecker product |a> (x) |b> with a on the high bits.
StateVector tensor(const StateVector &a, const StateVector &b);

} // namespace warmstart
