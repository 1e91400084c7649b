#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "warmstart/pauli.hpp"
#include "warmstart/state.hpp"

namespace warmstart {

using Params = std::vector<double>;

struct Gate {
    enum class Kind { rotation, fixed_rotation, cz };
    Kind kind = Kind::rotation;
    PauliString gen;   // rotation and fixed_rotation
    int param = -1;    // rotation: index into the parameter vector
    double sign = 1.0; // rotation: applied as exp(-i sign theta[param] gen)
    double angle = 0;  // fixed_rotation
    int q1 = 0, q2 = 0;
};

// Ordered gate list; gates[0] acts first on the input state.
class Ansatz {
  public:
    Ansatz() = default;
    explicit Ansatz(int n);

    void add_rotation(const PauliString &gen, int param, double sign = 1.0);
    void add_fixed_rotation(const PauliString &gen, double angle);
    void add_cz(int q1, int q2);

    int n() const { return n_; }
    int num_params() const { return num_params_; }
    int num_rotations() const { return static_cast<int>(rotation_gates_.size()); }
    const std::vector<Gate> &gates() const { return gates_; }
    // Indices into gates() of the rotation gates, in application order.
    const std::vector<int> &rotation_gates() const { return rotation_gates_; }
    const Gate &rotation(int k) const { return gates_[rotation_gates_[k]]; }
    const PauliString &first_generator() const;

    // Per-rotation angles sign * theta[param].
    std::vector<double> gate_angles(const Params &theta) const;

    // Applies one gate; angle is used only by rotation gates.
    void apply_gate(const Gate &g, double angle, CVec &v) const;
    void apply_angles(const std::vector<double> &angles, CVec &v) const;
    void apply_adjoint_angles(const std::vector<double> &angles, CVec &v) const;
    void apply(const Params &theta, CVec &v) const;
    void apply_adjoint(const Params &theta, CVec &v) const;
    StateVector apply(const Params &theta, const StateVector &v) const;

    // The same circuit acting on the first n() qubits of n_total qubits.
    Ansatz padded(int n_total) const;

    // "ROT <param> <axes>" (axes may carry a leading '-'), "FIXED CZ <q1> <q2>",
    // "FIXED EXP <angle> <axes>". Header line "QUBITS <n>". '#' comments.
    std::string serialize() const;
    static Ansatz parse(std::string_view text);

    bool operator==(const Ansatz &o) const;

  private:
    void apply_fixed(const Gate &g, CVec &v, bool adjoint) const;

    int n_ = 0;
    int num_params_ = 0;
    std::vector<Gate> gates_;
    std::vector<int> rotation_gates_;
};

// Per layer: RY then RZ on every qubit, then CZ on (q, q+1). M = 2 n layers.
// With shuffle_seed != 0 each layer's (Y, Z) axis order per qubit is randomly
// swapped except for the very first gate, which stays Y1.
Ansatz build_hea(int n, int layers, std::uint64_t shuffle_seed = 0);

// One shared parameter per Pauli-axis pattern group per layer; each term k of
// the group is applied as exp(-i theta sign(a_k) P_k).
Ansatz build_hva(const PauliSum &h, int layers);

// |<psi0'|s1|psi0'>|^2 with s1 the first rotation generator and psi0' the
// input after any fixed gates preceding it.
double first_gate_orthogonality(const Ansatz &a, const StateVector &psi0);

} // namespace warmstart
