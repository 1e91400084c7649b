#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "warmstart/circuit.hpp"
#include "warmstart/pauli.hpp"
#include "warmstart/state.hpp"

namespace warmstart {

enum class LossKind { real_time, imaginary_time, unitary_hst, unitary_bell, qml };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string &s);

// Products of single-qubit stabilizer states. factors[j][q-1] in 0..5 indexes
// |0>, |1>, |+>, |->, |y+>, |y->.
struct StabilizerDataset {
    int n = 0;
    std::vector<std::vector<int>> factors;
    std::vector<StateVector> states;
};

StateVector stabilizer_product(int n, const std::vector<int> &factors);

// Each factor uniform over the six states. With orthogonal = true, draws are
// rejected until the states are pairwise orthogonal (requires N_s <= 2^n).
StabilizerDataset sample_stabilizer_dataset(int n, int n_s, std::uint64_t seed,
                                            bool orthogonal = false);

// Fidelity-type loss around a previous optimum theta*.
class LossContext {
  public:
    LossContext(Ansatz ansatz, Params theta_star, PauliSum h, double dt, StateVector psi0,
                LossKind kind = LossKind::real_time, StabilizerDataset dataset = {});

    double loss(const Params &theta) const;
    // Loss as a function of the per-rotation gate angles.
    double loss_at_angles(const std::vector<double> &angles) const;

    void set_dt(double dt);
    void set_theta_star(const Params &theta_star);

    const Ansatz &ansatz() const { return ansatz_; }
    const Params &theta_star() const { return theta_star_; }
    const PauliSum &hamiltonian() const { return h_; }
    double dt() const { return dt_; }
    const StateVector &psi0() const { return psi0_; }
    LossKind kind() const { return kind_; }
    const StabilizerDataset &dataset() const { return dataset_; }
    int num_params() const { return ansatz_.num_params(); }

    // Target for the single-state kinds: e^{-iH dt} U(theta*) psi0 (or the
    // normalized imaginary-time version), on 2n qubits for unitary_bell.
    const CVec &target_state() const;

  private:
    void rebuild();

    Ansatz ansatz_;
    Ansatz run_ansatz_; // padded to 2n qubits for unitary_bell
    Params theta_star_;
    PauliSum h_;
    double dt_;
    StateVector psi0_;
    LossKind kind_;
    StabilizerDataset dataset_;
    std::vector<CVec> inputs_;
    std::vector<CVec> targets_;
};

// Parameter-shift gradient: per gate, L(a + pi/4) - L(a - pi/4), weighted by
// the gate sign and summed over gates sharing a parameter.
std::vector<double> gradient(const LossContext &ctx, const Params &theta);

// Central finite differences, for validation.
std::vector<double> gradient_fd(const LossContext &ctx, const Params &theta, double h = 1e-5);

// Double parameter shift on gate pairs, pi/2 second difference on the diagonal.
Eigen::MatrixXd hessian(const LossContext &ctx, const Params &theta);

// Pure-state quantum Fisher information by generator insertion.
Eigen::MatrixXd qfi(const Ansatz &a, const Params &theta, const StateVector &psi0);

double min_eigenvalue(const Eigen::MatrixXd &sym);
double mu_min(const Ansatz &a, const Params &theta_star, const StateVector &psi0);

// 1 - N_s Tr[U~ rho0 U~^+ W~ rho0 W~^+] on 2n qubits with
// rho0 = (1/N_s) sum_j |psi_j><psi_j| (x) |psi_j><psi_j|, U~ = U(theta) (x) 1 and
// W~ = (e^{-iH dt} U(theta*)) (x) 1. Equals the qml loss when the dataset is
// pairwise orthogonal.
double qml_loss_composite(const LossContext &ctx, const Params &theta);

// Tr[rho0 s rho0 s] on 2n qubits for s = sigma (x) 1 and rho0 as above.
double composite_first_gate_overlap(const StabilizerDataset &ds, const PauliString &sigma);

// (1/N_s^2) sum_j |<psi_j|sigma|psi_j>|^2: the value of the previous quantity
// for an orthogonal dataset.
double dataset_first_gate_overlap(const StabilizerDataset &ds, const PauliString &sigma);

struct OverlapProbability {
    double diagonal = 0.0;    // fraction of draws where the previous quantity is 0
    double exact_trace = 0.0; // fraction where composite_first_gate_overlap is 0
};

// Each draw samples a dataset of n_s product stabilizer states and a global
// Pauli string (X, Y or Z on every qubit, uniformly). Zero means below 1e-12.
OverlapProbability first_gate_overlap_probability(int n, int n_s, int draws, std::uint64_t seed);

} // namespace warmstart
