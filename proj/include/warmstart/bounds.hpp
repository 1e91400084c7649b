#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "warmstart/loss.hpp"

namespace warmstart {

struct Condition {
    std::string name;
    bool satisfied = false;
    double margin = 0.0; // >= 0 when satisfied
};

struct BoundReport {
    std::string name;
    double value = 0.0;
    bool valid = false;
    std::vector<Condition> conditions;
};

inline constexpr double kDefaultR0 = 0.5;
inline constexpr double kDefaultEta0 = 0.5;

// Moments of cos^2 and cos^4 for alpha uniform on [-r, r]; both 1 at r = 0.
double k_plus(double r);
double c_plus(double r);
// c_plus - k_plus^2 = (-1 + 4r^2 + cos 4r + r sin 4r) / (32 r^2), evaluated by
// its Taylor series for small r to avoid cancellation.
double moment_gap(double r);

// Tr[(rho0 - s1 rho0 s1) U^+(theta*) rho_target U(theta*)] for the single-state
// loss kinds (unitary_bell uses the Bell input on 2n qubits).
double delta_theta_star(const LossContext &ctx);

// (c+ - k+^2) min_{x in [-1,1]} (k+^{M-1} D + (1 - k+^{M-1}) x)^2.
double prop1_bound(double r, int m, double delta);

// Which form of the r0 factor to use: the one the proofs derive (1 - r0^2) or
// the shorter (1 - r0) that appears in the stated bounds.
enum class R0Form { derived, published };

BoundReport thm5_bound(double r, double r0, int m, double lambda, double dt,
                       R0Form form = R0Form::derived);

// General fidelity-type target with overlap F = |<psi(theta*)|target>|^2.
// The derived region is r^2 <= 3 r0^2 (2F - 1) / (2F (M - 1)); the published
// variant uses (1 + 2F) in place of (2F - 1).
BoundReport thm4_bound(double r, double r0, int m, double f_target,
                       R0Form form = R0Form::derived);

BoundReport convexity_radius(double mu_min, double eps, int m, double lambda, double dt);

struct IteBounds {
    BoundReport variance;
    BoundReport convexity;
    BoundReport adiabatic; // value = min of the two time-step limits
};

IteBounds ite_bounds(double r, double r0, int m, double lambda, double dtau, double mu_min,
                     double eps, double beta_a, double eta0 = kDefaultEta0);

enum class EvolutionKind { real_time, imaginary_time };

struct ShiftBound {
    double value = 0.0;
    bool unbounded = false; // beta_A <= 0
};

// 2 sqrt(M) lambda dt / beta_A (real time) or 4 sqrt(M) lambda dtau / beta_A.
ShiftBound adiabatic_shift_bound(int m, double lambda, double dt, double beta_a,
                                 EvolutionKind kind = EvolutionKind::real_time);

struct DtLimits {
    double dt_grad = 0.0;
    double dt_convex = 0.0;
};

DtLimits adiabatic_dt_limits(int m, double lambda, double beta_a, double eta0, double mu_min,
                             double eps);

// max_i sum_j |A_ij|, an upper bound on the spectral radius.
double gershgorin_row_bound(const Eigen::MatrixXd &a);

std::string to_text(const BoundReport &r);

} // namespace warmstart
