#include "warmstart/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "warmstart/errors.hpp"

namespace warmstart {

namespace {

void check_r(double r) { WS_REQUIRE(std::isfinite(r) && r >= 0.0, "r must be finite and >= 0"); }
void check_r0(double r0) { WS_REQUIRE(r0 > 0.0 && r0 < 1.0, "r0 must lie in (0, 1)"); }
void check_m(int m) { WS_REQUIRE(m >= 1, "M must be >= 1"); }
void check_lambda(double l) { WS_REQUIRE(std::isfinite(l) && l > 0.0, "lambda must be > 0"); }

Condition cond(std::string name, double margin) {
    return {std::move(name), margin >= 0.0, margin};
}

// Variance lower bound (4r^4/45)(1 - 4r^2/7)[(r0 factor) * overlap term]^2.
double variance_value(double r, double r0, R0Form form, double overlap_term) {
    const double r0f = form == R0Form::derived ? 1.0 - r0 * r0 : 1.0 - r0;
    const double o = std::max(0.0, overlap_term);
    const double x = r0f * o;
    return 4.0 * std::pow(r, 4) / 45.0 * (1.0 - 4.0 * r * r / 7.0) * x * x;
}

// r^2 <= 3 r0^2 * frac / (M - 1); no constraint for a single parameter.
Condition region(double r, double r0, int m, double frac) {
    if (m == 1) return cond("region", std::numeric_limits<double>::infinity());
    return cond("region", 3.0 * r0 * r0 * frac / (m - 1) - r * r);
}

} // namespace

double k_plus(double r) {
    check_r(r);
    if (r < 1e-4) return 1.0 - r * r / 3.0 + std::pow(r, 4) / 15.0;
    return 0.5 + std::sin(2.0 * r) / (4.0 * r);
}

double c_plus(double r) {
    check_r(r);
    if (r < 1e-4) return 1.0 - 2.0 * r * r / 3.0 + std::pow(r, 4) / 5.0;
    return 3.0 / 8.0 + std::sin(2.0 * r) / (4.0 * r) + std::sin(4.0 * r) / (32.0 * r);
}

double moment_gap(double r) {
    check_r(r);
    if (r < 1.0) {
        // The closed form cancels badly for small r. With x = 4r the numerator
        // is sum_{j>=3} (-1)^j (1 - j/2) x^{2j} / (2j)!.
        const double x2 = 16.0 * r * r;
        double term = x2 * x2 / 24.0; // x^4 / 4!
        double sum = 0.0;
        for (int j = 3; j < 40; ++j) {
            term *= x2 / ((2.0 * j - 1) * (2.0 * j));
            const double add = (j % 2 ? -1.0 : 1.0) * (1.0 - 0.5 * j) * term;
            sum += add;
            if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
        }
        return sum / (2.0 * x2);
    }
    return (-1.0 + 4.0 * r * r + std::cos(4.0 * r) + r * std::sin(4.0 * r)) / (32.0 * r * r);
}

double delta_theta_star(const LossContext &ctx) {
    const LossKind k = ctx.kind();
    WS_REQUIRE(k == LossKind::real_time || k == LossKind::imaginary_time ||
                   k == LossKind::unitary_bell || k == LossKind::unitary_hst,
               "delta_theta_star needs a pure-state loss");
    const int n = ctx.ansatz().n();
    const bool wide = k == LossKind::unitary_bell || k == LossKind::unitary_hst;
    const Ansatz a = wide ? ctx.ansatz().padded(2 * n) : ctx.ansatz();
    CVec psi0 = wide ? bell_pair_state(n).amplitudes() : ctx.psi0().amplitudes();
    CVec phi;
    if (k == LossKind::unitary_hst) {
        LossContext bell(ctx.ansatz(), ctx.theta_star(), ctx.hamiltonian(), ctx.dt(), ctx.psi0(),
                         LossKind::unitary_bell);
        phi = bell.target_state();
    } else {
        phi = ctx.target_state();
    }
    a.apply_adjoint(ctx.theta_star(), phi);
    // Fixed gates ahead of the first rotation act on both sides before s1.
    for (int g = 0; g < a.rotation_gates().front(); ++g) {
        a.apply_gate(a.gates()[g], 0.0, psi0);
        a.apply_gate(a.gates()[g], 0.0, phi);
    }
    const PauliString &s1 = a.first_generator();
    const double a0 = std::norm(inner(psi0, phi));
    const double a1 = std::norm(pauli_expectation(s1, psi0, phi));
    return a0 - a1;
}

double prop1_bound(double r, int m, double delta) {
    check_r(r);
    check_m(m);
    WS_REQUIRE(delta >= -1.0 - 1e-12 && delta <= 1.0 + 1e-12, "Delta must lie in [-1, 1]");
    if (r == 0.0) return 0.0;
    const double gap = moment_gap(r);
    const double km = std::pow(k_plus(r), m - 1);
    if (m == 1 || km >= 1.0) return gap * delta * delta;
    const double stationary = -km * delta / (1.0 - km);
    if (std::abs(stationary) <= 1.0) return 0.0;
    const double x = std::clamp(stationary, -1.0, 1.0);
    const double v = km * delta + (1.0 - km) * x;
    return gap * v * v;
}

BoundReport thm5_bound(double r, double r0, int m, double lambda, double dt, R0Form form) {
    check_r(r);
    check_r0(r0);
    check_m(m);
    check_lambda(lambda);
    WS_REQUIRE(std::isfinite(dt) && dt >= 0.0, "dt must be finite and >= 0");
    BoundReport rep;
    rep.name = "variance_lower_bound";
    const double l2t2 = lambda * lambda * dt * dt;
    rep.conditions.push_back(cond("dt_limit", 1.0 / (2.0 * lambda) - dt));
    const double frac = (1.0 - 4.0 * l2t2) / (2.0 * (1.0 - 2.0 * l2t2));
    rep.conditions.push_back(region(r, r0, m, frac));
    rep.valid = rep.conditions[0].satisfied && rep.conditions[1].satisfied;
    rep.value = variance_value(r, r0, form, 1.0 - 4.0 * l2t2);
    return rep;
}

BoundReport thm4_bound(double r, double r0, int m, double f_target, R0Form form) {
    check_r(r);
    check_r0(r0);
    check_m(m);
    WS_REQUIRE(f_target >= 0.0 && f_target <= 1.0 + 1e-12, "target fidelity must lie in [0, 1]");
    BoundReport rep;
    rep.name = "fidelity_target_variance_bound";
    rep.conditions.push_back(cond("overlap_at_least_half", f_target - 0.5));
    if (f_target < 0.5) {
        rep.conditions.push_back({"region", false, 0.0});
        rep.valid = false;
        rep.value = 0.0;
        return rep;
    }
    const double frac = form == R0Form::derived ? (2.0 * f_target - 1.0) / (2.0 * f_target)
                                                : (1.0 + 2.0 * f_target) / (2.0 * f_target);
    rep.conditions.push_back(region(r, r0, m, frac));
    rep.valid = rep.conditions[0].satisfied && rep.conditions[1].satisfied;
    rep.value = variance_value(r, r0, form, 2.0 * f_target - 1.0);
    return rep;
}

BoundReport convexity_radius(double mu_min, double eps, int m, double lambda, double dt) {
    check_m(m);
    check_lambda(lambda);
    WS_REQUIRE(std::isfinite(mu_min) && std::isfinite(eps), "mu_min and eps must be finite");
    WS_REQUIRE(std::isfinite(dt) && dt >= 0.0, "dt must be finite and >= 0");
    BoundReport rep;
    rep.name = "convexity_radius";
    const double curv = std::max(0.0, mu_min) + 2.0 * std::abs(eps);
    rep.conditions.push_back(cond("dt_limit", curv / (16.0 * m * lambda) - dt));
    rep.valid = rep.conditions[0].satisfied;
    rep.value = std::max(0.0, (curv / (16.0 * m) - lambda * dt) / m);
    return rep;
}

IteBounds ite_bounds(double r, double r0, int m, double lambda, double dtau, double mu_min,
                     double eps, double beta_a, double eta0) {
    check_r(r);
    check_r0(r0);
    check_m(m);
    check_lambda(lambda);
    WS_REQUIRE(std::isfinite(dtau) && dtau >= 0.0, "dtau must be finite and >= 0");
    WS_REQUIRE(eta0 > 0.0, "eta0 must be > 0");
    IteBounds out;
    const double l2t2 = lambda * lambda * dtau * dtau;

    BoundReport &var = out.variance;
    var.name = "ite_variance_lower_bound";
    var.conditions.push_back(cond("dtau_limit", 1.0 / (std::sqrt(24.0) * lambda) - dtau));
    const double frac = (1.0 - 24.0 * l2t2) / (2.0 * (1.0 - 12.0 * l2t2));
    var.conditions.push_back(region(r, r0, m, frac));
    var.valid = var.conditions[0].satisfied && var.conditions[1].satisfied;
    var.value = variance_value(r, r0, R0Form::derived, 1.0 - 24.0 * l2t2);

    const double curv = std::max(0.0, mu_min) + 2.0 * std::abs(eps);
    BoundReport &cvx = out.convexity;
    cvx.name = "ite_convexity_radius";
    cvx.conditions.push_back(cond("dtau_limit", curv / (48.0 * m * lambda) - dtau));
    cvx.valid = cvx.conditions[0].satisfied;
    cvx.value = std::max(0.0, (curv / (16.0 * m) - 3.0 * lambda * dtau) / m);

    BoundReport &adi = out.adiabatic;
    adi.name = "ite_adiabatic_dtau_limits";
    if (!(beta_a > 0.0)) {
        adi.conditions.push_back({"beta_positive", false, beta_a});
        adi.valid = false;
        adi.value = 0.0;
        return out;
    }
    const double m15 = std::pow(static_cast<double>(m), 1.5);
    const double grad_lim = eta0 * beta_a / (4.0 * m * lambda);
    const double cvx_lim =
        beta_a * curv / (64.0 * std::pow(static_cast<double>(m), 2.5) * lambda *
                         (1.0 + 3.0 * beta_a / (4.0 * m15)));
    adi.conditions.push_back(cond("gradient_region", grad_lim - dtau));
    adi.conditions.push_back(cond("convex_region", cvx_lim - dtau));
    adi.valid = adi.conditions[0].satisfied && adi.conditions[1].satisfied;
    adi.value = std::min(grad_lim, cvx_lim);
    return out;
}

ShiftBound adiabatic_shift_bound(int m, double lambda, double dt, double beta_a,
                                 EvolutionKind kind) {
    check_m(m);
    check_lambda(lambda);
    WS_REQUIRE(std::isfinite(dt) && dt >= 0.0, "dt must be finite and >= 0");
    if (!(beta_a > 0.0)) return {0.0, true};
    const double pre = kind == EvolutionKind::real_time ? 2.0 : 4.0;
    return {pre * std::sqrt(static_cast<double>(m)) * lambda * dt / beta_a, false};
}

DtLimits adiabatic_dt_limits(int m, double lambda, double beta_a, double eta0, double mu_min,
                             double eps) {
    check_m(m);
    check_lambda(lambda);
    WS_REQUIRE(beta_a > 0.0, "beta_A must be > 0");
    WS_REQUIRE(eta0 > 0.0, "eta0 must be > 0");
    const double md = static_cast<double>(m);
    const double curv = std::max(0.0, mu_min) + 2.0 * std::abs(eps);
    DtLimits out;
    out.dt_grad = eta0 * beta_a / (2.0 * md * lambda);
    out.dt_convex = beta_a * curv /
                    (32.0 * lambda * std::pow(md, 2.5) * (1.0 + beta_a / (2.0 * std::pow(md, 1.5))));
    return out;
}

double gershgorin_row_bound(const Eigen::MatrixXd &a) {
    WS_REQUIRE(a.rows() == a.cols() && a.rows() > 0, "Gershgorin bound needs a square matrix");
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

std::string to_text(const BoundReport &r) {
    std::ostringstream os;
    os.precision(12);
    os << "bound      " << r.name << '\n';
    os << "value      " << r.value << '\n';
    os << "valid      " << (r.valid ? "true" : "false") << '\n';
    for (const auto &c : r.conditions)
        os << "condition  " << c.name << "  " << (c.satisfied ? "ok" : "violated")
           << "  margin=" << c.margin << '\n';
    return os.str();
}

} // namespace warmstart
