#include "warmstart/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "warmstart/errors.hpp"
#include "warmstart/util.hpp"

namespace warmstart {

namespace {

constexpr double kShift = std::numbers::pi / 4.0;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

const cplx kStab[6][2] = {
    {{1.0, 0.0}, {0.0, 0.0}},
    {{0.0, 0.0}, {1.0, 0.0}},
    {{std::numbers::sqrt2 / 2, 0.0}, {std::numbers::sqrt2 / 2, 0.0}},
    {{std::numbers::sqrt2 / 2, 0.0}, {-std::numbers::sqrt2 / 2, 0.0}},
    {{std::numbers::sqrt2 / 2, 0.0}, {0.0, std::numbers::sqrt2 / 2}},
    {{std::numbers::sqrt2 / 2, 0.0}, {0.0, -std::numbers::sqrt2 / 2}},
};

// Product stabilizer states are orthogonal iff some qubit carries an antipodal pair.
bool stabilizer_orthogonal(const std::vector<int> &a, const std::vector<int> &b) {
    for (std::size_t q = 0; q < a.size(); ++q)
        if (a[q] / 2 == b[q] / 2 && a[q] != b[q]) return true;
    return false;
}

CVec doubled(const StateVector &s) { return tensor(s, s).amplitudes(); }

// 1 - |<u|v>|^2 / (|u|^2 |v|^2) as |v_perp|^2 / |v|^2, which keeps relative
// accuracy when u and v nearly coincide.
double infidelity(const CVec &u, const CVec &v) {
    const double uu = norm2(u);
    const cplx c = inner(u, v) / uu;
    double perp = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) perp += std::norm(v[i] - c * u[i]);
    return perp / norm2(v);
}

} // namespace

std::string to_string(LossKind k) {
    switch (k) {
    case LossKind::real_time: return "real_time";
    case LossKind::imaginary_time: return "imaginary_time";
    case LossKind::unitary_hst: return "unitary_hst";
    case LossKind::unitary_bell: return "unitary_bell";
    case LossKind::qml: return "qml";
    }
    return "?";
}

LossKind loss_kind_from_string(const std::string &s) {
    for (LossKind k : {LossKind::real_time, LossKind::imaginary_time, LossKind::unitary_hst,
                       LossKind::unitary_bell, LossKind::qml})
        if (to_string(k) == s) return k;
    throw ValidationError("unknown loss kind '" + s + "'");
}

StateVector stabilizer_product(int n, const std::vector<int> &factors) {
    WS_REQUIRE(static_cast<int>(factors.size()) == n, "stabilizer factor count mismatch");
    CVec amp(std::size_t{1} << n, cplx{1.0, 0.0});
    for (std::size_t b = 0; b < amp.size(); ++b)
        for (int q = 1; q <= n; ++q) {
            const int f = factors[q - 1];
            WS_REQUIRE(f >= 0 && f < 6, "stabilizer factor out of range");
            amp[b] *= kStab[f][(b >> (n - q)) & 1];
        }
    return StateVector(n, std::move(amp));
}

StabilizerDataset sample_stabilizer_dataset(int n, int n_s, std::uint64_t seed, bool orthogonal) {
    WS_REQUIRE(n >= 1 && n <= kMaxQubits, "dataset qubit count out of range");
    WS_REQUIRE(n_s >= 1, "dataset needs at least one state");
    WS_REQUIRE(!orthogonal || n >= 30 || n_s <= (1 << n),
               "more orthogonal states requested than the dimension allows");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, 5);
    auto draw = [&] {
        std::vector<int> f(n);
        for (auto &x : f) x = pick(rng);
        return f;
    };
    StabilizerDataset ds;
    ds.n = n;
    for (int restart = 0; restart < 10000; ++restart) {
        ds.factors.clear();
        bool stuck = false;
        while (static_cast<int>(ds.factors.size()) < n_s && !stuck) {
            int attempts = 0;
            for (;;) {
                auto f = draw();
                bool ok = true;
                if (orthogonal)
                    for (const auto &g : ds.factors) ok = ok && stabilizer_orthogonal(f, g);
                if (ok) {
                    ds.factors.push_back(std::move(f));
                    break;
                }
                if (++attempts > 2000) {
                    stuck = true;
                    break;
                }
            }
        }
        if (!stuck) break;
    }
    WS_REQUIRE(static_cast<int>(ds.factors.size()) == n_s,
               "could not draw an orthogonal stabilizer dataset");
    for (const auto &f : ds.factors) ds.states.push_back(stabilizer_product(n, f));
    return ds;
}

LossContext::LossContext(Ansatz ansatz, Params theta_star, PauliSum h, double dt,
                         StateVector psi0, LossKind kind, StabilizerDataset dataset)
    : ansatz_(std::move(ansatz)), theta_star_(std::move(theta_star)), h_(std::move(h)),
      dt_(dt), psi0_(std::move(psi0)), kind_(kind), dataset_(std::move(dataset)) {
    const int n = ansatz_.n();
    WS_REQUIRE(h_.n() == n || h_.empty(), "Hamiltonian qubit count does not match ansatz");
    if (h_.empty()) h_ = PauliSum(n);
    WS_REQUIRE(psi0_.n() == n, "initial state qubit count does not match ansatz");
    WS_REQUIRE(std::isfinite(dt_), "time step must be finite");
    if (kind_ == LossKind::unitary_hst) WS_REQUIRE(n <= 6, "unitary_hst limited to n <= 6");
    if (kind_ == LossKind::unitary_bell) WS_REQUIRE(2 * n <= 12, "unitary_bell limited to 2n <= 12");
    if (kind_ == LossKind::qml) {
        WS_REQUIRE(!dataset_.states.empty(), "qml loss needs a non-empty dataset");
        WS_REQUIRE(dataset_.n == n, "dataset qubit count does not match ansatz");
    }
    run_ansatz_ = kind_ == LossKind::unitary_bell ? ansatz_.padded(2 * n) : ansatz_;
    rebuild();
}

void LossContext::set_dt(double dt) {
    WS_REQUIRE(std::isfinite(dt), "time step must be finite");
    dt_ = dt;
    rebuild();
}

void LossContext::set_theta_star(const Params &theta_star) {
    theta_star_ = theta_star;
    rebuild();
}

void LossContext::rebuild() {
    const int n = ansatz_.n();
    WS_REQUIRE(static_cast<int>(theta_star_.size()) == ansatz_.num_params(),
               "theta* length does not match ansatz");
    inputs_.clear();
    targets_.clear();
    switch (kind_) {
    case LossKind::real_time:
    case LossKind::imaginary_time: inputs_.push_back(psi0_.amplitudes()); break;
    case LossKind::unitary_hst:
        for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c)
            inputs_.push_back(StateVector::basis(n, c).amplitudes());
        break;
    case LossKind::unitary_bell: inputs_.push_back(bell_pair_state(n).amplitudes()); break;
    case LossKind::qml:
        for (const auto &s : dataset_.states) inputs_.push_back(s.amplitudes());
        break;
    }
    const PauliSum hrun = kind_ == LossKind::unitary_bell ? h_.padded(2 * n) : h_;
    for (const CVec &in : inputs_) {
        CVec v = in;
        run_ansatz_.apply(theta_star_, v);
        if (kind_ == LossKind::imaginary_time)
            targets_.push_back(evolve_imaginary(v, hrun, dt_));
        else
            targets_.push_back(evolve_real(v, hrun, dt_));
    }
}

const CVec &LossContext::target_state() const {
    WS_REQUIRE(kind_ == LossKind::real_time || kind_ == LossKind::imaginary_time ||
                   kind_ == LossKind::unitary_bell,
               "target_state is defined for single-state loss kinds");
    return targets_.front();
}

double LossContext::loss_at_angles(const std::vector<double> &angles) const {
    CVec v;
    if (kind_ == LossKind::unitary_hst) {
        cplx tr{};
        for (std::size_t c = 0; c < inputs_.size(); ++c) {
            v = inputs_[c];
            run_ansatz_.apply_angles(angles, v);
            tr += inner(v, targets_[c]);
        }
        const double d = static_cast<double>(inputs_.size());
        return clamp01(1.0 - std::norm(tr) / (d * d));
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < inputs_.size(); ++j) {
        v = inputs_[j];
        run_ansatz_.apply_angles(angles, v);
        acc += infidelity(v, targets_[j]);
    }
    return clamp01(acc / static_cast<double>(inputs_.size()));
}

double LossContext::loss(const Params &theta) const {
    return loss_at_angles(ansatz_.gate_angles(theta));
}

std::vector<double> gradient(const LossContext &ctx, const Params &theta) {
    const Ansatz &a = ctx.ansatz();
    const std::vector<double> base = a.gate_angles(theta);
    const int g = a.num_rotations();
    std::vector<double> diff(g);
    parallel_for(g, [&](std::size_t k) {
        std::vector<double> ang = base;
        ang[k] = base[k] + kShift;
        const double lp = ctx.loss_at_angles(ang);
        ang[k] = base[k] - kShift;
        const double lm = ctx.loss_at_angles(ang);
        diff[k] = lp - lm;
    });
    std::vector<double> grad(a.num_params(), 0.0);
    for (int k = 0; k < g; ++k) grad[a.rotation(k).param] += a.rotation(k).sign * diff[k];
    return grad;
}

std::vector<double> gradient_fd(const LossContext &ctx, const Params &theta, double h) {
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        Params tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        grad[i] = (ctx.loss(tp) - ctx.loss(tm)) / (2.0 * h);
    }
    return grad;
}

Eigen::MatrixXd hessian(const LossContext &ctx, const Params &theta) {
    const Ansatz &a = ctx.ansatz();
    const std::vector<double> base = a.gate_angles(theta);
    const int g = a.num_rotations();
    const double l0 = ctx.loss_at_angles(base);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(g) * (g + 1) / 2);
    for (int k = 0; k < g; ++k)
        for (int l = k; l < g; ++l) pairs.emplace_back(k, l);
    std::vector<double> d(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t idx) {
        const auto [k, l] = pairs[idx];
        std::vector<double> ang = base;
        if (k == l) {
            ang[k] = base[k] + 2 * kShift;
            const double lp = ctx.loss_at_angles(ang);
            ang[k] = base[k] - 2 * kShift;
            const double lm = ctx.loss_at_angles(ang);
            d[idx] = lp - 2.0 * l0 + lm;
            return;
        }
        double acc = 0.0;
        for (int sk : {1, -1})
            for (int sl : {1, -1}) {
                ang[k] = base[k] + sk * kShift;
                ang[l] = base[l] + sl * kShift;
                acc += sk * sl * ctx.loss_at_angles(ang);
            }
        d[idx] = acc;
    });
    const int m = a.num_params();
    Eigen::MatrixXd hm = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        const auto [k, l] = pairs[idx];
        const Gate &gk = a.rotation(k), &gl = a.rotation(l);
        const double w = gk.sign * gl.sign * d[idx];
        hm(gk.param, gl.param) += w;
        if (k != l) hm(gl.param, gk.param) += w;
    }
    // Exact symmetry regardless of accumulation order.
    return 0.5 * (hm + hm.transpose());
}

Eigen::MatrixXd qfi(const Ansatz &a, const Params &theta, const StateVector &psi0) {
    WS_REQUIRE(a.n() == psi0.n(), "qfi: qubit count mismatch");
    const std::vector<double> ang = a.gate_angles(theta);
    const int m = a.num_params();
    const auto &gates = a.gates();
    const std::size_t dim = psi0.dim();
    std::vector<CVec> dpsi(m, CVec(dim, cplx{}));
    CVec psi = psi0.amplitudes();
    // Walk the circuit; at each rotation insert its generator and push the
    // result through the rest of the circuit.
    std::size_t rot = 0;
    for (std::size_t gi = 0; gi < gates.size(); ++gi) {
        const Gate &g = gates[gi];
        if (g.kind != Gate::Kind::rotation) {
            a.apply_gate(g, 0.0, psi);
            continue;
        }
        pauli_rotate(g.gen, ang[rot], psi);
        CVec d = pauli_apply(g.gen, psi);
        const cplx f(0.0, -g.sign);
        for (auto &x : d) x *= f;
        std::size_t r2 = rot + 1;
        for (std::size_t gj = gi + 1; gj < gates.size(); ++gj) {
            const Gate &h = gates[gj];
            a.apply_gate(h, h.kind == Gate::Kind::rotation ? ang[r2++] : 0.0, d);
        }
        for (std::size_t b = 0; b < dim; ++b) dpsi[g.param][b] += d[b];
        ++rot;
    }
    std::vector<cplx> ov(m);
    for (int i = 0; i < m; ++i) ov[i] = inner(dpsi[i], psi);
    Eigen::MatrixXd f(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            const double v = 4.0 * (inner(dpsi[i], dpsi[j]) - ov[i] * std::conj(ov[j])).real();
            f(i, j) = v;
            f(j, i) = v;
        }
    return f;
}

double min_eigenvalue(const Eigen::MatrixXd &sym) {
    WS_REQUIRE(sym.rows() == sym.cols() && sym.rows() > 0, "eigenvalue of non-square matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double mu_min(const Ansatz &a, const Params &theta_star, const StateVector &psi0) {
    WS_REQUIRE(a.num_params() <= 512, "mu_min refused for M > 512");
    return min_eigenvalue(qfi(a, theta_star, psi0));
}

double qml_loss_composite(const LossContext &ctx, const Params &theta) {
    WS_REQUIRE(ctx.kind() == LossKind::qml, "composite form applies to the qml loss");
    const int n = ctx.ansatz().n();
    WS_REQUIRE(2 * n <= 12, "composite qml form limited to 2n <= 12");
    const Ansatz wide = ctx.ansatz().padded(2 * n);
    const PauliSum hwide = ctx.hamiltonian().padded(2 * n);
    const auto &states = ctx.dataset().states;
    const std::size_t ns = states.size();
    std::vector<CVec> chi, omega;
    for (const auto &s : states) {
        CVec in = doubled(s);
        CVec c = in;
        wide.apply(theta, c);
        chi.push_back(std::move(c));
        CVec w = in;
        wide.apply(ctx.theta_star(), w);
        omega.push_back(evolve_real(w, hwide, ctx.dt()));
    }
    double tr = 0.0;
    for (std::size_t j = 0; j < ns; ++j)
        for (std::size_t k = 0; k < ns; ++k) tr += std::norm(inner(chi[j], omega[k]));
    tr /= static_cast<double>(ns * ns);
    return 1.0 - static_cast<double>(ns) * tr;
}

double composite_first_gate_overlap(const StabilizerDataset &ds, const PauliString &sigma) {
    WS_REQUIRE(sigma.n() == ds.n, "sigma qubit count mismatch");
    WS_REQUIRE(2 * ds.n <= 12, "composite overlap limited to 2n <= 12");
    const PauliString wide = sigma.padded(2 * ds.n);
    std::vector<CVec> in;
    for (const auto &s : ds.states) in.push_back(doubled(s));
    double tr = 0.0;
    for (const auto &a : in)
        for (const auto &b : in) tr += std::norm(pauli_expectation(wide, a, b));
    const double ns = static_cast<double>(in.size());
    return tr / (ns * ns);
}

double dataset_first_gate_overlap(const StabilizerDataset &ds, const PauliString &sigma) {
    WS_REQUIRE(sigma.n() == ds.n, "sigma qubit count mismatch");
    double tr = 0.0;
    for (const auto &s : ds.states)
        tr += std::norm(pauli_expectation(sigma, s.amplitudes(), s.amplitudes()));
    const double ns = static_cast<double>(ds.states.size());
    return tr / (ns * ns);
}

OverlapProbability first_gate_overlap_probability(int n, int n_s, int draws, std::uint64_t seed) {
    WS_REQUIRE(n >= 1 && 2 * n <= 12, "overlap probability needs 1 <= n <= 6");
    WS_REQUIRE(n_s >= 1 && draws >= 1, "need at least one state and one draw");
    std::vector<char> diag(draws), exact(draws);
    parallel_for(static_cast<std::size_t>(draws), [&](std::size_t d) {
        const auto ds = sample_stabilizer_dataset(n, n_s, derive_seed(seed, 2 * d));
        std::mt19937_64 rng(derive_seed(seed, 2 * d + 1));
        std::string axes(n, 'X');
        for (char &c : axes) c = "XYZ"[rng() % 3];
        const PauliString sigma(axes);
        diag[d] = dataset_first_gate_overlap(ds, sigma) < 1e-12;
        exact[d] = composite_first_gate_overlap(ds, sigma) < 1e-12;
    });
    OverlapProbability p;
    for (int d = 0; d < draws; ++d) {
        p.diagonal += diag[d];
        p.exact_trace += exact[d];
    }
    p.diagonal /= draws;
    p.exact_trace /= draws;
    return p;
}

} // namespace warmstart
