#include "warmstart/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "warmstart/errors.hpp"

namespace warmstart {

Ansatz::Ansatz(int n) : n_(n) {
    WS_REQUIRE(n >= 1 && n <= kMaxQubits, "ansatz qubit count out of range");
}

void Ansatz::add_rotation(const PauliString &gen, int param, double sign) {
    WS_REQUIRE(gen.n() == n_, "rotation generator qubit count mismatch");
    WS_REQUIRE(!gen.is_identity(), "identity rotation generator");
    WS_REQUIRE(param >= 0, "negative parameter index");
    WS_REQUIRE(sign == 1.0 || sign == -1.0, "rotation sign must be +1 or -1");
    Gate g;
    g.kind = Gate::Kind::rotation;
    g.gen = gen;
    g.param = param;
    g.sign = sign;
    rotation_gates_.push_back(static_cast<int>(gates_.size()));
    gates_.push_back(g);
    num_params_ = std::max(num_params_, param + 1);
}

void Ansatz::add_fixed_rotation(const PauliString &gen, double angle) {
    WS_REQUIRE(gen.n() == n_, "fixed generator qubit count mismatch");
    WS_REQUIRE(std::isfinite(angle), "fixed rotation angle must be finite");
    Gate g;
    g.kind = Gate::Kind::fixed_rotation;
    g.gen = gen;
    g.angle = angle;
    gates_.push_back(g);
}

void Ansatz::add_cz(int q1, int q2) {
    WS_REQUIRE(q1 >= 1 && q1 <= n_ && q2 >= 1 && q2 <= n_ && q1 != q2,
               "invalid CZ qubits");
    Gate g;
    g.kind = Gate::Kind::cz;
    g.q1 = q1;
    g.q2 = q2;
    gates_.push_back(g);
}

const PauliString &Ansatz::first_generator() const {
    WS_REQUIRE(!rotation_gates_.empty(), "ansatz has no rotation gates");
    return gates_[rotation_gates_.front()].gen;
}

std::vector<double> Ansatz::gate_angles(const Params &theta) const {
    WS_REQUIRE(static_cast<int>(theta.size()) == num_params_,
               "parameter vector length " + std::to_string(theta.size()) +
                   " does not match ansatz M = " + std::to_string(num_params_));
    std::vector<double> out(rotation_gates_.size());
    for (std::size_t k = 0; k < rotation_gates_.size(); ++k) {
        const Gate &g = gates_[rotation_gates_[k]];
        out[k] = g.sign * theta[g.param];
    }
    return out;
}

void Ansatz::apply_fixed(const Gate &g, CVec &v, bool adjoint) const {
    if (g.kind == Gate::Kind::cz) {
        const std::uint64_t m = (std::uint64_t{1} << (n_ - g.q1)) |
                                (std::uint64_t{1} << (n_ - g.q2));
        for (std::uint64_t b = 0; b < v.size(); ++b)
            if ((b & m) == m) v[b] = -v[b];
    } else {
        pauli_rotate(g.gen, adjoint ? -g.angle : g.angle, v);
    }
}

void Ansatz::apply_gate(const Gate &g, double angle, CVec &v) const {
    if (g.kind == Gate::Kind::rotation)
        pauli_rotate(g.gen, angle, v);
    else
        apply_fixed(g, v, false);
}

void Ansatz::apply_angles(const std::vector<double> &angles, CVec &v) const {
    WS_REQUIRE(angles.size() == rotation_gates_.size(), "gate angle count mismatch");
    WS_REQUIRE(v.size() == (std::size_t{1} << n_), "ansatz: state dimension mismatch");
    std::size_t k = 0;
    for (const Gate &g : gates_) {
        if (g.kind == Gate::Kind::rotation)
            pauli_rotate(g.gen, angles[k++], v);
        else
            apply_fixed(g, v, false);
    }
}

void Ansatz::apply_adjoint_angles(const std::vector<double> &angles, CVec &v) const {
    WS_REQUIRE(angles.size() == rotation_gates_.size(), "gate angle count mismatch");
    WS_REQUIRE(v.size() == (std::size_t{1} << n_), "ansatz: state dimension mismatch");
    std::size_t k = rotation_gates_.size();
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
        if (it->kind == Gate::Kind::rotation)
            pauli_rotate(it->gen, -angles[--k], v);
        else
            apply_fixed(*it, v, true);
    }
}

void Ansatz::apply(const Params &theta, CVec &v) const { apply_angles(gate_angles(theta), v); }

void Ansatz::apply_adjoint(const Params &theta, CVec &v) const {
    apply_adjoint_angles(gate_angles(theta), v);
}

StateVector Ansatz::apply(const Params &theta, const StateVector &v) const {
    WS_REQUIRE(v.n() == n_, "ansatz: qubit count mismatch");
    CVec a = v.amplitudes();
    apply(theta, a);
    return StateVector(n_, std::move(a));
}

Ansatz Ansatz::padded(int n_total) const {
    Ansatz out(n_total);
    for (const Gate &g : gates_) {
        switch (g.kind) {
        case Gate::Kind::rotation: out.add_rotation(g.gen.padded(n_total), g.param, g.sign); break;
        case Gate::Kind::fixed_rotation: out.add_fixed_rotation(g.gen.padded(n_total), g.angle); break;
        case Gate::Kind::cz: out.add_cz(g.q1, g.q2); break;
        }
    }
    out.num_params_ = num_params_;
    return out;
}

std::string Ansatz::serialize() const {
    std::ostringstream os;
    os << "QUBITS " << n_ << '\n';
    char buf[64];
    for (const Gate &g : gates_) {
        switch (g.kind) {
        case Gate::Kind::rotation:
            os << "ROT " << g.param << ' ' << (g.sign < 0 ? "-" : "") << g.gen.str() << '\n';
            break;
        case Gate::Kind::fixed_rotation: {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, g.angle);
            os << "FIXED EXP " << std::string(buf, p) << ' ' << g.gen.str() << '\n';
            break;
        }
        case Gate::Kind::cz: os << "FIXED CZ " << g.q1 << ' ' << g.q2 << '\n'; break;
        }
    }
    return os.str();
}

Ansatz Ansatz::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    Ansatz out;
    bool have_n = false;
    auto fail = [&](const std::string &msg) {
        throw ValidationError("circuit line " + std::to_string(line_no) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head) || head.front() == '#') continue;
        try {
            if (head == "QUBITS") {
                int n = 0;
                if (!(ls >> n) || have_n) fail("bad QUBITS header");
                out = Ansatz(n);
                have_n = true;
                continue;
            }
            if (!have_n) fail("missing QUBITS header");
            if (head == "ROT") {
                int p = -1;
                std::string axes;
                if (!(ls >> p >> axes)) fail("expected 'ROT <param> <axes>'");
                double sign = 1.0;
                if (axes.front() == '-') {
                    sign = -1.0;
                    axes.erase(0, 1);
                }
                out.add_rotation(PauliString(axes), p, sign);
            } else if (head == "FIXED") {
                std::string kind;
                ls >> kind;
                if (kind == "CZ") {
                    int a = 0, b = 0;
                    if (!(ls >> a >> b)) fail("expected 'FIXED CZ <q1> <q2>'");
                    out.add_cz(a, b);
                } else if (kind == "EXP") {
                    std::string angle_tok, axes;
                    if (!(ls >> angle_tok >> axes)) fail("expected 'FIXED EXP <angle> <axes>'");
                    double angle = 0.0;
                    auto [p, ec] = std::from_chars(angle_tok.data(),
                                                   angle_tok.data() + angle_tok.size(), angle);
                    if (ec != std::errc() || p != angle_tok.data() + angle_tok.size())
                        fail("bad angle '" + angle_tok + "'");
                    out.add_fixed_rotation(PauliString(axes), angle);
                } else {
                    fail("unknown fixed gate '" + kind + "'");
                }
            } else {
                fail("unknown gate '" + head + "'");
            }
        } catch (const ValidationError &e) {
            const std::string msg = e.what();
            if (msg.rfind("circuit line", 0) == 0) throw;
            fail(msg);
        }
        std::string extra;
        if (ls >> extra) fail("trailing token '" + extra + "'");
    }
    if (!have_n) throw ValidationError("circuit text has no QUBITS header");
    return out;
}

bool Ansatz::operator==(const Ansatz &o) const {
    if (n_ != o.n_ || num_params_ != o.num_params_ || gates_.size() != o.gates_.size())
        return false;
    for (std::size_t k = 0; k < gates_.size(); ++k) {
        const Gate &a = gates_[k], &b = o.gates_[k];
        if (a.kind != b.kind || a.param != b.param || a.sign != b.sign ||
            a.angle != b.angle || a.q1 != b.q1 || a.q2 != b.q2)
            return false;
        if (a.kind != Gate::Kind::cz && !(a.gen == b.gen)) return false;
    }
    return true;
}

Ansatz build_hea(int n, int layers, std::uint64_t shuffle_seed) {
    WS_REQUIRE(n >= 2, "hardware-efficient ansatz needs n >= 2");
    WS_REQUIRE(layers >= 1, "hardware-efficient ansatz needs layers >= 1");
    Ansatz a(n);
    std::mt19937_64 rng(shuffle_seed);
    int p = 0;
    for (int l = 0; l < layers; ++l) {
        for (int q = 1; q <= n; ++q) {
            Axis first = Axis::Y, second = Axis::Z;
            const bool pinned = (l == 0 && q == 1);
            if (shuffle_seed != 0 && !pinned && (rng() & 1)) std::swap(first, second);
            a.add_rotation(PauliString::single(n, q, first), p++);
            a.add_rotation(PauliString::single(n, q, second), p++);
        }
        for (int q = 1; q < n; ++q) a.add_cz(q, q + 1);
    }
    return a;
}

Ansatz build_hva(const PauliSum &h, int layers) {
    WS_REQUIRE(!h.empty(), "variational ansatz needs a non-empty Hamiltonian");
    WS_REQUIRE(layers >= 1, "variational ansatz needs layers >= 1");
    std::vector<std::string> order;
    std::map<std::string, std::vector<const PauliTerm *>> groups;
    for (const auto &t : h.terms()) {
        if (t.coeff == 0.0 || t.op.is_identity()) continue;
        const std::string key = t.op.pattern();
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(&t);
    }
    WS_REQUIRE(!order.empty(), "Hamiltonian has no non-identity terms");
    Ansatz a(h.n());
    const int g_count = static_cast<int>(order.size());
    for (int l = 0; l < layers; ++l)
        for (int g = 0; g < g_count; ++g)
            for (const PauliTerm *t : groups[order[g]])
                a.add_rotation(t->op, l * g_count + g, t->coeff > 0 ? 1.0 : -1.0);
    return a;
}

double first_gate_orthogonality(const Ansatz &a, const StateVector &psi0) {
    WS_REQUIRE(a.n() == psi0.n(), "qubit count mismatch");
    const PauliString &s1 = a.first_generator();
    CVec v = psi0.amplitudes();
    for (int k = 0; k < a.rotation_gates().front(); ++k) a.apply_gate(a.gates()[k], 0.0, v);
    return std::norm(pauli_expectation(s1, v, v));
}

} // namespace warmstart
