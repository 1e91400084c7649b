#include "warmstart/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "warmstart/bounds.hpp"
#include "warmstart/csv.hpp"
#include "warmstart/errors.hpp"
#include "warmstart/jumps.hpp"
#include "warmstart/landscape.hpp"
#include "warmstart/optimize.hpp"
#include "warmstart/util.hpp"

namespace warmstart {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;

struct Run {
    const Config &cfg;
    const RunOptions &opts;
    std::uint64_t seed;
    std::ostream &log;
    std::string comment;
    std::vector<std::pair<std::string, std::string>> files; // file name, contents
    json results = json::object();

    void add_csv(const std::string &file, const CsvTable &t) {
        std::ostringstream os;
        t.write(os, comment);
        files.emplace_back(file, os.str());
    }
};

Axis parse_axis(const Config &cfg, const std::string &sec, const std::string &key, char c) {
    switch (c) {
    case 'X': return Axis::X;
    case 'Y': return Axis::Y;
    case 'Z': return Axis::Z;
    default: throw ValidationError(cfg.where(sec, key) + ": axis must be X, Y or Z");
    }
}

std::string read_file(const std::string &path, const std::string &what) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + what + " '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string b01(bool b) { return b ? "1" : "0"; }

// Defaults for the shared [system], [hamiltonian], [ansatz] and [loss] keys.
struct SystemDefaults {
    std::vector<int> qubits{4};
    std::vector<int> long_qubits; // used with --long-run when non-empty
    std::string model = "chain";
    std::string coupling = "XZ";
    std::string family = "hea";
    std::string layers = "n";
    std::string kind = "real_time";
    double dt = 0.0;
    std::string theta_star = "zero";
};

class SystemBuilder {
  public:
    SystemBuilder(const Config &cfg, const SystemDefaults &d, bool long_run) {
        qubits = cfg.get_ints("system", "qubits",
                              long_run && !d.long_qubits.empty() ? d.long_qubits : d.qubits);
        for (int n : qubits)
            if (n < 1 || n > 14)
                throw ValidationError(cfg.where("system", "qubits") + ": qubit counts must be in 1..14");
        model_ = cfg.get_string("hamiltonian", "model", d.model);
        coupling_ = cfg.get_string("hamiltonian", "coupling", d.coupling);
        field_ = cfg.get_double("hamiltonian", "field", -0.95);
        field_axis_ = cfg.get_string("hamiltonian", "field_axis", "Y");
        if (model_ == "file") {
            const std::string path = cfg.get_string("hamiltonian", "file", "");
            if (path.empty()) throw ValidationError(cfg.where("hamiltonian", "file") + ": missing path");
            fixed_h_ = PauliSum::parse(read_file(path, "Hamiltonian file"));
        } else if (model_ == "terms") {
            std::string text = cfg.get_string("hamiltonian", "terms", "");
            std::replace(text.begin(), text.end(), ';', '\n');
            fixed_h_ = PauliSum::parse(text);
        } else if (model_ != "chain" && model_ != "none") {
            throw ValidationError(cfg.where("hamiltonian", "model") +
                                  ": expected chain, none, file or terms");
        }
        if (model_ == "chain") {
            if (coupling_.size() != 2)
                throw ValidationError(cfg.where("hamiltonian", "coupling") + ": expected two axes, e.g. XZ");
            ca_ = parse_axis(cfg, "hamiltonian", "coupling", coupling_[0]);
            cb_ = parse_axis(cfg, "hamiltonian", "coupling", coupling_[1]);
            if (field_axis_.size() != 1)
                throw ValidationError(cfg.where("hamiltonian", "field_axis") + ": expected one axis");
            fa_ = parse_axis(cfg, "hamiltonian", "field_axis", field_axis_[0]);
        }

        family_ = cfg.get_string("ansatz", "family", d.family);
        const std::string layers = cfg.get_string("ansatz", "layers", d.layers);
        if (layers == "n") {
            layers_ = -1;
        } else {
            const auto [p, ec] = std::from_chars(layers.data(), layers.data() + layers.size(), layers_);
            if (ec != std::errc() || p != layers.data() + layers.size() || layers_ < 1)
                throw ValidationError(cfg.where("ansatz", "layers") + ": must be a positive integer or n");
        }
        shuffle_seed_ = cfg.get_u64("ansatz", "shuffle_seed", 0);
        if (family_ == "file") {
            const std::string path = cfg.get_string("ansatz", "file", "");
            if (path.empty()) throw ValidationError(cfg.where("ansatz", "file") + ": missing path");
            fixed_a_ = Ansatz::parse(read_file(path, "ansatz file"));
        } else if (family_ != "hea" && family_ != "hva") {
            throw ValidationError(cfg.where("ansatz", "family") + ": expected hea, hva or file");
        }

        kind = loss_kind_from_string(cfg.get_string("loss", "kind", d.kind));
        dt = cfg.get_double("loss", "dt", d.dt);
        if (dt < 0.0) throw ValidationError(cfg.where("loss", "dt") + ": must be >= 0");
        theta_mode_ = cfg.get_string("loss", "theta_star", d.theta_star);
        if (theta_mode_ != "zero" && theta_mode_ != "random")
            throw ValidationError(cfg.where("loss", "theta_star") + ": expected zero or random");

        // Consistency of fixed-size inputs with the qubit list.
        for (int n : qubits) {
            if (model_ == "file" || model_ == "terms")
                if (fixed_h_.n() != n)
                    throw ValidationError(cfg.where("system", "qubits") + ": the Hamiltonian acts on " +
                                          std::to_string(fixed_h_.n()) + " qubits, not " +
                                          std::to_string(n));
            if (family_ == "file" && fixed_a_.n() != n)
                throw ValidationError(cfg.where("system", "qubits") + ": the ansatz acts on " +
                                      std::to_string(fixed_a_.n()) + " qubits, not " +
                                      std::to_string(n));
            if (model_ == "chain" && n < 2)
                throw ValidationError(cfg.where("system", "qubits") + ": the chain model needs n >= 2");
        }
    }

    PauliSum hamiltonian(int n) const {
        if (model_ == "chain") return chain_model(n, ca_, cb_, field_, fa_);
        if (model_ == "none") return PauliSum(n);
        return fixed_h_;
    }

    Ansatz ansatz(const PauliSum &h, int n) const {
        const int layers = layers_ < 0 ? n : layers_;
        if (family_ == "hea") return build_hea(n, layers, shuffle_seed_);
        if (family_ == "hva") {
            if (h.empty()) throw ValidationError("the hva family needs a non-empty Hamiltonian");
            return build_hva(h, layers);
        }
        return fixed_a_;
    }

    Params theta_star(int m, std::uint64_t instance_seed) const {
        if (theta_mode_ == "zero") return Params(m, 0.0);
        return sample_hypercube({Params(m, 0.0), kPi}, instance_seed, 1).front();
    }

    std::vector<int> qubits;
    LossKind kind = LossKind::real_time;
    double dt = 0.0;

  private:
    std::string model_, coupling_, field_axis_, family_, theta_mode_;
    double field_ = -0.95;
    Axis ca_ = Axis::X, cb_ = Axis::Z, fa_ = Axis::Y;
    PauliSum fixed_h_;
    Ansatz fixed_a_;
    int layers_ = -1;
    std::uint64_t shuffle_seed_ = 0;
};

OptimizerOptions read_optimizer(const Config &cfg, OptimizerOptions o) {
    const std::string method = cfg.get_string("optimizer", "method", "quasi_newton");
    if (method == "quasi_newton") {
        o.method = OptimizerOptions::Method::quasi_newton;
    } else if (method == "gradient_descent") {
        o.method = OptimizerOptions::Method::gradient_descent;
    } else {
        throw ValidationError(cfg.where("optimizer", "method") +
                              ": expected quasi_newton or gradient_descent");
    }
    o.grad_tol = cfg.get_double("optimizer", "grad_tol", o.grad_tol);
    o.max_iters = cfg.get_int("optimizer", "max_iters", o.max_iters);
    if (!(o.grad_tol > 0.0)) throw ValidationError(cfg.where("optimizer", "grad_tol") + ": must be > 0");
    if (o.max_iters < 1) throw ValidationError(cfg.where("optimizer", "max_iters") + ": must be >= 1");
    return o;
}

std::vector<double> read_grid(const Config &cfg, const std::string &sec, const std::string &prefix,
                              double lo, double hi, int points) {
    if (cfg.has(sec, prefix + "_list")) {
        auto g = cfg.get_doubles(sec, prefix + "_list", {});
        for (double x : g)
            if (!(x > 0.0)) throw ValidationError(cfg.where(sec, prefix + "_list") + ": values must be > 0");
        return g;
    }
    lo = cfg.get_double(sec, prefix + "_min", lo);
    hi = cfg.get_double(sec, prefix + "_max", hi);
    points = cfg.get_int(sec, prefix + "_points", points);
    if (!(lo > 0.0 && hi > lo) || points < 2)
        throw ValidationError(cfg.where(sec, prefix + "_min") + ": need 0 < min < max and points >= 2");
    return log_grid(lo, hi, static_cast<std::size_t>(points));
}

int positive(const Config &cfg, const std::string &sec, const std::string &key, int fallback) {
    const int v = cfg.get_int(sec, key, fallback);
    if (v < 1) throw ValidationError(cfg.where(sec, key) + ": must be >= 1");
    return v;
}

json fit_json(const PowerLawFit &f) {
    return {{"exponent", f.exponent}, {"prefactor", f.prefactor}, {"r_squared", f.r_squared}};
}

// ---------------------------------------------------------------------------

void cmd_variance_sweep(Run &run) {
    SystemDefaults d;
    d.qubits = {4, 6, 8};
    d.long_qubits = {4, 6, 8, 10};
    d.model = "none";
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    const auto samples = positive(run.cfg, "sampling", "samples", 20000);
    const auto dirs = positive(run.cfg, "sampling", "directions", 500);
    const auto grid = read_grid(run.cfg, "sampling", "r", 1e-3, kPi, 40);
    run.cfg.check_unused();

    CsvTable t({"n", "M", "r", "mean_loss", "variance", "var_stderr"});
    CsvTable peaks({"n", "M", "r_max", "r_max_refined", "var_max", "mean_loss_at_peak", "var_at_largest_r"});
    std::vector<double> ms, rr, ns, vlast;
    for (int n : sys.qubits) {
        const auto t0 = std::chrono::steady_clock::now();
        const PauliSum h = sys.hamiltonian(n);
        const Ansatz a = sys.ansatz(h, n);
        const int m = a.num_params();
        LossContext ctx(a, sys.theta_star(m, derive_seed(run.seed, 100 + n)), h, sys.dt, StateVector(n),
                        sys.kind);
        const auto res = variance_sweep_r(ctx, grid, samples, derive_seed(run.seed, n), dirs);
        for (const auto &row : res.rows)
            t.add_numbers({double(n), double(m), row.r, row.mean_loss, row.variance, row.var_stderr});
        peaks.add_numbers({double(n), double(m), res.r_max, res.r_max_refined, res.var_max,
                           res.mean_loss_at_peak, res.rows.back().variance});
        ms.push_back(m);
        rr.push_back(res.r_max_refined);
        ns.push_back(n);
        vlast.push_back(res.rows.back().variance);
        run.log << "n=" << n << " M=" << m << " r_max=" << res.r_max_refined << " ("
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                << " s)\n";
    }
    run.add_csv("variance-sweep.csv", t);
    run.add_csv("variance-sweep_peaks.csv", peaks);
    if (ms.size() >= 3) {
        run.results["r_max_vs_M"] = fit_json(fit_power_law(ms, rr));
        run.results["var_at_largest_r_vs_n"] = fit_json(fit_log_linear(ns, vlast));
    }
}

void cmd_variance_vs_dt(Run &run) {
    SystemDefaults d;
    d.qubits = {4, 6, 8};
    d.long_qubits = {4, 6, 8, 10};
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    const auto samples = positive(run.cfg, "sampling", "samples", 20000);
    const double r = run.cfg.get_double("sampling", "r", 0.15);
    const auto grid = read_grid(run.cfg, "sampling", "dt", 1e-3, 3.0, 30);
    if (!(r >= 0.0)) throw ValidationError(run.cfg.where("sampling", "r") + ": must be >= 0");
    run.cfg.check_unused();

    CsvTable t({"n", "lambda", "dt", "variance", "var_stderr", "mean_loss"});
    CsvTable peaks({"n", "lambda", "dt_peak", "dt_peak_refined", "var_peak", "interior"});
    std::vector<double> ls, ds;
    for (int n : sys.qubits) {
        const PauliSum h = sys.hamiltonian(n);
        WS_REQUIRE(!h.empty(), "variance-vs-dt needs a non-empty Hamiltonian");
        const Ansatz a = sys.ansatz(h, n);
        const double lam = spectral_bound(h, n <= 12 ? SpectralMode::exact : SpectralMode::triangle);
        LossContext ctx(a, sys.theta_star(a.num_params(), derive_seed(run.seed, 100 + n)), h, 0.0,
                        StateVector(n), sys.kind);
        const auto res = variance_vs_dt(ctx, grid, r, samples, derive_seed(run.seed, n));
        for (const auto &row : res.rows)
            t.add_numbers({double(n), lam, row.dt, row.variance, row.var_stderr, row.mean_loss});
        const bool interior = res.peak_index > 0 && res.peak_index + 1 < res.rows.size();
        peaks.add_numbers({double(n), lam, res.dt_peak, res.dt_peak_refined, res.var_peak, interior ? 1.0 : 0.0});
        if (interior) {
            ls.push_back(lam);
            ds.push_back(res.dt_peak_refined);
        }
        run.log << "n=" << n << " lambda=" << lam << " dt_peak=" << res.dt_peak_refined
                << (interior ? "" : " (edge of grid)") << '\n';
    }
    run.add_csv("variance-vs-dt.csv", t);
    run.add_csv("variance-vs-dt_peaks.csv", peaks);
    run.results["interior_peaks"] = ls.size();
    if (ls.size() >= 3) run.results["dt_peak_vs_lambda"] = fit_json(fit_power_law(ls, ds));
}

void cmd_bounds(Run &run) {
    const Config &c = run.cfg;
    const std::string which = c.get_string("bounds", "which", "thm5");
    const double r = c.get_double("bounds", "r", 0.1);
    const double r0 = c.get_double("bounds", "r0", kDefaultR0);
    const int m = c.get_int("bounds", "m", 8);
    const double lam = c.get_double("bounds", "lambda", 1.0);
    const double dt = c.get_double("bounds", "dt", 0.01);
    const double f_target = c.get_double("bounds", "f_target", 0.9);
    const double delta = c.get_double("bounds", "delta", 1.0);
    const double mu = c.get_double("bounds", "mu_min", 1.0);
    const double eps = c.get_double("bounds", "eps", 0.0);
    const double beta = c.get_double("bounds", "beta_a", 1.0);
    const double eta0 = c.get_double("bounds", "eta0", kDefaultEta0);
    const std::string form_s = c.get_string("bounds", "form", "derived");
    if (form_s != "derived" && form_s != "published")
        throw ValidationError(c.where("bounds", "form") + ": expected derived or published");
    const R0Form form = form_s == "derived" ? R0Form::derived : R0Form::published;
    c.check_unused();

    std::vector<BoundReport> reps;
    std::stringstream ws(which);
    std::string item;
    while (std::getline(ws, item, ',')) {
        item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
        if (item == "thm5") {
            reps.push_back(thm5_bound(r, r0, m, lam, dt, form));
        } else if (item == "thm4") {
            reps.push_back(thm4_bound(r, r0, m, f_target, form));
        } else if (item == "prop1") {
            reps.push_back({"prop1_variance_lower_bound", prop1_bound(r, m, delta), true, {}});
        } else if (item == "convexity") {
            reps.push_back(convexity_radius(mu, eps, m, lam, dt));
        } else if (item == "ite") {
            const auto ib = ite_bounds(r, r0, m, lam, dt, mu, eps, beta, eta0);
            reps.push_back(ib.variance);
            reps.push_back(ib.convexity);
            reps.push_back(ib.adiabatic);
        } else if (item == "shift") {
            const auto s = adiabatic_shift_bound(m, lam, dt, beta);
            reps.push_back({"adiabatic_shift_bound", s.value, !s.unbounded, {}});
        } else if (item == "dt_limits") {
            const auto l = adiabatic_dt_limits(m, lam, beta, eta0, mu, eps);
            reps.push_back({"adiabatic_dt_grad", l.dt_grad, true, {}});
            reps.push_back({"adiabatic_dt_convex", l.dt_convex, true, {}});
        } else {
            throw ValidationError(c.where("bounds", "which") + ": unknown bound '" + item +
                                  "' (thm5, thm4, prop1, convexity, ite, shift, dt_limits)");
        }
    }
    if (reps.empty()) throw ValidationError(c.where("bounds", "which") + ": no bound selected");

    CsvTable t({"bound", "value", "valid", "condition", "satisfied", "margin"});
    json arr = json::array();
    for (const auto &rep : reps) {
        run.log << to_text(rep);
        json jc = json::array();
        if (rep.conditions.empty())
            t.add_row({rep.name, format_number(rep.value), b01(rep.valid), "", "", ""});
        for (const auto &cond : rep.conditions) {
            t.add_row({rep.name, format_number(rep.value), b01(rep.valid), cond.name,
                       b01(cond.satisfied),
                       std::isfinite(cond.margin) ? format_number(cond.margin) : "inf"});
            jc.push_back({{"name", cond.name},
                          {"satisfied", cond.satisfied},
                          {"margin", std::isfinite(cond.margin) ? json(cond.margin) : json("inf")}});
        }
        arr.push_back({{"name", rep.name}, {"value", rep.value}, {"valid", rep.valid}, {"conditions", jc}});
    }
    run.add_csv("bounds.csv", t);
    run.files.emplace_back("bounds.json", arr.dump(2) + "\n");
    run.results["reports"] = arr;
}

void cmd_adiabatic_track(Run &run) {
    SystemDefaults d;
    d.qubits = {4, 6};
    d.family = "hva";
    d.layers = "2";
    d.theta_star = "random";
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    const int instances = positive(run.cfg, "track", "instances", 10);
    const double dt_max = run.cfg.get_double("track", "dt_max", 0.2);
    const int steps = positive(run.cfg, "track", "steps", 50);
    TrackOptions topts;
    topts.jump_guard = run.cfg.get_double("track", "jump_guard", topts.jump_guard);
    topts.opt = read_optimizer(run.cfg, topts.opt);
    const auto cut_dts = run.cfg.get_doubles("track", "cut_dts", {0.0, 0.05, 0.1, 0.15, 0.2});
    const int cut_points = positive(run.cfg, "track", "cut_points", 101);
    if (!(dt_max > 0.0)) throw ValidationError(run.cfg.where("track", "dt_max") + ": must be > 0");
    run.cfg.check_unused();

    CsvTable t({"n", "M", "seed", "dt", "loss", "grad_norm", "dist_inf", "dist_2", "beta_a",
                "shift_bound", "continuity_ok", "failed"});
    CsvTable summary({"n", "M", "seed", "lambda", "halted", "dt_last", "dist_inf_last", "grad_norm_max"});
    CsvTable cuts({"n", "seed", "dt", "s", "theta_inf", "loss"});
    for (int n : sys.qubits) {
        const PauliSum h = sys.hamiltonian(n);
        const Ansatz a = sys.ansatz(h, n);
        const int m = a.num_params();
        const double lam = spectral_bound(h, n <= 12 ? SpectralMode::exact : SpectralMode::triangle);
        for (int s = 0; s < instances; ++s) {
            const Params ts = sys.theta_star(m, derive_seed(run.seed, s));
            const auto tr = adiabatic_track(a, h, ts, StateVector(n), dt_max, steps, topts, sys.kind);
            const auto bound = cumulative_shift_bound(tr, m, lam);
            double gmax = 0.0;
            for (std::size_t j = 0; j < tr.samples.size(); ++j) {
                const auto &x = tr.samples[j];
                gmax = std::max(gmax, x.grad_norm);
                t.add_row({std::to_string(n), std::to_string(m), std::to_string(s), format_number(x.dt),
                           format_number(x.loss), format_number(x.grad_norm), format_number(x.dist_inf),
                           format_number(x.dist_2), x.beta_a ? format_number(*x.beta_a) : "",
                           format_number(bound[j]), b01(x.continuity_ok), b01(x.failed)});
            }
            const auto &last = tr.samples.back();
            summary.add_numbers({double(n), double(m), double(s), lam, tr.halted ? 1.0 : 0.0, last.dt,
                                 last.dist_inf, gmax});
            if (s == 0 && tr.samples.size() > 1) {
                LossContext ctx(a, ts, h, 0.0, StateVector(n), sys.kind);
                for (const auto &row : cut_1d(ctx, cut_dts, ts, last.theta, cut_points))
                    cuts.add_numbers({double(n), 0.0, row.dt, row.s, row.theta_inf, row.loss});
            }
            run.log << "n=" << n << " seed=" << s << (tr.halted ? " halted" : "")
                    << " dist_inf=" << last.dist_inf << " at dt=" << last.dt << '\n';
        }
    }
    run.add_csv("adiabatic-track.csv", t);
    run.add_csv("adiabatic-track_summary.csv", summary);
    run.add_csv("adiabatic-track_cuts.csv", cuts);
}

// Shared setup for the minima-jump subcommands.
struct JumpRun {
    int n = 6;
    PauliSum h;
    Ansatz a;
    JumpScan scan;
    JumpScanSettings settings;
};

JumpRun jump_setup(Run &run, const std::function<void()> &extra_keys) {
    SystemDefaults d;
    d.qubits = {6};
    d.coupling = "XX";
    d.family = "hva";
    d.layers = "2";
    d.theta_star = "random";
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    if (sys.qubits.size() != 1)
        throw ValidationError(run.cfg.where("system", "qubits") + ": this subcommand takes one qubit count");
    if (sys.kind != LossKind::real_time)
        throw ValidationError(run.cfg.where("loss", "kind") + ": minima jumps use the real_time loss");
    JumpRun jr;
    jr.n = sys.qubits.front();
    jr.h = sys.hamiltonian(jr.n);
    jr.a = sys.ansatz(jr.h, jr.n);
    auto &st = jr.settings;
    st.instances = positive(run.cfg, "jump", "instances", 10);
    st.dt_max = run.cfg.get_double("jump", "dt_max", 0.2);
    st.dt_points = positive(run.cfg, "jump", "dt_points", 10);
    st.restarts = positive(run.cfg, "jump", "restarts", 20);
    st.jump.jump_threshold = run.cfg.get_double("jump", "threshold", 0.5);
    st.jump.loss_margin = run.cfg.get_double("jump", "loss_margin", 1e-6);
    st.jump.opt = read_optimizer(run.cfg, st.jump.opt);
    if (!(st.dt_max > 0.0)) throw ValidationError(run.cfg.where("jump", "dt_max") + ": must be > 0");
    extra_keys();
    run.cfg.check_unused();
    std::vector<Params> ts;
    for (int s = 0; s < st.instances; ++s) ts.push_back(sys.theta_star(jr.a.num_params(), derive_seed(run.seed, s)));
    jr.scan = scan_minima_jumps(jr.a, jr.h, ts, run.seed, st);
    run.log << "scanned " << st.instances << " instances: " << jr.scan.jumps().size()
            << " with a jump\n";
    return jr;
}

CsvTable jump_table(const JumpScan &scan) {
    CsvTable t({"seed", "dt", "jump", "jump_distance", "loss_adiabatic", "loss_best", "minima"});
    for (const auto &row : scan.rows) {
        const auto &rep = row.report;
        const double best = rep.best >= 0 ? rep.minima[rep.best].loss : rep.loss_adiabatic;
        t.add_numbers({double(row.instance), row.dt, rep.jump ? 1.0 : 0.0, rep.jump_distance,
                       rep.loss_adiabatic, best, double(rep.minima.size())});
    }
    return t;
}

void cmd_minima_cut(Run &run) {
    int points = 201;
    double margin = 0.25;
    JumpRun jr = jump_setup(run, [&] {
        points = positive(run.cfg, "cut", "points", 201);
        margin = run.cfg.get_double("cut", "margin", 0.25);
    });
    run.add_csv("minima-cut_jumps.csv", jump_table(jr.scan));
    CsvTable t({"dt", "s", "theta_inf", "loss"});
    const auto jumps = jr.scan.jumps();
    run.results["jump_found"] = !jumps.empty();
    if (!jumps.empty()) {
        const auto &row = jr.scan.rows[jumps.front()];
        const auto &rep = row.report;
        const Params target = nearest_image(rep.theta_adiabatic, rep.minima[rep.best].theta, kPi);
        std::vector<double> dts{0.0};
        for (const auto &r : jr.scan.rows)
            if (r.instance == row.instance) dts.push_back(r.dt);
        LossContext ctx(jr.a, jr.scan.theta_star[row.instance], jr.h, row.dt, StateVector(jr.n));
        for (const auto &c : cut_1d(ctx, dts, rep.theta_adiabatic, target, points, margin))
            t.add_numbers({c.dt, c.s, c.theta_inf, c.loss});
        run.results["seed"] = row.instance;
        run.results["dt"] = row.dt;
        run.results["jump_distance"] = rep.jump_distance;
    }
    run.add_csv("minima-cut.csv", t);
}

void cmd_landscape_2d(Run &run) {
    int resolution = 41;
    double pad = 0.25;
    JumpRun jr = jump_setup(run, [&] {
        resolution = positive(run.cfg, "grid", "resolution", 41);
        pad = run.cfg.get_double("grid", "pad", 0.25);
    });
    CsvTable grid({"u", "v", "loss"});
    CsvTable pts({"kind", "index", "u", "v", "loss"});
    const auto jumps = jr.scan.jumps();
    run.results["jump_found"] = !jumps.empty();
    if (!jumps.empty()) {
        const auto &row = jr.scan.rows[jumps.front()];
        LossContext ctx(jr.a, jr.scan.theta_star[row.instance], jr.h, row.dt, StateVector(jr.n));
        const JumpPath path = jump_trajectory(ctx, row.report);
        std::vector<Params> cloud = path.points;
        const Params target =
            nearest_image(row.report.theta_adiabatic, row.report.minima[row.report.best].theta, kPi);
        cloud.push_back(row.report.theta_adiabatic);
        cloud.push_back(target);
        cloud.push_back(ctx.theta_star());
        const PcaPlane plane = pca_plane(cloud);
        auto project = [&](const Params &p) {
            const Params d = subtract(p, plane.mean);
            double u = 0, v = 0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                u += d[i] * plane.axis1[i];
                v += d[i] * plane.axis2[i];
            }
            return std::pair{u, v};
        };
        double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
        for (const auto &p : cloud) {
            const auto [u, v] = project(p);
            umin = std::min(umin, u);
            umax = std::max(umax, u);
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
        const double span = std::max({umax - umin, vmax - vmin, 1e-3});
        const std::array<double, 4> ext{umin - pad * span, umax + pad * span, vmin - pad * span,
                                        vmax + pad * span};
        for (const auto &g : grid_2d(ctx, plane.mean, plane.axis1, plane.axis2, ext, resolution))
            grid.add_numbers({g.u, g.v, g.loss});
        auto add_point = [&](const std::string &kind, std::size_t i, const Params &p) {
            const auto [u, v] = project(p);
            pts.add_row({kind, std::to_string(i), format_number(u), format_number(v),
                         format_number(ctx.loss(p))});
        };
        for (std::size_t i = 0; i < path.points.size(); ++i) add_point("path", i, path.points[i]);
        add_point("adiabatic", 0, row.report.theta_adiabatic);
        add_point("jump", 0, target);
        add_point("theta_star", 0, ctx.theta_star());
        run.results["seed"] = row.instance;
        run.results["dt"] = row.dt;
        run.results["path"] = path.optimizer_path ? "optimizer" : "segment";
        run.results["explained_variance"] = {plane.explained1, plane.explained2};
    }
    run.add_csv("landscape-2d.csv", grid);
    run.add_csv("landscape-2d_points.csv", pts);
}

void cmd_grad_path(Run &run) {
    int baseline = 200;
    JumpRun jr = jump_setup(run, [&] { baseline = positive(run.cfg, "path", "baseline_samples", 200); });
    CsvTable t({"arclength", "loss", "directional_gradient", "grad_norm"});
    CsvTable summary({"seed", "dt", "path", "path_median_grad", "path_max_grad", "random_median_grad",
                      "ratio"});
    const auto jumps = jr.scan.jumps();
    run.results["jump_found"] = !jumps.empty();
    bool first = true;
    for (std::size_t idx : jumps) {
        const auto &row = jr.scan.rows[idx];
        LossContext ctx(jr.a, jr.scan.theta_star[row.instance], jr.h, row.dt, StateVector(jr.n));
        const JumpPath path = jump_trajectory(ctx, row.report);
        const auto rows = gradient_along_path(ctx, path.points);
        const PathGradientSummary sm =
            summarize_path(ctx, rows, baseline, derive_seed(run.seed, 5000 + row.instance));
        summary.add_row({std::to_string(row.instance), format_number(row.dt),
                         path.optimizer_path ? "optimizer" : "segment", format_number(sm.path_median),
                         format_number(sm.path_max), format_number(sm.random_median),
                         format_number(sm.ratio)});
        if (first)
            for (const auto &r : rows) t.add_numbers({r.arclength, r.loss, r.directional_gradient, r.grad_norm});
        first = false;
        run.log << "seed=" << row.instance << " dt=" << row.dt << " path median |g|=" << sm.path_median
                << " random median |g|=" << sm.random_median << '\n';
    }
    run.add_csv("grad-path.csv", t);
    run.add_csv("grad-path_summary.csv", summary);
}

void cmd_compress(Run &run) {
    SystemDefaults d;
    d.qubits = {4};
    d.family = "hva";
    d.layers = "2";
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    if (sys.qubits.size() != 1)
        throw ValidationError(run.cfg.where("system", "qubits") + ": compress takes one qubit count");
    CompressionSchedule sched;
    sched.fixed = run.cfg.get_doubles("compress", "fixed", {});
    sched.t_total = run.cfg.get_double("compress", "t_total", 0.5);
    sched.dt_init = run.cfg.get_double("compress", "dt_init", sched.dt_init);
    sched.dt_min = run.cfg.get_double("compress", "dt_min", sched.dt_min);
    sched.dt_max = run.cfg.get_double("compress", "dt_max", sched.dt_max);
    sched.loss_threshold = run.cfg.get_double("compress", "loss_threshold", sched.loss_threshold);
    CompressionOptions co;
    co.jitter = run.cfg.get_double("compress", "jitter", 0.0);
    co.opt = read_optimizer(run.cfg, co.opt);
    co.kind = sys.kind;
    co.seed = derive_seed(run.seed, 0);
    run.cfg.check_unused();

    const int n = sys.qubits.front();
    const PauliSum h = sys.hamiltonian(n);
    WS_REQUIRE(!h.empty(), "compress needs a non-empty Hamiltonian");
    const Ansatz a = sys.ansatz(h, n);
    const auto logv = compress_run(a, h, StateVector(n), sched, co);
    std::ostringstream os;
    os << "# " << run.comment << '\n';
    write_csv(os, logv);
    run.files.emplace_back("compress.csv", os.str());
    run.results["completed"] = logv.completed;
    run.results["steps"] = logv.steps.size();
    if (!logv.steps.empty()) run.results["final_fidelity"] = logv.steps.back().cumulative_fidelity;
    if (!logv.completed) throw NumericError("compression stopped before t_total (step below dt_min)");
}

void cmd_ite_suite(Run &run) {
    SystemDefaults d;
    d.qubits = {2, 3, 4};
    d.layers = "2";
    d.theta_star = "random";
    d.kind = "imaginary_time";
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    const int instances = positive(run.cfg, "ite", "instances", 5);
    const double dtau = run.cfg.get_double("ite", "dtau", 0.01);
    const double r = run.cfg.get_double("ite", "r", 0.05);
    const double r0 = run.cfg.get_double("ite", "r0", kDefaultR0);
    const double eps = run.cfg.get_double("ite", "eps", 1e-3);
    const double eta0 = run.cfg.get_double("ite", "eta0", kDefaultEta0);
    const auto samples = positive(run.cfg, "sampling", "samples", 20000);
    run.cfg.check_unused();
    WS_REQUIRE(sys.kind == LossKind::imaginary_time, "ite-suite uses the imaginary_time loss");

    CsvTable t({"n", "M", "seed", "lambda", "dtau", "r", "variance_bound", "variance_valid",
                "empirical_variance", "var_stderr", "convexity_radius", "convexity_valid",
                "dtau_adiabatic_limit", "adiabatic_valid", "fidelity_after_step", "fidelity_drop_bound"});
    for (int n : sys.qubits) {
        const PauliSum h = sys.hamiltonian(n);
        WS_REQUIRE(!h.empty(), "ite-suite needs a non-empty Hamiltonian");
        const Ansatz a = sys.ansatz(h, n);
        const int m = a.num_params();
        const double lam = spectral_bound(h, n <= 12 ? SpectralMode::exact : SpectralMode::triangle);
        for (int s = 0; s < instances; ++s) {
            const Params ts = sys.theta_star(m, derive_seed(run.seed, 100 * n + s));
            LossContext ctx(a, ts, h, dtau, StateVector(n), LossKind::imaginary_time);
            const auto e = estimate_variance(ctx, {ts, r}, samples, derive_seed(run.seed, 7000 + 100 * n + s));
            const double mu = mu_min(a, ts, StateVector(n));
            const auto tr = adiabatic_track(a, h, ts, StateVector(n), dtau, 1, {}, LossKind::imaginary_time);
            const double beta = tr.samples.front().beta_a.value_or(0.0);
            const auto ib = ite_bounds(r, r0, m, lam, dtau, mu, eps, beta, eta0);
            const StateVector v = a.apply(ts, StateVector(n));
            const double fid = fidelity(v, evolve_imaginary(v, h, dtau));
            t.add_numbers({double(n), double(m), double(s), lam, dtau, r, ib.variance.value,
                           ib.variance.valid ? 1.0 : 0.0, e.variance, e.std_error_of_variance,
                           ib.convexity.value, ib.convexity.valid ? 1.0 : 0.0, ib.adiabatic.value,
                           ib.adiabatic.valid ? 1.0 : 0.0, fid, 1.0 - 12.0 * lam * lam * dtau * dtau});
        }
        run.log << "n=" << n << " done\n";
    }
    run.add_csv("ite-suite.csv", t);
}

void cmd_unitary_suite(Run &run) {
    SystemDefaults d;
    d.qubits = {2, 3};
    d.layers = "2";
    d.theta_star = "random";
    SystemBuilder sys(run.cfg, d, run.opts.long_run);
    const int instances = positive(run.cfg, "unitary", "instances", 20);
    const double dt = run.cfg.get_double("unitary", "dt", 0.1);
    const auto overlap_n = run.cfg.get_ints("unitary", "overlap_qubits", {2, 3, 4, 5, 6});
    const auto overlap_ns = run.cfg.get_ints("unitary", "dataset_sizes", {1, 4, 16});
    const int draws = positive(run.cfg, "unitary", "draws", 1000);
    run.cfg.check_unused();
    for (int n : overlap_n)
        if (n < 1 || n > 6)
            throw ValidationError(run.cfg.where("unitary", "overlap_qubits") + ": values must be in 1..6");
    for (int k : overlap_ns)
        if (k < 1) throw ValidationError(run.cfg.where("unitary", "dataset_sizes") + ": values must be >= 1");

    CsvTable t({"check", "n", "n_s", "value", "reference", "abs_diff"});
    for (int n : sys.qubits) {
        WS_REQUIRE(n <= 6, "unitary checks are limited to n <= 6");
        const PauliSum h = sys.hamiltonian(n);
        const Ansatz a = sys.ansatz(h, n);
        const int m = a.num_params();
        const int ns = std::min(4, 1 << n);
        for (int s = 0; s < instances; ++s) {
            const Params ts = sys.theta_star(m, derive_seed(run.seed, 100 * n + s));
            const Params th = sample_hypercube({Params(m, 0.0), kPi}, derive_seed(run.seed, 9000 + 100 * n + s), 1)[0];
            LossContext hst(a, ts, h, dt, StateVector(n), LossKind::unitary_hst);
            LossContext bell(a, ts, h, dt, StateVector(n), LossKind::unitary_bell);
            const double lh = hst.loss(th), lb = bell.loss(th);
            t.add_numbers({0, double(n), 0, lh, lb, std::abs(lh - lb)});
            const auto ds = sample_stabilizer_dataset(n, ns, derive_seed(run.seed, 11000 + 100 * n + s), true);
            LossContext q(a, ts, h, dt, StateVector(n), LossKind::qml, ds);
            const double lq = q.loss(th), lc = qml_loss_composite(q, th);
            t.add_numbers({1, double(n), double(ns), lq, lc, std::abs(lq - lc)});
        }
    }
    for (int n : overlap_n)
        for (int k : overlap_ns) {
            const OverlapProbability p = first_gate_overlap_probability(
                n, k, draws, derive_seed(run.seed, 20000 + 100 * n + k));
            const double ref = 1.0 - k / std::pow(3.0, n);
            t.add_numbers({2, double(n), double(k), p.diagonal, ref, p.diagonal - ref});
            t.add_numbers({3, double(n), double(k), p.exact_trace, ref, p.exact_trace - ref});
        }
    run.add_csv("unitary-suite.csv", t);
    run.results["check_codes"] = {{"0", "unitary_hst vs unitary_bell"},
                                  {"1", "qml vs composite form, orthogonal dataset"},
                                  {"2", "Pr(diagonal overlap = 0), global Pauli"},
                                  {"3", "Pr(exact composite trace = 0), information only"}};
}

void cmd_selftest(Run &run) {
    run.cfg.check_unused();
    const auto checks = run_selftest();
    CsvTable t({"check", "passed", "detail"});
    bool ok = true;
    for (const auto &c : checks) {
        run.log << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
        t.add_row({c.name, b01(c.passed), c.detail});
        ok = ok && c.passed;
    }
    run.add_csv("selftest.csv", t);
    run.results["passed"] = ok;
    if (!ok) throw NumericError("selftest failed");
}

using Handler = void (*)(Run &);

const std::vector<std::pair<std::string, Handler>> &handlers() {
    static const std::vector<std::pair<std::string, Handler>> h{
        {"variance-sweep", cmd_variance_sweep}, {"variance-vs-dt", cmd_variance_vs_dt},
        {"bounds", cmd_bounds},                 {"adiabatic-track", cmd_adiabatic_track},
        {"minima-cut", cmd_minima_cut},         {"landscape-2d", cmd_landscape_2d},
        {"grad-path", cmd_grad_path},           {"compress", cmd_compress},
        {"ite-suite", cmd_ite_suite},           {"unitary-suite", cmd_unitary_suite},
        {"selftest", cmd_selftest}};
    return h;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_echo(const Config &cfg) {
    json j = json::object();
    for (const auto &[sec, keys] : cfg.sections()) {
        json s = json::object();
        for (const auto &[k, e] : keys) s[k] = e.value;
        j[sec.empty() ? "global" : sec] = s;
    }
    return j;
}

} // namespace

const std::vector<std::string> &subcommand_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto &[n, h] : handlers()) v.push_back(n);
        return v;
    }();
    return names;
}

int run_subcommand(const std::string &name, const Config &cfg, const RunOptions &opts,
                   std::ostream &log) {
    const auto it = std::find_if(handlers().begin(), handlers().end(),
                                 [&](const auto &p) { return p.first == name; });
    if (it == handlers().end()) {
        log << "error: unknown subcommand '" << name << "'\n";
        return kExitValidation;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const std::uint64_t cfg_seed = cfg.get_u64("run", "seed", 1);
        const std::uint64_t seed = opts.seed ? *opts.seed : cfg_seed;
        Run run{cfg, opts, seed, log, {}, {}, json::object()};
        run.comment = "seed=" + std::to_string(seed) + ", git=" + opts.git + ", config=" + cfg.source() +
                      ", time=" + utc_now();
        it->second(run);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        namespace fs = std::filesystem;
        fs::create_directories(opts.outdir);
        json meta = {{"subcommand", name},
                     {"seed", seed},
                     {"git", opts.git},
                     {"config_source", cfg.source()},
                     {"config", config_echo(cfg)},
                     {"long_run", opts.long_run},
                     {"threads", thread_count()},
                     {"duration_seconds", secs},
                     {"outputs", json::array()},
                     {"results", run.results}};
        for (const auto &[file, body] : run.files) {
            const fs::path p = fs::path(opts.outdir) / file;
            std::ofstream out(p, std::ios::binary);
            out << body;
            if (!out) throw ValidationError("cannot write '" + p.string() + "'");
            meta["outputs"].push_back(file);
        }
        std::ofstream mo(fs::path(opts.outdir) / (name + ".meta.json"));
        mo << meta.dump(2) << '\n';
        log << name << ": wrote " << run.files.size() << " file(s) to " << opts.outdir << " in " << secs
            << " s\n";
        return kExitOk;
    } catch (const ValidationError &e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericError &e) {
        log << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception &e) {
        log << "failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}

} // namespace warmstart
