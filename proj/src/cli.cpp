#include "delaystab/cli.hpp"

#include "delaystab/errors.hpp"
#include "delaystab/report.hpp"
#include "delaystab/spec_io.hpp"
#include "delaystab/sweep.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace delaystab {

using nlohmann::json;

namespace {

struct Options {
    std::string file;
    std::optional<std::string> criterion;
    std::optional<double> tol;
    std::optional<double> t_end;
    std::optional<double> step;
    std::string out;
    bool simulate = false;
    std::string param;
    std::string values;
    std::string threshold;
    unsigned threads = 0;
};

double resolve_tol(const Options& o) {
    if (o.tol) {
        if (!(*o.tol > 0.0) || !std::isfinite(*o.tol)) throw InputError("--tol must be a positive number");
        return *o.tol;
    }
    if (const char* env = std::getenv("DELAYSTAB_TOL"); env && *env) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (*end != '\0' || !(v > 0.0) || !std::isfinite(v))
            throw InputError(std::string("DELAYSTAB_TOL must be a positive number, got '") + env + "'");
        return v;
    }
    return kDefaultTol;
}

std::string read_text(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError(file + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json header(const std::string& command, const SystemDocument& doc, double tol) {
    return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
            {"command", command},
            {"input", to_json(doc)},
            {"input_hash", input_hash(doc)},
            {"tolerance", tol}};
}

bool is_network(const SystemDocument& doc) { return doc.kind == SystemKind::bam || doc.kind == SystemKind::two_neuron; }

// "0,2,4" or "start:stop:step" (inclusive of stop up to rounding).
std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    auto number = [&](const std::string& s) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end != '\0' || !std::isfinite(v)) throw InputError("--values: bad number '" + s + "'");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw InputError("--values range must be start:stop:step");
        const double a = number(parts[0]), b = number(parts[1]), h = number(parts[2]);
        if (!(h > 0.0) || b < a) throw InputError("--values range needs step > 0 and stop ≥ start");
        const auto count = static_cast<std::size_t>(std::floor((b - a) / h + 1e-9));
        if (count > 100000) throw InputError("--values range is too long");
        for (std::size_t k = 0; k <= count; ++k) out.push_back(a + static_cast<double>(k) * h);
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
    if (out.empty()) throw InputError("--values is empty");
    return out;
}

void check_step(const SystemDocument& doc, const SimConfig& cfg) {
    const double shortest = concrete_system(doc).min_positive_delay_bound();
    if (std::isfinite(shortest) && cfg.h > shortest / 10.0 * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "step " << cfg.h << " exceeds a tenth of the smallest delay bound " << shortest;
        throw InputError(msg.str());
    }
}

// Runs the simulation and summarizes it; a blow-up is reported, not thrown.
json simulation_summary(const SystemDocument& doc, const SimConfig& cfg, const Vector& reference,
                        Trajectory* keep = nullptr) {
    json s = {{"t_end", cfg.t_end}, {"step", cfg.h}, {"record_every", cfg.record_every}};
    Trajectory traj;
    try {
        traj = simulate(concrete_system(doc), cfg);
    } catch (const SimulationError& e) {
        s["completed"] = false;
        s["error"] = e.what();
        s["failure_time"] = e.time;
        return s;
    }
    s["completed"] = true;
    s["steps"] = traj.steps;
    s["records"] = traj.times.size();
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(traj.spec_hash));
    s["system_hash"] = hash;
    s["reference"] = reference;
    double worst = 0.0, last = 0.0;
    for (const auto& x : traj.states) {
        last = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) last = std::max(last, std::abs(x[i] - reference[i]));
        worst = std::max(worst, last);
    }
    s["final_deviation"] = last;
    s["max_deviation"] = worst;
    try {
        s["decay_fit"] = to_json(fit_decay(traj, reference));
    } catch (const FitInapplicableError& e) {
        s["decay_fit"] = nullptr;
        s["decay_fit_error"] = e.what();
    }
    if (keep) *keep = std::move(traj);
    return s;
}

void write_csv_file(const Trajectory& traj, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError(path + ": cannot open for writing");
    write_csv(traj, f);
    if (!f) throw InputError(path + ": write failed");
}

void print_verdicts(std::ostream& err, const std::vector<StabilityVerdict>& verdicts) {
    for (const auto& v : verdicts) {
        err << "  " << std::left << std::setw(14) << v.criterion << to_string(v.status);
        double worst = INFINITY;
        std::string name;
        for (const auto& m : v.margins)
            if (m.slack < worst) {
                worst = m.slack;
                name = m.name;
            }
        if (!name.empty()) err << "  (tightest " << name << " slack " << worst << ")";
        err << '\n';
    }
}

// ---------------------------------------------------------------------------------------

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
    const double tol = resolve_tol(o);
    const SystemDocument doc = load_document(o.file);
    const auto verdicts = applicable_verdicts(doc, tol);
    const StabilityVerdict& selected = select_verdict(verdicts, o.criterion);

    json report = header("analyze", doc, tol);
    report["verdicts"] = json::array();
    for (const auto& v : verdicts) report["verdicts"].push_back(to_json(v));
    report["selected"] = {{"criterion", selected.criterion}, {"status", std::string(to_string(selected.status))}};

    try {
        report["decay_certificate"] = to_json(certify_decay_rate(certification_spec(doc), tol));
    } catch (const NotCertifiedError& e) {
        report["decay_certificate"] = nullptr;
        report["decay_certificate_error"] = e.what();
    }

    Vector reference(doc.dimension(), 0.0);
    if (is_network(doc)) {
        const BamSpec bam = as_bam(doc);
        const BamDynamics dyn = as_bam_dynamics(doc);
        report["existence"] = to_json(equilibrium_exists(bam));
        try {
            const Equilibrium eq = solve_equilibrium(bam, dyn.f, dyn.g);
            report["equilibrium"] = to_json(eq);
            reference = eq.x_star;
            reference.insert(reference.end(), eq.y_star.begin(), eq.y_star.end());
        } catch (const DivergenceError& e) {
            report["equilibrium"] = nullptr;
            report["equilibrium_error"] = e.what();
        }
    }

    if (o.simulate || !o.out.empty()) {
        SimConfig cfg = simulation_config(doc, o.t_end, o.step);
        check_step(doc, cfg);
        Trajectory traj;
        report["simulation"] = simulation_summary(doc, cfg, reference, &traj);
        if (!o.out.empty() && report["simulation"]["completed"].get<bool>()) {
            write_csv_file(traj, o.out);
            report["simulation"]["csv"] = o.out;
        }
    }

    const int code = exit_code_of(report);
    report["exit_code"] = code;
    out << report.dump(2) << '\n';

    err << "analyze " << o.file << " (" << to_string(doc.kind) << ", tol " << tol << ")\n";
    print_verdicts(err, verdicts);
    if (report["decay_certificate"].is_object())
        err << "  certified decay rate λ₀ = " << report["decay_certificate"]["lambda0"].get<double>() << '\n';
    err << "  selected " << selected.criterion << ": " << to_string(selected.status) << '\n';
    return code;
}

int cmd_certify_rate(const Options& o, std::ostream& out, std::ostream& err) {
    const double tol = resolve_tol(o);
    const SystemDocument doc = load_document(o.file);
    json report = header("certify-rate", doc, tol);
    int code = kExitStable;
    try {
        const DecayCertificate c = certify_decay_rate(certification_spec(doc), tol);
        report["decay_certificate"] = to_json(c);
        err << "certified decay rate λ₀ = " << std::setprecision(12) << c.lambda0 << " (fails at "
            << c.lambda_fail << ")\n";
    } catch (const NotCertifiedError& e) {
        report["decay_certificate"] = nullptr;
        report["error"] = e.what();
        err << e.what() << '\n';
        code = kExitInconclusive;
    }
    report["exit_code"] = code;
    out << report.dump(2) << '\n';
    return code;
}

int cmd_equilibrium(const Options& o, std::ostream& out, std::ostream& err) {
    const double tol = resolve_tol(o);
    const SystemDocument doc = load_document(o.file);
    if (!is_network(doc)) throw InputError("equilibrium applies to bam and two_neuron systems only");
    const BamSpec bam = as_bam(doc);
    const BamDynamics dyn = as_bam_dynamics(doc);
    json report = header("equilibrium", doc, tol);
    report["existence"] = to_json(equilibrium_exists(bam));
    int code = kExitStable;
    try {
        EquilibriumOptions opts;
        opts.tol = tol;
        const Equilibrium eq = solve_equilibrium(bam, dyn.f, dyn.g, opts);
        report["equilibrium"] = to_json(eq);
        err << std::setprecision(12) << "x* =";
        for (double x : eq.x_star) err << ' ' << x;
        err << "\ny* =";
        for (double y : eq.y_star) err << ' ' << y;
        err << "\nresidual " << eq.residual << " after " << eq.iterations << " iterations\n";
    } catch (const DivergenceError& e) {
        report["equilibrium"] = nullptr;
        report["error"] = e.what();
        err << e.what() << '\n';
        code = kExitInconclusive;
    }
    report["exit_code"] = code;
    out << report.dump(2) << '\n';
    return code;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const SystemDocument doc = load_document(o.file);
    const SimConfig cfg = simulation_config(doc, o.t_end, o.step);
    check_step(doc, cfg);
    const Vector reference = reference_state(doc);
    Trajectory traj;
    json summary = simulation_summary(doc, cfg, reference, &traj);
    const bool completed = summary["completed"].get<bool>();
    const int code = completed ? kExitStable : kExitInconclusive;
    summary["exit_code"] = code;
    if (o.out.empty()) {
        if (completed) write_csv(traj, out);
        err << summary.dump(2) << '\n';
    } else {
        if (completed) {
            write_csv_file(traj, o.out);
            summary["csv"] = o.out;
        }
        out << summary.dump(2) << '\n';
        err << "simulate " << o.file << ": " << (completed ? "wrote " + o.out : summary["error"].get<std::string>())
            << '\n';
    }
    return code;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const double tol = resolve_tol(o);
    const std::string text = read_text(o.file);
    const SystemDocument base = parse_document(text, o.file);
    const std::vector<double> values = parse_values(o.values);
    // A path that addresses no number is a usage error, not a per-row failure.
    patch_number(text, o.param, 0.0);

    auto instance = [&](double v) {
        return parse_document(patch_number(text, o.param, v), o.file + " [" + o.param + "=" + std::to_string(v) + "]");
    };
    auto row = [&](std::size_t k) {
        SweepRow r;
        r.value = values[k];
        const SystemDocument doc = instance(values[k]);
        const auto verdicts = applicable_verdicts(doc, tol);
        const StabilityVerdict& v = select_verdict(verdicts, o.criterion);
        r.status = v.status;
        r.criterion = v.criterion;
        try {
            r.lambda0 = certify_decay_rate(certification_spec(doc), tol).lambda0;
        } catch (const NotCertifiedError&) {
        }
        Vector reference = reference_state(doc);
        if (is_network(doc)) r.equilibrium = reference;
        if (o.simulate) {
            const SimConfig cfg = simulation_config(doc, o.t_end, o.step);
            check_step(doc, cfg);
            Trajectory traj = simulate(concrete_system(doc), cfg);
            try {
                r.lambda_hat = fit_decay(traj, reference).lambda_hat;
            } catch (const FitInapplicableError&) {
            }
        }
        return r;
    };
    std::vector<SweepRow> rows = parallel_rows(values.size(), o.threads, row);
    for (std::size_t k = 0; k < values.size(); ++k) rows[k].value = values[k];

    json report = header("sweep", base, tol);
    report["parameter"] = o.param;
    report["rows"] = json::array();
    bool all_stable = true;
    for (const auto& r : rows) {
        report["rows"].push_back(to_json(r));
        all_stable = all_stable && r.status == Status::stable_certified;
    }
    report["all_stable"] = all_stable;

    if (!o.threshold.empty()) {
        const std::vector<double> ends = parse_values(o.threshold);
        if (ends.size() != 2) throw InputError("--threshold needs PASS,FAIL");
        auto holds = [&](double v) {
            try {
                const SystemDocument doc = instance(v);
                return select_verdict(applicable_verdicts(doc, tol), o.criterion).stable();
            } catch (const InputError&) {
                return false;  // the parameter left the valid range
            }
        };
        try {
            const Threshold t = bisect_threshold(holds, ends[0], ends[1]);
            report["threshold"] = {{"last_pass", t.last_pass}, {"first_fail", t.first_fail}, {"iterations", t.iterations}};
        } catch (const PreconditionError& e) {
            throw InputError(std::string("--threshold: ") + e.what());
        }
    }

    report["selected"] = {{"criterion", o.criterion.value_or("best")},
                          {"status", std::string(to_string(all_stable ? Status::stable_certified : Status::inconclusive))}};
    const int code = exit_code_of(report);
    report["exit_code"] = code;
    out << report.dump(2) << '\n';

    err << "sweep " << o.param << " over " << values.size() << " values\n";
    for (const auto& r : rows) {
        err << "  " << std::setw(12) << r.value << "  "
            << (r.status ? std::string(to_string(*r.status)) : "error: " + r.error);
        if (r.lambda0) err << "  λ₀ = " << *r.lambda0;
        if (r.lambda_hat) err << "  λ̂ = " << *r.lambda_hat;
        err << '\n';
    }
    if (report.contains("threshold"))
        err << "  first failing value ≈ " << std::setprecision(12) << report["threshold"]["first_fail"].get<double>()
            << '\n';
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exponential stability analysis of delay differential systems", "delaystab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    Options o;

    auto add_file = [&](CLI::App* sub) { sub->add_option("spec", o.file, "System file (JSON)")->required(); };
    auto add_tol = [&](CLI::App* sub) {
        sub->add_option("--tol", o.tol, "Tolerance (default 1e-12, or DELAYSTAB_TOL)");
    };
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--t-end", o.t_end, "Simulation end time");
        sub->add_option("--step", o.step, "Fixed integration step");
    };

    auto* analyze = app.add_subcommand("analyze", "Run every applicable stability criterion");
    add_file(analyze);
    add_tol(analyze);
    analyze->add_option("--criterion", o.criterion, "Criterion that decides the exit status");
    analyze->add_flag("--simulate", o.simulate, "Also simulate and fit the decay rate");
    add_sim(analyze);
    analyze->add_option("--out", o.out, "Write the simulated trajectory as CSV");

    auto* certify = app.add_subcommand("certify-rate", "Certify an exponential decay rate");
    add_file(certify);
    add_tol(certify);

    auto* equilibrium = app.add_subcommand("equilibrium", "Solve for the network equilibrium");
    add_file(equilibrium);
    add_tol(equilibrium);

    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate the system and write CSV");
    add_file(simulate_cmd);
    add_sim(simulate_cmd);
    simulate_cmd->add_option("--out", o.out, "CSV file (standard output when omitted)");

    auto* sweep_cmd = app.add_subcommand("sweep", "Analyze the system over values of one parameter");
    add_file(sweep_cmd);
    add_tol(sweep_cmd);
    sweep_cmd->add_option("--param", o.param, "Number to vary: JSON pointer or dotted path")->required();
    sweep_cmd->add_option("--values", o.values, "Comma list or start:stop:step")->required();
    sweep_cmd->add_option("--criterion", o.criterion, "Criterion that decides each row");
    sweep_cmd->add_option("--threshold", o.threshold, "PASS,FAIL: bisect for the first failing value");
    sweep_cmd->add_flag("--simulate", o.simulate, "Also simulate each row and fit the decay rate");
    sweep_cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    add_sim(sweep_cmd);

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitStable : kExitInputError;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(o, out, err);
        if (certify->parsed()) return cmd_certify_rate(o, out, err);
        if (equilibrium->parsed()) return cmd_equilibrium(o, out, err);
        if (simulate_cmd->parsed()) return cmd_simulate(o, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(o, out, err);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const Error& e) {
        // a numerical failure on valid input: nothing could be certified
        err << "error: " << e.what() << '\n';
        return kExitInconclusive;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}

}  // namespace delaystab
