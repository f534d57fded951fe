// Command-line front end: loads a JSON run configuration, dispatches one of
// the toolkit commands, and writes JSON/CSV reports.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "fairshare/analysis.hpp"
#include "fairshare/config.hpp"
#include "fairshare/sim.hpp"

namespace {

using namespace fairshare;

int log_level() {
    static int level = [] {
        const char* env = std::getenv("FAIRSHARE_LOG");
        if (!env) return 0;
        std::string v(env);
        if (v == "debug") return 2;
        if (v == "info") return 1;
        return 0;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

void write_json(const std::string& path, const nlohmann::json& j) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw WrongShape("cannot open output path '" + path + "'");
    out << j.dump(2) << "\n";
    log_info("wrote " + path);
}

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string csv_path;
    int b_max_override = -1;

    RunConfig load() const {
        RunConfig cfg = RunConfig::load(config_path);
        if (b_max_override >= 0) cfg.b_max = b_max_override;
        if (!out_path.empty()) cfg.output = out_path;
        if (!csv_path.empty()) cfg.csv_output = csv_path;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", args.out_path, "JSON report path (overrides config)");
    cmd->add_option("--csv", args.csv_path, "CSV output path (overrides config)");
    cmd->add_option("--bmax", args.b_max_override, "battery size (overrides config)");
}

int require_b_max(const RunConfig& cfg) {
    if (!cfg.b_max) throw WrongShape("this command needs b_max (config field or --bmax)");
    return *cfg.b_max;
}

int run_solve_p(const RunConfig& cfg, const std::optional<double>& delta_flag, bool no_fairness) {
    JointChain chain = cfg.build_chain();
    CmdpInstance inst = build_instance(chain, require_b_max(cfg), ActionMode::full);
    FairnessBound fb = FairnessBound::exact();
    if (no_fairness || cfg.delta_unconstrained)
        fb = FairnessBound::unconstrained();
    else if (delta_flag)
        fb = FairnessBound::relaxed(*delta_flag);
    else if (cfg.delta)
        fb = FairnessBound::relaxed(*cfg.delta);
    SolveReport rep = solve_p(inst, fb, cfg.lp_tolerances());
    std::cout << "solve-p: objective " << rep.objective << " ("
              << (fb.enabled() ? "delta " + std::to_string(*fb.delta) : "unconstrained") << ")\n";
    write_json(cfg.output, rep.to_json());
    return 0;
}

int run_solve_f(const RunConfig& cfg) {
    JointChain chain = cfg.build_chain();
    CmdpInstance inst = build_instance(chain, require_b_max(cfg), ActionMode::efficient);
    SolveReport rep = solve_f(inst, cfg.lp_tolerances());
    std::cout << "solve-f: theta* " << rep.objective << "\n";
    write_json(cfg.output, rep.to_json());
    return 0;
}

int run_llr_e(const RunConfig& cfg) {
    JointChain chain = cfg.build_chain();
    double llr_e = compute_llr_e(chain, require_b_max(cfg));
    std::cout << "llr-e: " << llr_e << "\n";
    write_json(cfg.output, {{"llr_e", llr_e}, {"b_max", require_b_max(cfg)}});
    return 0;
}

int run_pof(const RunConfig& cfg) {
    JointChain chain = cfg.build_chain();
    nlohmann::json j;
    try {
        PofResult pof = price_of_fairness(chain, require_b_max(cfg));
        std::cout << "pof: " << pof.value << " (llr_o " << pof.llr_o << ", llr_e " << pof.llr_e << ")\n";
        j = {{"pof", pof.value}, {"llr_o", pof.llr_o}, {"llr_e", pof.llr_e}};
    } catch (const EfficientLLRZero& e) {
        std::cout << "pof: undefined (" << e.what() << ")\n";
        j = {{"pof", "inf or 0/0"}, {"llr_o", e.llr_o}, {"llr_e", e.llr_e}};
    }
    write_json(cfg.output, j);
    return 0;
}

int run_decay(const RunConfig& cfg) {
    JointChain chain = cfg.build_chain();
    if (cfg.b_grid.empty()) throw WrongShape("decay needs b_grid");
    DecayFit fit = decay_rate(
        [&](int b) {
            CmdpInstance inst = build_instance(chain, b, ActionMode::full);
            return solve_p(inst, FairnessBound::exact(), cfg.lp_tolerances()).objective;
        },
        cfg.b_grid);
    std::cout << "decay: slope " << fit.slope << ", R^2 " << fit.r_squared
              << (fit.exponential() ? " (exponential)" : "") << "\n";
    write_json(cfg.output, decay_to_json(fit));
    return 0;
}

int run_sweep(const RunConfig& cfg, const std::string& kind_name, int jobs) {
    SweepKind kind;
    if (kind_name == "pof_vs_b")
        kind = SweepKind::pof_vs_b;
    else if (kind_name == "fairness_vs_b")
        kind = SweepKind::fairness_vs_b;
    else if (kind_name == "frontier")
        kind = SweepKind::frontier;
    else
        throw WrongShape("unknown sweep kind '" + kind_name + "'");

    SweepSpec spec;
    spec.chain = cfg.build_chain();
    spec.b_grid = cfg.b_grid;
    spec.delta_grid = cfg.delta_grid;
    spec.jobs = jobs;
    if (kind == SweepKind::frontier) spec.frontier_b_max = require_b_max(cfg);

    auto rows = sweep(kind, spec);
    int failed = 0;
    for (const auto& r : rows)
        if (!r.error.empty()) {
            ++failed;
            std::cerr << "[warn] point " << r.abscissa << ": " << r.error << "\n";
        }
    std::cout << "sweep " << kind_name << ": " << rows.size() << " points, " << failed
              << " failed\n";
    if (!cfg.csv_output.empty()) {
        std::ofstream csv(cfg.csv_output);
        if (!csv) throw WrongShape("cannot open '" + cfg.csv_output + "'");
        write_sweep_csv(rows, csv);
        log_info("wrote " + cfg.csv_output);
    } else {
        write_sweep_csv(rows, std::cout);
    }
    write_json(cfg.output, sweep_to_json(rows));
    return 0;
}

int run_simulate(const RunConfig& cfg, const std::string& policy_kind) {
    JointChain chain = cfg.build_chain();
    const int b_max = require_b_max(cfg);

    CmdpInstance inst;
    StationaryPolicy policy;
    if (policy_kind == "greedy") {
        inst = build_instance(chain, b_max, ActionMode::efficient);
        policy = greedy_efficient_policy(inst, TieRule::lowest_index_first);
    } else if (policy_kind == "from-p" || policy_kind == "from-f") {
        bool from_p = policy_kind == "from-p";
        inst = build_instance(chain, b_max, from_p ? ActionMode::full : ActionMode::efficient);
        SolveReport rep = from_p ? solve_p(inst, cfg.delta_unconstrained
                                                     ? FairnessBound::unconstrained()
                                                     : FairnessBound::relaxed(cfg.delta.value_or(0.0)),
                                           cfg.lp_tolerances())
                                 : solve_f(inst, cfg.lp_tolerances());
        policy = extract_policy(rep.measure);
    } else {
        throw WrongShape("unknown policy '" + policy_kind + "'");
    }

    SimResult res = simulate_policy(policy, cfg.steps, cfg.seed);
    std::cout << "simulate: total LLR " << res.total_llr << " +- " << res.total_llr_se << " over "
              << res.steps << " steps\n";
    write_json(cfg.output, res.to_json());
    if (!cfg.csv_output.empty()) {
        std::ofstream csv(cfg.csv_output);
        if (!csv) throw WrongShape("cannot open '" + cfg.csv_output + "'");
        res.write_histogram_csv(csv);
    }
    return 0;
}

int run_validate(const RunConfig& cfg) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    JointChain chain = cfg.build_chain();
    check("stationary residual <= 1e-10",
          (chain.stationary.transpose() * chain.kernel - chain.stationary.transpose())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
    check("stationary sums to 1", std::abs(chain.stationary.sum() - 1.0) <= 1e-12);
    check("positive self-loops", chain.kernel.diagonal().minCoeff() > 0.0);
    double drift_sum = 0.0;
    for (double d : chain.user_drifts) drift_sum += d;
    check("system drift consistent", std::abs(drift_sum - chain.system_drift) <= 1e-12);

    const int b_max = require_b_max(cfg);
    CmdpInstance full = build_instance(chain, b_max, ActionMode::full);
    CmdpInstance eff = build_instance(chain, b_max, ActionMode::efficient);

    bool subset = true, invariant_successor = true;
    for (int s = 0; s < eff.state_count() && subset; ++s) {
        int expected = -1;
        for (const auto& a : eff.action_sets[s]) {
            if (full.action_index(s, a) < 0) subset = false;
            int next = eff.battery_after(s, a);
            if (expected < 0) expected = next;
            if (next != expected) invariant_successor = false;
        }
    }
    check("efficient actions are allowed actions", subset);
    check("efficient battery successor is action-independent", invariant_successor);

    SolveReport rp = solve_p(full, FairnessBound::exact(), cfg.lp_tolerances());
    check("(P) measure mass = 1", std::abs(rp.measure.total_mass() - 1.0) <= 1e-9);
    check("(P) stationarity residual <= 1e-8", rp.measure.stationarity_residual() <= 1e-8);
    double csum = 0.0, cmin = 0.0;
    for (double c : rp.contributions) {
        csum += c;
        cmin = std::min(cmin, c);
    }
    check("(P) work conservation", std::abs(csum) <= 1e-8);
    check("(P) fairness satisfied", cmin >= -1e-8);
    check("(P) Theorem-1 lower bound", rp.objective >= theorem1_bound(chain) - 1e-8);

    SolveReport rf = solve_f(eff, cfg.lp_tolerances());
    check("(F) theta* <= 0", rf.objective <= 1e-9);
    double llr_e = compute_llr_e(chain, b_max);
    double llr_unc = solve_p(full, FairnessBound::unconstrained(), cfg.lp_tolerances()).objective;
    check("LLR_e cross-method agreement", std::abs(llr_e - llr_unc) <= 1e-8);

    ExactEvaluation low = exact_evaluate(greedy_efficient_policy(eff, TieRule::lowest_index_first));
    ExactEvaluation prop = exact_evaluate(greedy_efficient_policy(eff, TieRule::proportional));
    check("tie-rule invariant state marginal",
          (low.state_distribution - prop.state_distribution).cwiseAbs().maxCoeff() <= 1e-9);
    check("tie-rule invariant total lost load",
          std::abs(low.total_lost_load - prop.total_lost_load) <= 1e-9);

    std::cout << (failures == 0 ? "validate: all checks passed\n"
                                : "validate: " + std::to_string(failures) + " check(s) failed\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shared-battery scheduling toolkit: fairness-constrained MDP solvers"};
    app.require_subcommand(1);

    CommonArgs args;
    std::optional<double> delta_flag;
    bool no_fairness = false;
    std::string sweep_kind = "pof_vs_b";
    std::string policy_kind = "greedy";
    std::string b_grid_flag, delta_grid_flag;
    int jobs = 1;

    auto* cmd_p = app.add_subcommand("solve-p", "minimum LLR under fairness C_i >= -delta");
    add_common(cmd_p, args);
    cmd_p->add_option("--delta", delta_flag, "fairness relaxation (default 0)");
    cmd_p->add_flag("--no-fairness", no_fairness, "drop the fairness rows");

    auto* cmd_f = app.add_subcommand("solve-f", "maxmin net contribution over efficient policies");
    add_common(cmd_f, args);

    auto* cmd_e = app.add_subcommand("llr-e", "efficient-policy loss of load rate");
    add_common(cmd_e, args);

    auto* cmd_pof = app.add_subcommand("pof", "price of fairness LLR_o / LLR_e");
    add_common(cmd_pof, args);

    auto* cmd_decay = app.add_subcommand("decay", "exponential decay fit of LLR_o over b_grid");
    add_common(cmd_decay, args);
    cmd_decay->add_option("--b-grid", b_grid_flag, "battery grid start:stop:step");

    auto* cmd_sweep = app.add_subcommand("sweep", "figure-style sweeps (CSV + JSON)");
    add_common(cmd_sweep, args);
    cmd_sweep->add_option("--kind", sweep_kind, "pof_vs_b | fairness_vs_b | frontier");
    cmd_sweep->add_option("--b-grid", b_grid_flag, "battery grid start:stop:step");
    cmd_sweep->add_option("--delta-grid", delta_grid_flag, "delta grid start:stop:step");
    cmd_sweep->add_option("--jobs", jobs, "sweep parallelism (ordering stays deterministic)");

    auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo policy validation");
    add_common(cmd_sim, args);
    cmd_sim->add_option("--policy", policy_kind, "greedy | from-p | from-f");

    auto* cmd_val = app.add_subcommand("validate", "run the invariant suite on the config");
    add_common(cmd_val, args);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = args.load();
        if (!b_grid_flag.empty()) cfg.b_grid = fairshare::parse_int_grid(b_grid_flag);
        if (!delta_grid_flag.empty()) cfg.delta_grid = fairshare::parse_grid(delta_grid_flag);

        if (cmd_p->parsed()) return run_solve_p(cfg, delta_flag, no_fairness);
        if (cmd_f->parsed()) return run_solve_f(cfg);
        if (cmd_e->parsed()) return run_llr_e(cfg);
        if (cmd_pof->parsed()) return run_pof(cfg);
        if (cmd_decay->parsed()) return run_decay(cfg);
        if (cmd_sweep->parsed()) return run_sweep(cfg, sweep_kind, jobs);
        if (cmd_sim->parsed()) return run_simulate(cfg, policy_kind);
        if (cmd_val->parsed()) return run_validate(cfg);
    } catch (const fairshare::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 1;
    } catch (const fairshare::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
