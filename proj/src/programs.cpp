#include "fairshare/programs.hpp"

#include <cmath>
#include <numeric>

namespace fairshare {

namespace {

// Variables are rho(s,a) in state-major, lexicographic-action order.
std::vector<int> variable_offsets(const CmdpInstance& inst) {
    std::vector<int> offsets(inst.state_count() + 1, 0);
    for (int s = 0; s < inst.state_count(); ++s)
        offsets[s + 1] = offsets[s] + static_cast<int>(inst.action_sets[s].size());
    return offsets;
}

void add_measure_constraints(const CmdpInstance& inst, const std::vector<int>& offsets,
                             LinearProgram& lp) {
    const int nvars = offsets.back();

    LinearRow mass;
    mass.name = "mass";
    mass.rhs = 1.0;
    for (int v = 0; v < nvars; ++v) mass.coeffs.emplace_back(v, 1.0);
    lp.equalities.push_back(std::move(mass));

    // Stationarity: for each target state t,
    //   sum_a rho(t,a) - sum_{s,a} rho(s,a) P(t|s,a) = 0.
    std::vector<LinearRow> stat(inst.state_count());
    for (int t = 0; t < inst.state_count(); ++t) {
        stat[t].name = "stat_" + std::to_string(t);
        stat[t].rhs = 0.0;
    }
    std::vector<std::vector<double>> dense(inst.state_count(), std::vector<double>(nvars, 0.0));
    for (int s = 0; s < inst.state_count(); ++s) {
        const int xs = inst.chain_state_of(s);
        for (int a = 0; a < static_cast<int>(inst.action_sets[s].size()); ++a) {
            const int var = offsets[s] + a;
            dense[s][var] += 1.0;
            const int b_next = inst.battery_after(s, inst.action_sets[s][a]);
            for (int xt = 0; xt < inst.chain.state_count(); ++xt) {
                double p = inst.chain.kernel(xs, xt);
                if (p > 0.0) dense[inst.state_index(xt, b_next)][var] -= p;
            }
        }
    }
    for (int t = 0; t < inst.state_count(); ++t) {
        for (int v = 0; v < nvars; ++v)
            if (dense[t][v] != 0.0) stat[t].coeffs.emplace_back(v, dense[t][v]);
        lp.equalities.push_back(std::move(stat[t]));
    }
}

OccupationMeasure measure_from_primal(const CmdpInstance& inst, const std::vector<int>& offsets,
                                      const std::vector<double>& primal) {
    OccupationMeasure rho;
    rho.instance = &inst;
    rho.mass.resize(inst.state_count());
    for (int s = 0; s < inst.state_count(); ++s) {
        rho.mass[s].resize(inst.action_sets[s].size());
        for (int a = 0; a < static_cast<int>(inst.action_sets[s].size()); ++a) {
            double v = primal[offsets[s] + a];
            if (v < -1e-9)
                throw InternalError("occupation mass below -1e-9");
            rho.mass[s][a] = std::max(v, 0.0);
        }
    }
    return rho;
}

}  // namespace

double OccupationMeasure::state_mass(int s) const {
    return std::accumulate(mass[s].begin(), mass[s].end(), 0.0);
}

double OccupationMeasure::total_mass() const {
    double t = 0.0;
    for (int s = 0; s < static_cast<int>(mass.size()); ++s) t += state_mass(s);
    return t;
}

double OccupationMeasure::stationarity_residual() const {
    const CmdpInstance& inst = *instance;
    std::vector<double> inflow(inst.state_count(), 0.0);
    for (int s = 0; s < inst.state_count(); ++s) {
        const int xs = inst.chain_state_of(s);
        for (int a = 0; a < static_cast<int>(mass[s].size()); ++a) {
            if (mass[s][a] == 0.0) continue;
            const int b_next = inst.battery_after(s, inst.action_sets[s][a]);
            for (int xt = 0; xt < inst.chain.state_count(); ++xt)
                inflow[inst.state_index(xt, b_next)] += mass[s][a] * inst.chain.kernel(xs, xt);
        }
    }
    double worst = 0.0;
    for (int s = 0; s < inst.state_count(); ++s)
        worst = std::max(worst, std::abs(inflow[s] - state_mass(s)));
    return worst;
}

LinearProgram build_lp_p(const CmdpInstance& instance, const FairnessBound& fairness) {
    if (instance.mode != ActionMode::full)
        throw ModeMismatch("build_lp_p: instance must be in full mode");
    if (fairness.enabled() && *fairness.delta < 0.0)
        throw WrongShape("build_lp_p: delta must be nonnegative");

    const auto offsets = variable_offsets(instance);
    LinearProgram lp;
    lp.sense = Sense::minimize;
    for (int s = 0; s < instance.state_count(); ++s)
        for (int a = 0; a < static_cast<int>(instance.action_sets[s].size()); ++a)
            lp.add_variable("rho_" + std::to_string(s) + "_" + std::to_string(a));
    for (int s = 0; s < instance.state_count(); ++s)
        for (int a = 0; a < static_cast<int>(instance.action_sets[s].size()); ++a)
            lp.objective[offsets[s] + a] = instance.cost(s, instance.action_sets[s][a]);

    add_measure_constraints(instance, offsets, lp);

    if (fairness.enabled()) {
        for (int i = 0; i < instance.chain.user_count(); ++i) {
            LinearRow fc;
            fc.name = "fc_" + std::to_string(i);
            fc.rhs = -*fairness.delta;
            for (int s = 0; s < instance.state_count(); ++s)
                for (int a = 0; a < static_cast<int>(instance.action_sets[s].size()); ++a) {
                    double coef = instance.action_sets[s][a][i];
                    if (coef != 0.0) fc.coeffs.emplace_back(offsets[s] + a, coef);
                }
            lp.inequalities.push_back(std::move(fc));
        }
    }
    return lp;
}

LinearProgram build_lp_f(const CmdpInstance& instance) {
    if (instance.mode != ActionMode::efficient)
        throw ModeMismatch("build_lp_f: instance must be in efficient mode");

    const auto offsets = variable_offsets(instance);
    LinearProgram lp;
    lp.sense = Sense::maximize;
    for (int s = 0; s < instance.state_count(); ++s)
        for (int a = 0; a < static_cast<int>(instance.action_sets[s].size()); ++a)
            lp.add_variable("rho_" + std::to_string(s) + "_" + std::to_string(a));
    const int theta = lp.add_variable("theta", /*free_var=*/true);
    lp.objective[theta] = 1.0;

    add_measure_constraints(instance, offsets, lp);

    // theta <= C_i, i.e. C_i - theta >= 0.
    for (int i = 0; i < instance.chain.user_count(); ++i) {
        LinearRow row;
        row.name = "maxmin_" + std::to_string(i);
        row.rhs = 0.0;
        for (int s = 0; s < instance.state_count(); ++s)
            for (int a = 0; a < static_cast<int>(instance.action_sets[s].size()); ++a) {
                double coef = instance.action_sets[s][a][i];
                if (coef != 0.0) row.coeffs.emplace_back(offsets[s] + a, coef);
            }
        row.coeffs.emplace_back(theta, -1.0);
        lp.inequalities.push_back(std::move(row));
    }
    return lp;
}

SolveReport solve_p(const CmdpInstance& instance, const FairnessBound& fairness,
                    const LpTolerances& tol) {
    LinearProgram lp = build_lp_p(instance, fairness);
    LpSolution sol = solve_lp(lp, tol);
    if (sol.status == LpStatus::infeasible)
        throw InternalError("solve_p: LP reported infeasible, which cannot happen for delta >= 0");
    if (sol.status == LpStatus::unbounded)
        throw InternalError("solve_p: LP reported unbounded");

    SolveReport rep;
    rep.problem = !fairness.enabled() ? "P" : (*fairness.delta == 0.0 ? "P" : "P_delta");
    rep.delta = fairness.delta;
    rep.objective = sol.objective;
    rep.measure = measure_from_primal(instance, variable_offsets(instance), sol.primal);
    Marginals marg = occupation_marginals(rep.measure);
    rep.llr_per_user = marg.llr;
    rep.contributions = marg.contributions;
    rep.battery_marginal = marg.battery_marginal;
    rep.lp_iterations = sol.iterations;
    rep.lp_residual = sol.max_residual;
    return rep;
}

SolveReport solve_f(const CmdpInstance& instance, const LpTolerances& tol) {
    LinearProgram lp = build_lp_f(instance);
    LpSolution sol = solve_lp(lp, tol);
    if (sol.status != LpStatus::optimal)
        throw InternalError("solve_f: LP not optimal (mass is bounded, so this is a solver fault)");

    SolveReport rep;
    rep.problem = "F";
    rep.objective = sol.objective;  // theta*
    sol.primal.pop_back();          // drop theta; the rest is the measure
    rep.measure = measure_from_primal(instance, variable_offsets(instance), sol.primal);
    Marginals marg = occupation_marginals(rep.measure);
    rep.llr_per_user = marg.llr;
    rep.contributions = marg.contributions;
    rep.battery_marginal = marg.battery_marginal;
    rep.lp_iterations = sol.iterations;
    rep.lp_residual = sol.max_residual;
    return rep;
}

Marginals occupation_marginals(const OccupationMeasure& rho) {
    const CmdpInstance& inst = *rho.instance;
    const int n = inst.chain.user_count();
    Marginals out;
    out.contributions.assign(n, 0.0);
    out.llr.assign(n, 0.0);
    out.state_marginal.assign(inst.state_count(), 0.0);
    out.battery_marginal.assign(inst.b_max + 1, 0.0);
    for (int s = 0; s < inst.state_count(); ++s) {
        const auto& x = inst.generation_of(s);
        for (int a = 0; a < static_cast<int>(rho.mass[s].size()); ++a) {
            const double w = rho.mass[s][a];
            if (w == 0.0) continue;
            const Action& act = inst.action_sets[s][a];
            out.state_marginal[s] += w;
            out.battery_marginal[inst.battery_of(s)] += w;
            for (int i = 0; i < n; ++i) {
                out.contributions[i] += w * act[i];
                if (x[i] < 0) out.llr[i] += w * (act[i] - x[i]);
            }
        }
    }
    return out;
}

double SolveReport::llr_sys() const {
    return std::accumulate(llr_per_user.begin(), llr_per_user.end(), 0.0);
}

nlohmann::json SolveReport::to_json() const {
    nlohmann::json j;
    j["problem"] = problem;
    j["objective"] = objective;
    if (delta)
        j["delta"] = *delta;
    else
        j["delta"] = nullptr;
    j["llr_per_user"] = llr_per_user;
    j["contributions"] = contributions;
    j["battery_marginal"] = battery_marginal;
    j["diagnostics"] = {{"lp_iterations", lp_iterations},
                        {"lp_residual", lp_residual},
                        {"stationarity_residual", measure.stationarity_residual()},
                        {"total_mass", measure.total_mass()}};
    return j;
}

}  // namespace fairshare
