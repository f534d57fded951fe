#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairshare/cmdp.hpp"
#include "fairshare/lpcore.hpp"

namespace fairshare {

/// Lower bound for the per-user net contribution: C_i >= -delta, or no
/// fairness rows at all. Represented explicitly, never as a large number.
struct FairnessBound {
    std::optional<double> delta;  // nullopt = unconstrained

    static FairnessBound exact() { return {0.0}; }
    static FairnessBound relaxed(double d) { return {d}; }
    static FairnessBound unconstrained() { return {std::nullopt}; }
    bool enabled() const { return delta.has_value(); }
};

/// Stationary probability mass over (state, action) pairs. Holds a pointer
/// to the instance it was built for; the instance must outlive the measure.
struct OccupationMeasure {
    const CmdpInstance* instance = nullptr;
    std::vector<std::vector<double>> mass;  // [state][action index], clamped at 0

    double state_mass(int s) const;
    double total_mass() const;
    /// Max inflow-outflow imbalance over states (stationarity residual).
    double stationarity_residual() const;
};

struct Marginals {
    std::vector<double> contributions;    // C_i = sum rho(s,a) a_i
    std::vector<double> llr;              // LLR_i = sum rho(s,a) 1{x_i<0}(a_i - x_i)
    std::vector<double> state_marginal;   // rho(x,b)
    std::vector<double> battery_marginal; // rho(b)
};

struct SolveReport {
    std::string problem;  // "P", "P_delta", or "F"
    double objective = 0.0;
    std::optional<double> delta;
    std::vector<double> llr_per_user;
    std::vector<double> contributions;
    std::vector<double> battery_marginal;
    OccupationMeasure measure;
    long lp_iterations = 0;
    double lp_residual = 0.0;

    double llr_sys() const;
    nlohmann::json to_json() const;
};

/// LP for (P): minimize expected lost load over occupation measures subject
/// to mass/stationarity and C_i >= -delta per user.
LinearProgram build_lp_p(const CmdpInstance& instance, const FairnessBound& fairness);

/// LP for (F): maximize theta subject to theta <= C_i over efficient-mode
/// occupation measures; theta is the single free variable (last index).
LinearProgram build_lp_f(const CmdpInstance& instance);

SolveReport solve_p(const CmdpInstance& instance, const FairnessBound& fairness,
                    const LpTolerances& tol = {});
SolveReport solve_f(const CmdpInstance& instance, const LpTolerances& tol = {});

Marginals occupation_marginals(const OccupationMeasure& rho);

}  // namespace fairshare
