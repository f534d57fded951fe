#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <vector>

#include "fairshare/programs.hpp"

namespace fairshare {

enum class TieRule { lowest_index_first, proportional };
enum class Fallback { greedy_efficient, zero_action };

/// Per-state distribution over that state's action set. Holds a pointer to
/// the instance; the instance must outlive the policy.
struct StationaryPolicy {
    const CmdpInstance* instance = nullptr;
    std::vector<std::vector<double>> probs;  // [state][action index]

    nlohmann::json to_json() const;
};

struct ExactEvaluation {
    Eigen::VectorXd state_distribution;  // mu over instance states
    std::vector<double> llr_per_user;
    std::vector<double> contributions;
    double prob_empty = 0.0;   // P(B = 0)
    double prob_full = 0.0;    // P(B = b_max)
    double total_lost_load = 0.0;
};

/// phi(a|s) = rho(s,a)/rho(s) where rho(s) > 1e-12; the fallback rule
/// covers zero-mass states (default: the deterministic greedy efficient
/// action, which keeps transient states well defined).
StationaryPolicy extract_policy(const OccupationMeasure& rho,
                                Fallback fallback = Fallback::greedy_efficient);

/// Reference efficient policy. lowest_index_first resolves E2/E3 splits
/// deterministically in user order; proportional splits by |x_i| with
/// largest-remainder rounding, randomizing uniformly over remainder ties.
StationaryPolicy greedy_efficient_policy(const CmdpInstance& instance, TieRule tie_rule);

/// Stationary analysis of the policy-induced chain over (x, b), restricted
/// to the recurrent class reachable from b = 0 (x drawn from pi). Throws
/// Reducible when more than one recurrent class is reachable.
ExactEvaluation exact_evaluate(const StationaryPolicy& policy);

/// Exact LLR and P(B=0) of the greedy policy for a standalone user; for a
/// net-generative user this is the single-user optimum.
ExactEvaluation single_user_greedy_evaluate(const UserModel& user, int b_max);

}  // namespace fairshare
