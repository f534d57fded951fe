#pragma once

#include <cstddef>
#include <vector>

#include "fairshare/netgen.hpp"

namespace fairshare {

enum class ActionMode { full, efficient };

using Action = std::vector<int>;  // a_i per user; positive accepts, negative supplies

/// The controlled process over (x, b): indexed states, per-state action sets
/// (full box constraints or efficient E1-E3), cost and fairness coefficients.
/// Immutable once built; safe to share across workers.
struct CmdpInstance {
    JointChain chain;
    int b_max = 0;
    ActionMode mode = ActionMode::full;

    // State s = chain_state * (b_max + 1) + battery.
    std::vector<std::vector<Action>> action_sets;  // lexicographically sorted per state

    int state_count() const { return chain.state_count() * (b_max + 1); }
    int state_index(int chain_state, int battery) const { return chain_state * (b_max + 1) + battery; }
    int chain_state_of(int s) const { return s / (b_max + 1); }
    int battery_of(int s) const { return s % (b_max + 1); }
    const std::vector<int>& generation_of(int s) const { return chain.states[chain_state_of(s)]; }

    int battery_after(int s, const Action& a) const;

    /// c(x,b,a) = sum_i 1{x_i < 0} (a_i - x_i), the lost load under action a.
    double cost(int s, const Action& a) const;

    double fairness_coeff(const Action& a, int user) const { return a[user]; }

    /// Index of `a` within the state's sorted action set, or -1.
    int action_index(int s, const Action& a) const;
};

/// Eq.-(3)-style box: a_i in {0..x_i} for surplus, {x_i..0} for deficit,
/// with 0 <= b + sum(a) <= b_max. Always contains the zero vector.
std::vector<Action> allowed_actions(const std::vector<int>& x, int b, int b_max);

/// Actions satisfying the efficiency conditions: store all surplus / serve
/// all demand when the battery permits (E1), otherwise fill exactly to
/// b_max (E2) or drain exactly to 0 (E3) with the split left free.
std::vector<Action> efficient_actions(const std::vector<int>& x, int b, int b_max);

CmdpInstance build_instance(const JointChain& chain, int b_max, ActionMode mode,
                            std::size_t size_cap = 10'000'000);

/// Sparse distribution over next-state indices under `action`.
std::vector<std::pair<int, double>> transition_step(const CmdpInstance& instance, int s,
                                                    const Action& action);

}  // namespace fairshare
