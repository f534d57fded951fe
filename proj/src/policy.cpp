#include "fairshare/policy.hpp"

#include "fairshare/detail/chains.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace fairshare {

namespace {

// Deterministic efficient action: E1 takes x; E2/E3 allocate the required
// total to eligible users in increasing index order.
Action greedy_action(const std::vector<int>& x, int b, int b_max) {
    const int total_x = std::accumulate(x.begin(), x.end(), 0);
    const int next = b + total_x;
    if (next >= 0 && next <= b_max) return Action(x.begin(), x.end());

    Action a(x.size(), 0);
    if (next > b_max) {
        int room = b_max - b;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] < 0) {
                a[i] = x[i];
                room -= x[i];
            }
        for (size_t i = 0; i < x.size() && room > 0; ++i)
            if (x[i] > 0) {
                a[i] = std::min(x[i], room);
                room -= a[i];
            }
    } else {
        int available = b;
        for (size_t i = 0; i < x.size(); ++i)
            if (x[i] > 0) {
                a[i] = x[i];
                available += x[i];
            }
        for (size_t i = 0; i < x.size() && available > 0; ++i)
            if (x[i] < 0) {
                a[i] = -std::min(-x[i], available);
                available += a[i];
            }
    }
    return a;
}

// Largest-remainder split of `total` units across `idx` with weights
// |x_i| and caps |x_i|; remainder ties are randomized uniformly over the
// eligible assignments. Returns (allocation magnitudes, probability) pairs.
std::vector<std::pair<std::vector<int>, double>> proportional_split(
    const std::vector<size_t>& idx, const std::vector<int>& caps, int total) {
    const size_t k = idx.size();
    double weight_sum = 0.0;
    for (size_t j = 0; j < k; ++j) weight_sum += caps[j];

    std::vector<int> base(k, 0);
    std::vector<double> frac(k, 0.0);
    int allocated = 0;
    for (size_t j = 0; j < k; ++j) {
        double share = total * caps[j] / weight_sum;
        base[j] = std::min(static_cast<int>(std::floor(share + 1e-12)), caps[j]);
        frac[j] = share - base[j];
        allocated += base[j];
    }
    int remaining = total - allocated;

    // Sort positions by remainder descending, grouping ties.
    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return frac[a] > frac[b] + 1e-12; });

    std::vector<std::pair<std::vector<int>, double>> out{{base, 1.0}};
    size_t pos = 0;
    while (remaining > 0 && pos < k) {
        size_t group_end = pos;
        while (group_end + 1 < k && std::abs(frac[order[group_end + 1]] - frac[order[pos]]) <= 1e-12)
            ++group_end;
        const int group_size = static_cast<int>(group_end - pos + 1);
        const int take = std::min(remaining, group_size);

        if (take == group_size) {
            for (size_t g = pos; g <= group_end; ++g)
                for (auto& [alloc, p] : out) alloc[order[g]] += 1;
        } else {
            // Tie straddles the cutoff: enumerate all choices of `take`
            // members, uniformly.
            std::vector<int> members;
            for (size_t g = pos; g <= group_end; ++g) members.push_back(static_cast<int>(order[g]));
            std::vector<std::vector<int>> combos;
            std::vector<int> current;
            std::function<void(size_t)> rec = [&](size_t start) {
                if (static_cast<int>(current.size()) == take) {
                    combos.push_back(current);
                    return;
                }
                for (size_t i = start; i < members.size(); ++i) {
                    current.push_back(members[i]);
                    rec(i + 1);
                    current.pop_back();
                }
            };
            rec(0);
            std::vector<std::pair<std::vector<int>, double>> expanded;
            for (const auto& [alloc, p] : out)
                for (const auto& combo : combos) {
                    auto next = alloc;
                    for (int j : combo) next[j] += 1;
                    expanded.emplace_back(std::move(next), p / combos.size());
                }
            out = std::move(expanded);
        }
        remaining -= take;
        pos = group_end + 1;
    }
    if (remaining != 0) throw InternalError("proportional_split: leftover units");
    return out;
}

// Distribution over efficient actions for one state under the tie rule.
std::vector<std::pair<Action, double>> efficient_choice(const std::vector<int>& x, int b, int b_max,
                                                        TieRule rule) {
    const int total_x = std::accumulate(x.begin(), x.end(), 0);
    const int next = b + total_x;
    if (next >= 0 && next <= b_max) return {{Action(x.begin(), x.end()), 1.0}};
    if (rule == TieRule::lowest_index_first) return {{greedy_action(x, b, b_max), 1.0}};

    Action tmpl(x.size(), 0);
    std::vector<size_t> idx;
    std::vector<int> caps;
    int free_total;  // magnitude allocated among the free users
    bool charging = next > b_max;
    if (charging) {
        int dem_sum = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i] > 0) {
                idx.push_back(i);
                caps.push_back(x[i]);
            } else {
                tmpl[i] = x[i];
                dem_sum += x[i];
            }
        }
        free_total = b_max - b - dem_sum;
    } else {
        int gen_sum = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0) {
                idx.push_back(i);
                caps.push_back(-x[i]);
            } else {
                tmpl[i] = x[i];
                gen_sum += x[i];
            }
        }
        free_total = b + gen_sum;
    }

    std::vector<std::pair<Action, double>> out;
    for (const auto& [alloc, p] : proportional_split(idx, caps, free_total)) {
        Action a = tmpl;
        for (size_t j = 0; j < idx.size(); ++j) a[idx[j]] = charging ? alloc[j] : -alloc[j];
        out.emplace_back(std::move(a), p);
    }
    return out;
}

int fallback_action_index(const CmdpInstance& inst, int s, Fallback fallback) {
    Action a;
    if (fallback == Fallback::zero_action) {
        a.assign(inst.chain.user_count(), 0);
    } else {
        a = greedy_action(inst.generation_of(s), inst.battery_of(s), inst.b_max);
    }
    int idx = inst.action_index(s, a);
    if (idx < 0)
        throw ActionNotAllowed("extract_policy: fallback action not in the state's action set");
    return idx;
}

}  // namespace

StationaryPolicy extract_policy(const OccupationMeasure& rho, Fallback fallback) {
    const CmdpInstance& inst = *rho.instance;
    StationaryPolicy policy;
    policy.instance = &inst;
    policy.probs.resize(inst.state_count());
    for (int s = 0; s < inst.state_count(); ++s) {
        const double total = rho.state_mass(s);
        policy.probs[s].assign(inst.action_sets[s].size(), 0.0);
        if (total > 1e-12) {
            for (size_t a = 0; a < rho.mass[s].size(); ++a)
                policy.probs[s][a] = rho.mass[s][a] / total;
        } else {
            policy.probs[s][fallback_action_index(inst, s, fallback)] = 1.0;
        }
    }
    return policy;
}

StationaryPolicy greedy_efficient_policy(const CmdpInstance& instance, TieRule tie_rule) {
    if (instance.mode != ActionMode::efficient)
        throw ModeMismatch("greedy_efficient_policy: instance must be in efficient mode");
    StationaryPolicy policy;
    policy.instance = &instance;
    policy.probs.resize(instance.state_count());
    for (int s = 0; s < instance.state_count(); ++s) {
        policy.probs[s].assign(instance.action_sets[s].size(), 0.0);
        for (const auto& [a, p] :
             efficient_choice(instance.generation_of(s), instance.battery_of(s), instance.b_max, tie_rule)) {
            int idx = instance.action_index(s, a);
            if (idx < 0) throw InternalError("greedy_efficient_policy: action missing from set");
            policy.probs[s][idx] += p;
        }
    }
    return policy;
}

ExactEvaluation exact_evaluate(const StationaryPolicy& policy) {
    const CmdpInstance& inst = *policy.instance;
    const int ns = inst.state_count();

    Eigen::MatrixXd induced = Eigen::MatrixXd::Zero(ns, ns);
    for (int s = 0; s < ns; ++s) {
        const int xs = inst.chain_state_of(s);
        for (size_t a = 0; a < policy.probs[s].size(); ++a) {
            double p = policy.probs[s][a];
            if (p <= 0.0) continue;
            const int b_next = inst.battery_after(s, inst.action_sets[s][a]);
            for (int xt = 0; xt < inst.chain.state_count(); ++xt)
                induced(s, inst.state_index(xt, b_next)) += p * inst.chain.kernel(xs, xt);
        }
    }

    // Initial condition: x ~ pi, b = 0.
    std::vector<int> initial;
    for (int xs = 0; xs < inst.chain.state_count(); ++xs)
        if (inst.chain.stationary(xs) > 1e-15) initial.push_back(inst.state_index(xs, 0));
    auto recurrent = detail::reachable_recurrent_stationary(induced, initial);

    ExactEvaluation eval;
    eval.state_distribution = recurrent.stationary;

    const int n = inst.chain.user_count();
    eval.llr_per_user.assign(n, 0.0);
    eval.contributions.assign(n, 0.0);
    for (int s = 0; s < ns; ++s) {
        double mu = eval.state_distribution(s);
        if (mu == 0.0) continue;
        if (inst.battery_of(s) == 0) eval.prob_empty += mu;
        if (inst.battery_of(s) == inst.b_max) eval.prob_full += mu;
        const auto& x = inst.generation_of(s);
        for (size_t a = 0; a < policy.probs[s].size(); ++a) {
            double w = mu * policy.probs[s][a];
            if (w == 0.0) continue;
            const Action& act = inst.action_sets[s][a];
            for (int i = 0; i < n; ++i) {
                eval.contributions[i] += w * act[i];
                if (x[i] < 0) eval.llr_per_user[i] += w * (act[i] - x[i]);
            }
        }
    }
    eval.total_lost_load =
        std::accumulate(eval.llr_per_user.begin(), eval.llr_per_user.end(), 0.0);
    return eval;
}

ExactEvaluation single_user_greedy_evaluate(const UserModel& user, int b_max) {
    JointChain chain = build_joint_chain(std::vector<UserModel>{user});
    CmdpInstance inst = build_instance(chain, b_max, ActionMode::efficient);
    StationaryPolicy greedy = greedy_efficient_policy(inst, TieRule::lowest_index_first);
    return exact_evaluate(greedy);
}

nlohmann::json StationaryPolicy::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (int s = 0; s < instance->state_count(); ++s) {
        nlohmann::json actions = nlohmann::json::array();
        for (size_t a = 0; a < probs[s].size(); ++a)
            if (probs[s][a] > 0.0)
                actions.push_back({{"a", instance->action_sets[s][a]}, {"p", probs[s][a]}});
        out.push_back({{"state", {{"x", instance->generation_of(s)}, {"b", instance->battery_of(s)}}},
                       {"actions", std::move(actions)}});
    }
    return out;
}

}  // namespace fairshare
