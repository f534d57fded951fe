#include "fairshare/cmdp.hpp"

#include <algorithm>
#include <numeric>

namespace fairshare {

namespace {

void check_battery(int b, int b_max) {
    if (b_max < 0) throw BatteryOutOfRange("b_max must be nonnegative");
    if (b < 0 || b > b_max)
        throw BatteryOutOfRange("battery level " + std::to_string(b) + " outside [0, " + std::to_string(b_max) + "]");
}

void enumerate_box(const std::vector<int>& x, int b, int b_max, size_t i, Action& partial,
                   int partial_sum, std::vector<Action>& out) {
    if (i == x.size()) {
        int next = b + partial_sum;
        if (next >= 0 && next <= b_max) out.push_back(partial);
        return;
    }
    int lo = std::min(0, x[i]);
    int hi = std::max(0, x[i]);
    for (int v = lo; v <= hi; ++v) {
        partial.push_back(v);
        enumerate_box(x, b, b_max, i + 1, partial, partial_sum + v, out);
        partial.pop_back();
    }
}

// All ways to fill `free_idx` positions of the template with values in
// [lo_k, hi_k] summing to `target`, in lexicographic order.
void enumerate_compositions(const Action& tmpl, const std::vector<size_t>& free_idx,
                            const std::vector<int>& lo, const std::vector<int>& hi, size_t k,
                            int target, Action& current, std::vector<Action>& out) {
    if (k == free_idx.size()) {
        if (target == 0) out.push_back(current);
        return;
    }
    // Remaining capacity bounds for pruning.
    int rem_lo = 0, rem_hi = 0;
    for (size_t j = k + 1; j < free_idx.size(); ++j) {
        rem_lo += lo[j];
        rem_hi += hi[j];
    }
    for (int v = lo[k]; v <= hi[k]; ++v) {
        if (target - v < rem_lo || target - v > rem_hi) continue;
        current[free_idx[k]] = v;
        enumerate_compositions(tmpl, free_idx, lo, hi, k + 1, target - v, current, out);
    }
    current[free_idx[k]] = tmpl[free_idx[k]];
}

}  // namespace

std::vector<Action> allowed_actions(const std::vector<int>& x, int b, int b_max) {
    check_battery(b, b_max);
    std::vector<Action> out;
    Action partial;
    partial.reserve(x.size());
    enumerate_box(x, b, b_max, 0, partial, 0, out);
    return out;
}

std::vector<Action> efficient_actions(const std::vector<int>& x, int b, int b_max) {
    check_battery(b, b_max);
    const int total_x = std::accumulate(x.begin(), x.end(), 0);
    const int next = b + total_x;

    if (next >= 0 && next <= b_max) {
        // E1: accept all surplus, meet all demand.
        return {Action(x.begin(), x.end())};
    }

    Action tmpl(x.size(), 0);
    std::vector<size_t> free_idx;
    std::vector<int> lo, hi;
    int fixed_sum = 0;
    if (next > b_max) {
        // E2: demand fully met, generators fill the battery to b_max.
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i] > 0) {
                free_idx.push_back(i);
                lo.push_back(0);
                hi.push_back(x[i]);
            } else {
                tmpl[i] = x[i];
                fixed_sum += x[i];
            }
        }
    } else {
        // E3: surplus fully stored, demanders drain the battery to 0.
        for (size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0) {
                free_idx.push_back(i);
                lo.push_back(x[i]);
                hi.push_back(0);
            } else {
                tmpl[i] = x[i];
                fixed_sum += x[i];
            }
        }
    }
    const int target_total = (next > b_max ? b_max : 0) - b;
    std::vector<Action> out;
    Action current = tmpl;
    enumerate_compositions(tmpl, free_idx, lo, hi, 0, target_total - fixed_sum, current, out);
    return out;
}

int CmdpInstance::battery_after(int s, const Action& a) const {
    return battery_of(s) + std::accumulate(a.begin(), a.end(), 0);
}

double CmdpInstance::cost(int s, const Action& a) const {
    const auto& x = generation_of(s);
    double c = 0.0;
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i] < 0) c += a[i] - x[i];
    return c;
}

int CmdpInstance::action_index(int s, const Action& a) const {
    const auto& set = action_sets[s];
    auto it = std::lower_bound(set.begin(), set.end(), a);
    if (it == set.end() || *it != a) return -1;
    return static_cast<int>(it - set.begin());
}

CmdpInstance build_instance(const JointChain& chain, int b_max, ActionMode mode, std::size_t size_cap) {
    if (b_max < 0) throw BatteryOutOfRange("build_instance: b_max must be nonnegative");

    CmdpInstance inst;
    inst.chain = chain;
    inst.b_max = b_max;
    inst.mode = mode;

    const int nstates = chain.state_count() * (b_max + 1);
    inst.action_sets.resize(nstates);
    std::size_t max_actions = 0;
    for (int xs = 0; xs < chain.state_count(); ++xs) {
        for (int b = 0; b <= b_max; ++b) {
            int s = inst.state_index(xs, b);
            inst.action_sets[s] = mode == ActionMode::full
                                      ? allowed_actions(chain.states[xs], b, b_max)
                                      : efficient_actions(chain.states[xs], b, b_max);
            max_actions = std::max(max_actions, inst.action_sets[s].size());
            if (static_cast<std::size_t>(nstates) * max_actions > size_cap)
                throw InstanceTooLarge("build_instance: state-action space exceeds cap of " +
                                       std::to_string(size_cap));
            if (inst.action_sets[s].empty())
                throw InternalError("build_instance: empty action set");
        }
    }
    return inst;
}

std::vector<std::pair<int, double>> transition_step(const CmdpInstance& instance, int s,
                                                    const Action& action) {
    if (instance.action_index(s, action) < 0)
        throw ActionNotAllowed("transition_step: action not in the state's action set");
    const int xs = instance.chain_state_of(s);
    const int b_next = instance.battery_after(s, action);
    std::vector<std::pair<int, double>> out;
    for (int xt = 0; xt < instance.chain.state_count(); ++xt) {
        double p = instance.chain.kernel(xs, xt);
        if (p > 0.0) out.emplace_back(instance.state_index(xt, b_next), p);
    }
    return out;
}

}  // namespace fairshare
