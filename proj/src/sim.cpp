#include "fairshare/sim.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace fairshare {

namespace {

// 53-bit uniform in [0, 1); distributions from <random> are not portable,
// the raw mt19937_64 stream is.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_categorical(std::mt19937_64& rng, const std::vector<double>& weights) {
    double u = next_uniform(rng);
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(weights.size()); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last = i;
        if (u < acc) return i;
    }
    return last;  // guard against rounding at acc ~ 1
}

int sample_kernel_row(std::mt19937_64& rng, const Eigen::MatrixXd& kernel, int row) {
    double u = next_uniform(rng);
    double acc = 0.0;
    int last = 0;
    for (int c = 0; c < kernel.cols(); ++c) {
        double p = kernel(row, c);
        if (p <= 0.0) continue;
        acc += p;
        last = c;
        if (u < acc) return c;
    }
    return last;
}

struct BatchAccumulator {
    std::vector<double> batch_means;
    double current = 0.0;
    long long in_batch = 0;
    long long batch_size;

    explicit BatchAccumulator(long long size) : batch_size(size) {}

    void add(double v) {
        current += v;
        if (++in_batch == batch_size) {
            batch_means.push_back(current / static_cast<double>(batch_size));
            current = 0.0;
            in_batch = 0;
        }
    }

    double standard_error() const {
        const size_t k = batch_means.size();
        if (k < 2) return 0.0;
        double mean = 0.0;
        for (double m : batch_means) mean += m;
        mean /= static_cast<double>(k);
        double var = 0.0;
        for (double m : batch_means) var += (m - mean) * (m - mean);
        var /= static_cast<double>(k - 1);
        return std::sqrt(var / static_cast<double>(k));
    }
};

}  // namespace

SimResult simulate_policy(const StationaryPolicy& policy, long long steps, std::uint64_t seed,
                          const SimInit& init, int batches) {
    if (steps < 1) throw WrongShape("simulate_policy: need at least one step");
    const CmdpInstance& inst = *policy.instance;
    const int n = inst.chain.user_count();

    std::mt19937_64 rng(seed);

    int x = init.chain_state.value_or(-1);
    if (x < 0) {
        std::vector<double> pi(inst.chain.stationary.data(),
                               inst.chain.stationary.data() + inst.chain.state_count());
        x = sample_categorical(rng, pi);
    }
    int b = init.b0;
    if (b < 0 || b > inst.b_max) throw BatteryOutOfRange("simulate_policy: b0 out of range");

    SimResult res;
    res.steps = steps;
    res.seed = seed;
    res.initial_battery = b;
    res.initial_chain_state = x;
    res.battery_histogram.assign(inst.b_max + 1, 0);

    const long long batch_size = std::max<long long>(1, steps / std::max(1, batches));
    std::vector<BatchAccumulator> llr_acc(n, BatchAccumulator(batch_size));
    std::vector<BatchAccumulator> c_acc(n, BatchAccumulator(batch_size));
    BatchAccumulator total_acc(batch_size);

    std::vector<double> llr_sum(n, 0.0), c_sum(n, 0.0);
    double total_sum = 0.0;
    long long action_sum = 0;  // telescoping check: equals b(T) - b(0)

    for (long long t = 0; t < steps; ++t) {
        res.battery_histogram[b] += 1;
        const int s = inst.state_index(x, b);
        const int a_idx = sample_categorical(rng, policy.probs[s]);
        const Action& a = inst.action_sets[s][a_idx];
        const auto& gen = inst.chain.states[x];

        double lost = 0.0;
        for (int i = 0; i < n; ++i) {
            double li = gen[i] < 0 ? a[i] - gen[i] : 0.0;
            lost += li;
            llr_sum[i] += li;
            c_sum[i] += a[i];
            llr_acc[i].add(li);
            c_acc[i].add(a[i]);
            action_sum += a[i];
        }
        total_sum += lost;
        total_acc.add(lost);

        b = inst.battery_after(s, a);
        if (b < 0 || b > inst.b_max)
            throw InternalError("simulate_policy: battery left [0, b_max]");
        x = sample_kernel_row(rng, inst.chain.kernel, x);
    }

    if (action_sum != b - res.initial_battery)
        throw InternalError("simulate_policy: telescoping identity violated");

    res.final_battery = b;
    res.llr.resize(n);
    res.llr_se.resize(n);
    res.contributions.resize(n);
    res.contributions_se.resize(n);
    for (int i = 0; i < n; ++i) {
        res.llr[i] = llr_sum[i] / static_cast<double>(steps);
        res.llr_se[i] = llr_acc[i].standard_error();
        res.contributions[i] = c_sum[i] / static_cast<double>(steps);
        res.contributions_se[i] = c_acc[i].standard_error();
    }
    res.total_llr = total_sum / static_cast<double>(steps);
    res.total_llr_se = total_acc.standard_error();
    return res;
}

nlohmann::json SimResult::to_json() const {
    return {{"steps", steps},
            {"seed", seed},
            {"initial_battery", initial_battery},
            {"initial_chain_state", initial_chain_state},
            {"final_battery", final_battery},
            {"llr", llr},
            {"llr_se", llr_se},
            {"contributions", contributions},
            {"contributions_se", contributions_se},
            {"total_llr", total_llr},
            {"total_llr_se", total_llr_se},
            {"battery_histogram", battery_histogram}};
}

void SimResult::write_histogram_csv(std::ostream& os) const {
    os << "level,count\n";
    for (size_t lvl = 0; lvl < battery_histogram.size(); ++lvl)
        os << lvl << "," << battery_histogram[lvl] << "\n";
}

}  // namespace fairshare
