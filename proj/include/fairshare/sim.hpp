#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "fairshare/policy.hpp"

namespace fairshare {

struct SimResult {
    long long steps = 0;
    std::uint64_t seed = 0;
    int initial_battery = 0;
    int initial_chain_state = 0;

    std::vector<double> llr;               // empirical LLR_i
    std::vector<double> llr_se;            // batch-means standard errors
    std::vector<double> contributions;     // empirical C_i
    std::vector<double> contributions_se;
    double total_llr = 0.0;
    double total_llr_se = 0.0;
    std::vector<long long> battery_histogram;  // pre-action level counts, sums to steps
    int final_battery = 0;

    nlohmann::json to_json() const;
    void write_histogram_csv(std::ostream& os) const;  // `level,count`
};

struct SimInit {
    int b0 = 0;
    std::optional<int> chain_state;  // default: sampled from pi
};

/// Seeded deterministic trajectory simulation (mt19937_64 with inverse-CDF
/// categorical sampling, so identical inputs reproduce bit-identical
/// results across platforms). Standard errors use batch means.
SimResult simulate_policy(const StationaryPolicy& policy, long long steps, std::uint64_t seed,
                          const SimInit& init = {}, int batches = 100);

}  // namespace fairshare
