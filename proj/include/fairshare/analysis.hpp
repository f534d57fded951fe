#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairshare/policy.hpp"

namespace fairshare {

/// Least-squares fit of log(LLR) against battery size.
struct DecayFit {
    std::vector<int> b_values;       // points used in the fit
    std::vector<double> llr_values;  // matching LLR values
    std::vector<int> excluded;       // grid points dropped (LLR <= noise floor)
    double slope = 0.0;              // -lambda per energy unit
    double intercept = 0.0;
    double r_squared = 0.0;
    bool degenerate = false;         // zero variance in log(LLR)

    bool exponential() const { return !degenerate && slope < 0.0 && r_squared >= 0.99; }
};

struct PofResult {
    double llr_o = 0.0;
    double llr_e = 0.0;
    double value = 0.0;
};

enum class SweepKind { pof_vs_b, fairness_vs_b, frontier };

struct SweepRow {
    SweepKind kind;
    double abscissa = 0.0;  // b_max or delta
    std::optional<double> llr_o, llr_e, llr_delta, pof, theta_star, epsilon;
    std::string error;  // nonempty when the point failed
};

struct SweepSpec {
    JointChain chain;
    std::vector<int> b_grid;         // pof_vs_b / fairness_vs_b
    std::vector<double> delta_grid;  // frontier
    int frontier_b_max = -1;         // frontier
    int jobs = 1;
};

/// LLR of the efficient policy, computed from the induced chain with the
/// deterministic battery update b' = clamp(b + sum(x), 0, b_max). This is
/// an independent route from solve_p without fairness rows.
double compute_llr_e(const JointChain& chain, int b_max);

/// PoF = LLR_o / LLR_e. Throws EfficientLLRZero (with both rates attached)
/// when LLR_e vanishes, so the ratio is reported symbolically downstream
/// instead of as a float division.
PofResult price_of_fairness(const JointChain& chain, int b_max);

/// Sum over net-demanding users of -Delta_i: a lower bound on LLR_sys
/// under any fair policy.
double theorem1_bound(const JointChain& chain);

/// LLR of the fair policy that gives each user a private battery chunk of
/// floor(b_max/n) units, operated greedily; an upper bound on LLR_o when
/// all users are net generating. With allocate_remainder, leftover units
/// go one each to users in decreasing-drift order.
double chunked_bound(const std::vector<UserModel>& users, int b_max,
                     bool allocate_remainder = false);

/// Fit log(LLR) vs b over b_range; points with LLR <= 1e-14 are excluded.
/// Requires at least 4 usable points.
DecayFit decay_rate(const std::function<double(int)>& evaluator, const std::vector<int>& b_range);

std::vector<SweepRow> sweep(SweepKind kind, const SweepSpec& spec);

/// CSV with header `kind,abscissa,llr_o,llr_e,llr_delta,pof,theta_star,epsilon`;
/// inapplicable cells are left empty. Numbers use shortest round-trip form.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);
nlohmann::json decay_to_json(const DecayFit& fit);

std::string sweep_kind_name(SweepKind kind);

}  // namespace fairshare
