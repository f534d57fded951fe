#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairshare/lpcore.hpp"
#include "fairshare/netgen.hpp"

namespace fairshare {

struct ExplicitJoint {
    std::vector<std::vector<int>> states;
    std::vector<std::vector<double>> kernel;  // row-major
};

/// Single-file JSON run configuration; matrices are row-major nested arrays.
/// Parsing and emission round-trip exactly.
struct RunConfig {
    std::vector<UserModel> users;
    std::optional<ExplicitJoint> joint;

    std::optional<int> b_max;
    std::vector<int> b_grid;
    std::optional<double> delta;       // ignored when delta_unconstrained
    bool delta_unconstrained = false;  // "delta": "unconstrained"
    std::vector<double> delta_grid;

    std::uint64_t seed = 0;
    long long steps = 1'000'000;
    std::string output;      // JSON report path ("" = stdout only)
    std::string csv_output;  // sweep/histogram CSV path
    std::optional<LpTolerances> tolerances;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    nlohmann::json to_json() const;

    JointChain build_chain() const;
    LpTolerances lp_tolerances() const { return tolerances.value_or(LpTolerances{}); }
};

/// Inclusive `start:stop:step` grid (endpoints within half-step tolerance),
/// e.g. "0:0.5:0.05".
std::vector<double> parse_grid(const std::string& text);
std::vector<int> parse_int_grid(const std::string& text);

}  // namespace fairshare
