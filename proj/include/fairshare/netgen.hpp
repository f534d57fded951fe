#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fairshare/errors.hpp"

namespace fairshare {

/// One user's net-generation process: a finite Markov chain over integer
/// energy levels. Positive support values are surplus, negative are deficit.
struct UserModel {
    std::vector<int> support;     // energy units per step; distinct integers
    Eigen::MatrixXd transitions;  // row-stochastic over support states
    std::string label;

    /// Throws NotStochastic / WrongShape on invariant violations.
    void validate() const;
};

/// The background chain X(.) over joint net-generation states, together with
/// its stationary distribution and per-user drifts. Immutable once built.
struct JointChain {
    std::vector<std::vector<int>> states;  // states[s][i] = user i's net generation
    Eigen::MatrixXd kernel;                // row-stochastic
    Eigen::VectorXd stationary;            // pi, pi * kernel = pi
    std::vector<double> user_drifts;       // Delta_i = sum_s s_i pi(s)
    double system_drift = 0.0;             // Delta = sum_i Delta_i

    int user_count() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
    int state_count() const { return static_cast<int>(states.size()); }
};

struct DriftSummary {
    std::vector<double> per_user;
    double total = 0.0;
    std::vector<int> demanding;   // Delta_i < 0
    std::vector<int> generating;  // Delta_i > 0
};

/// Stationary distribution of an irreducible row-stochastic kernel.
/// Direct linear solve with a normalization row; falls back to power
/// iteration when the direct solve is ill-conditioned.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& kernel);

/// Product chain of independent users: states are the Cartesian product in
/// user-major lexicographic order, the kernel is the tensor product.
JointChain build_joint_chain(const std::vector<UserModel>& users);

/// Chain with an explicitly specified joint kernel over given joint states.
JointChain build_joint_chain(std::vector<std::vector<int>> states, Eigen::MatrixXd kernel);

/// Per-user drifts and the net-demanding / net-generating index sets.
/// Users with |Delta_i| <= 1e-12 belong to neither set.
DriftSummary drifts(const JointChain& chain);

/// alpha = (1-q)/(2-p-q) for a two-state user with support (+1, -1) and
/// kernel [[p, 1-p], [1-q, q]]; equals the stationary mass on the +1 state.
double generation_probability(const UserModel& user);

/// True iff the directed support graph of the kernel is strongly connected.
bool is_irreducible(const Eigen::MatrixXd& kernel, double edge_tol = 1e-15);

}  // namespace fairshare
