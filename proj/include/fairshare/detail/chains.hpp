#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fairshare::detail {

/// Tarjan SCCs over the support graph of `kernel`, restricted to states
/// with alive[s] != 0. Components are returned with sorted members.
std::vector<std::vector<int>> strongly_connected_components(const Eigen::MatrixXd& kernel,
                                                            const std::vector<char>& alive);

struct RecurrentClass {
    std::vector<int> members;
    Eigen::VectorXd stationary;  // over the full state set, zero off-class
};

/// Stationary distribution of the unique recurrent class reachable from
/// `initial_states`. Throws Reducible (with the class list) when more than
/// one recurrent class is reachable.
RecurrentClass reachable_recurrent_stationary(const Eigen::MatrixXd& kernel,
                                              const std::vector<int>& initial_states);

}  // namespace fairshare::detail
