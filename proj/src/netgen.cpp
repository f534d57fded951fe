#include "fairshare/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fairshare/detail/chains.hpp"

namespace fairshare {

namespace {

void check_row_stochastic(const Eigen::MatrixXd& m, const std::string& what) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw WrongShape(what + ": kernel must be square and nonempty");
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double v = m(r, c);
            if (v < -1e-12 || v > 1.0 + 1e-12)
                throw NotStochastic(what + ": entry out of [0,1] at row " + std::to_string(r));
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw NotStochastic(what + ": row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
}

// DFS reachability over the support graph (or its transpose).
std::vector<char> reachable_from(const Eigen::MatrixXd& m, int start, bool transpose, double tol) {
    int n = static_cast<int>(m.rows());
    std::vector<char> seen(n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
            double w = transpose ? m(v, u) : m(u, v);
            if (!seen[v] && w > tol) {
                seen[v] = 1;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& kernel, double edge_tol) {
    auto fwd = reachable_from(kernel, 0, false, edge_tol);
    auto bwd = reachable_from(kernel, 0, true, edge_tol);
    for (size_t i = 0; i < fwd.size(); ++i)
        if (!fwd[i] || !bwd[i]) return false;
    return true;
}

void UserModel::validate() const {
    if (support.empty()) throw WrongShape("UserModel '" + label + "': empty support");
    if (static_cast<Eigen::Index>(support.size()) != transitions.rows())
        throw WrongShape("UserModel '" + label + "': support/transition size mismatch");
    check_row_stochastic(transitions, "UserModel '" + label + "'");
    std::set<int> distinct(support.begin(), support.end());
    if (distinct.size() != support.size())
        throw WrongShape("UserModel '" + label + "': support values must be distinct");
    int smax = *std::max_element(support.begin(), support.end());
    int smin = *std::min_element(support.begin(), support.end());
    if (smax <= 0 || smin >= 0)
        throw WrongShape("UserModel '" + label + "': support needs a positive and a negative value");
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& kernel) {
    check_row_stochastic(kernel, "stationary_distribution");
    if (!is_irreducible(kernel))
        throw Reducible("stationary_distribution: kernel is not irreducible");

    const Eigen::Index n = kernel.rows();
    // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a = kernel.transpose() - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    Eigen::VectorXd pi = a.fullPivLu().solve(rhs);

    auto residual = [&](const Eigen::VectorXd& p) {
        return (p.transpose() * kernel - p.transpose()).cwiseAbs().maxCoeff();
    };
    if (!pi.allFinite() || pi.minCoeff() < -1e-9 || residual(pi) > 1e-10) {
        // Power iteration fallback.
        pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        for (long it = 0; it < 1000000; ++it) {
            Eigen::VectorXd next = kernel.transpose() * pi;
            next /= next.sum();
            double diff = (next - pi).cwiseAbs().maxCoeff();
            pi = next;
            if (diff < 1e-12) break;
        }
        if (residual(pi) > 1e-10)
            throw NumericalFailure("stationary_distribution: no convergence");
    }
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();
    return pi;
}

namespace {

JointChain finalize_chain(std::vector<std::vector<int>> states, Eigen::MatrixXd kernel) {
    check_row_stochastic(kernel, "JointChain");
    for (Eigen::Index s = 0; s < kernel.rows(); ++s)
        if (kernel(s, s) <= 0.0)
            throw SelfLoopViolated("JointChain: state " + std::to_string(s) + " has zero self-transition probability");
    if (!is_irreducible(kernel)) {
        Reducible err("JointChain: kernel is not irreducible");
        err.classes = detail::strongly_connected_components(
            kernel, std::vector<char>(kernel.rows(), 1));
        throw err;
    }

    JointChain chain;
    chain.states = std::move(states);
    chain.kernel = std::move(kernel);
    chain.stationary = stationary_distribution(chain.kernel);
    const int n = chain.user_count();
    chain.user_drifts.assign(n, 0.0);
    for (int s = 0; s < chain.state_count(); ++s)
        for (int i = 0; i < n; ++i)
            chain.user_drifts[i] += chain.states[s][i] * chain.stationary(s);
    chain.system_drift = 0.0;
    for (double d : chain.user_drifts) chain.system_drift += d;
    return chain;
}

}  // namespace

JointChain build_joint_chain(const std::vector<UserModel>& users) {
    if (users.empty()) throw EmptyUserList("build_joint_chain: need at least one user");
    for (const auto& u : users) u.validate();

    // Cartesian product in user-major lexicographic order (user 0 slowest).
    std::vector<std::vector<int>> states{{}};
    for (const auto& u : users) {
        std::vector<std::vector<int>> next;
        next.reserve(states.size() * u.support.size());
        for (const auto& prefix : states) {
            for (int v : u.support) {
                auto s = prefix;
                s.push_back(v);
                next.push_back(std::move(s));
            }
        }
        states = std::move(next);
    }

    Eigen::MatrixXd kernel = Eigen::MatrixXd::Ones(1, 1);
    for (const auto& u : users) {
        // Kronecker product, consistent with the state enumeration above.
        Eigen::MatrixXd prod(kernel.rows() * u.transitions.rows(), kernel.cols() * u.transitions.cols());
        for (Eigen::Index r = 0; r < kernel.rows(); ++r)
            for (Eigen::Index c = 0; c < kernel.cols(); ++c)
                prod.block(r * u.transitions.rows(), c * u.transitions.cols(),
                           u.transitions.rows(), u.transitions.cols()) = kernel(r, c) * u.transitions;
        kernel = std::move(prod);
    }

    return finalize_chain(std::move(states), std::move(kernel));
}

JointChain build_joint_chain(std::vector<std::vector<int>> states, Eigen::MatrixXd kernel) {
    if (states.empty()) throw EmptyUserList("build_joint_chain: empty joint state list");
    if (static_cast<Eigen::Index>(states.size()) != kernel.rows())
        throw WrongShape("build_joint_chain: state list and kernel size mismatch");
    const size_t n = states.front().size();
    for (const auto& s : states)
        if (s.size() != n) throw WrongShape("build_joint_chain: ragged joint state vectors");
    return finalize_chain(std::move(states), std::move(kernel));
}

DriftSummary drifts(const JointChain& chain) {
    DriftSummary out;
    out.per_user = chain.user_drifts;
    out.total = chain.system_drift;
    for (int i = 0; i < chain.user_count(); ++i) {
        if (chain.user_drifts[i] < -1e-12)
            out.demanding.push_back(i);
        else if (chain.user_drifts[i] > 1e-12)
            out.generating.push_back(i);
    }
    return out;
}

double generation_probability(const UserModel& user) {
    if (user.support != std::vector<int>{1, -1})
        throw WrongShape("generation_probability: support must be (+1, -1)");
    user.validate();
    const double p = user.transitions(0, 0);
    const double q = user.transitions(1, 1);
    if (2.0 - p - q < 1e-12)
        throw Degenerate("generation_probability: p = q = 1");
    return (1.0 - q) / (2.0 - p - q);
}

}  // namespace fairshare
