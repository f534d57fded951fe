#include "fairshare/detail/chains.hpp"

#include <algorithm>

#include "fairshare/errors.hpp"
#include "fairshare/netgen.hpp"

namespace fairshare::detail {

std::vector<std::vector<int>> strongly_connected_components(const Eigen::MatrixXd& kernel,
                                                            const std::vector<char>& alive) {
    const int n = static_cast<int>(kernel.rows());
    std::vector<int> index(n, -1), low(n, 0), on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> components;
    int counter = 0;

    struct Frame {
        int v;
        int next_child;
    };
    for (int start = 0; start < n; ++start) {
        if (!alive[start] || index[start] >= 0) continue;
        std::vector<Frame> call{{start, 0}};
        index[start] = low[start] = counter++;
        stack.push_back(start);
        on_stack[start] = 1;
        while (!call.empty()) {
            auto& frame = call.back();
            const int v = frame.v;
            bool descended = false;
            for (int w = frame.next_child; w < n; ++w) {
                if (!alive[w] || kernel(v, w) <= 1e-15) continue;
                if (index[w] < 0) {
                    frame.next_child = w;  // resume past w once the child returns
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[w]) low[v] = std::min(low[v], index[w]);
            }
            if (descended) continue;
            if (low[v] == index[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                components.push_back(std::move(comp));
            }
            call.pop_back();
            if (!call.empty()) {
                auto& parent = call.back();
                low[parent.v] = std::min(low[parent.v], low[v]);
                parent.next_child += 1;
            }
        }
    }
    return components;
}

RecurrentClass reachable_recurrent_stationary(const Eigen::MatrixXd& kernel,
                                              const std::vector<int>& initial_states) {
    const int n = static_cast<int>(kernel.rows());
    std::vector<char> reachable(n, 0);
    std::vector<int> frontier;
    for (int s : initial_states) {
        if (!reachable[s]) {
            reachable[s] = 1;
            frontier.push_back(s);
        }
    }
    while (!frontier.empty()) {
        int u = frontier.back();
        frontier.pop_back();
        for (int v = 0; v < n; ++v)
            if (!reachable[v] && kernel(u, v) > 1e-15) {
                reachable[v] = 1;
                frontier.push_back(v);
            }
    }

    auto components = strongly_connected_components(kernel, reachable);
    std::vector<std::vector<int>> recurrent;
    for (auto& comp : components) {
        std::vector<char> in_comp(n, 0);
        for (int s : comp) in_comp[s] = 1;
        bool closed = true;
        for (int s : comp)
            for (int v = 0; v < n && closed; ++v)
                if (!in_comp[v] && kernel(s, v) > 1e-15) closed = false;
        if (closed) recurrent.push_back(std::move(comp));
    }
    if (recurrent.size() != 1)
        throw Reducible("induced chain has " + std::to_string(recurrent.size()) +
                            " recurrent classes reachable from the initial condition",
                        recurrent);

    RecurrentClass out;
    out.members = std::move(recurrent.front());
    Eigen::MatrixXd restricted(out.members.size(), out.members.size());
    for (size_t i = 0; i < out.members.size(); ++i)
        for (size_t j = 0; j < out.members.size(); ++j)
            restricted(i, j) = kernel(out.members[i], out.members[j]);
    Eigen::VectorXd mu = stationary_distribution(restricted);
    out.stationary = Eigen::VectorXd::Zero(n);
    for (size_t i = 0; i < out.members.size(); ++i) out.stationary(out.members[i]) = mu(i);
    return out;
}

}  // namespace fairshare::detail
