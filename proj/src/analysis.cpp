#include "fairshare/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

#include "fairshare/detail/chains.hpp"

namespace fairshare {

namespace {

int clamp_battery(int b, int b_max) { return std::min(std::max(b, 0), b_max); }

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

double compute_llr_e(const JointChain& chain, int b_max) {
    if (b_max < 0) throw BatteryOutOfRange("compute_llr_e: b_max must be nonnegative");
    const int nx = chain.state_count();
    const int ns = nx * (b_max + 1);

    // Under any efficient policy the battery moves deterministically:
    // b' = clamp(b + sum(x), 0, b_max), regardless of the split.
    Eigen::MatrixXd induced = Eigen::MatrixXd::Zero(ns, ns);
    std::vector<int> x_sum(nx, 0);
    for (int xs = 0; xs < nx; ++xs)
        x_sum[xs] = std::accumulate(chain.states[xs].begin(), chain.states[xs].end(), 0);
    for (int xs = 0; xs < nx; ++xs) {
        for (int b = 0; b <= b_max; ++b) {
            const int s = xs * (b_max + 1) + b;
            const int b_next = clamp_battery(b + x_sum[xs], b_max);
            for (int xt = 0; xt < nx; ++xt)
                induced(s, xt * (b_max + 1) + b_next) += chain.kernel(xs, xt);
        }
    }

    std::vector<int> initial;
    for (int xs = 0; xs < nx; ++xs)
        if (chain.stationary(xs) > 1e-15) initial.push_back(xs * (b_max + 1));
    auto recurrent = detail::reachable_recurrent_stationary(induced, initial);

    double llr = 0.0;
    for (int s : recurrent.members) {
        const int xs = s / (b_max + 1);
        const int b = s % (b_max + 1);
        llr += recurrent.stationary(s) * std::max(0, -(b + x_sum[xs]));
    }
    return llr;
}

PofResult price_of_fairness(const JointChain& chain, int b_max) {
    CmdpInstance inst = build_instance(chain, b_max, ActionMode::full);
    PofResult out;
    out.llr_o = solve_p(inst, FairnessBound::exact()).objective;
    out.llr_e = compute_llr_e(chain, b_max);
    if (out.llr_e < 1e-15)
        throw EfficientLLRZero("price_of_fairness: PoF = inf or 0/0 (LLR_o = " +
                                   format_double(out.llr_o) + ", LLR_e = " + format_double(out.llr_e) + ")",
                               out.llr_o, out.llr_e);
    out.value = out.llr_o / out.llr_e;
    return out;
}

double theorem1_bound(const JointChain& chain) {
    double bound = 0.0;
    DriftSummary d = drifts(chain);
    for (int i : d.demanding) bound -= d.per_user[i];
    return bound;
}

double chunked_bound(const std::vector<UserModel>& users, int b_max, bool allocate_remainder) {
    if (users.empty()) throw EmptyUserList("chunked_bound: need at least one user");
    const int n = static_cast<int>(users.size());

    std::vector<double> user_drift(n);
    for (int i = 0; i < n; ++i) {
        JointChain solo = build_joint_chain({users[i]});
        user_drift[i] = solo.user_drifts[0];
        if (user_drift[i] <= 1e-12)
            throw NotAllGenerating("chunked_bound: user " + std::to_string(i) +
                                   " is not net generating");
    }

    std::vector<int> chunk(n, b_max / n);
    if (allocate_remainder) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return user_drift[a] > user_drift[b]; });
        for (int r = 0; r < b_max % n; ++r) chunk[order[r]] += 1;
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i)
        total += single_user_greedy_evaluate(users[i], chunk[i]).total_lost_load;
    return total;
}

DecayFit decay_rate(const std::function<double(int)>& evaluator, const std::vector<int>& b_range) {
    DecayFit fit;
    for (int b : b_range) {
        double llr = evaluator(b);
        if (llr <= 1e-14) {  // solver noise floor; log would corrupt the slope
            fit.excluded.push_back(b);
            continue;
        }
        fit.b_values.push_back(b);
        fit.llr_values.push_back(llr);
    }
    if (fit.b_values.size() < 4)
        throw TooFewPoints("decay_rate: only " + std::to_string(fit.b_values.size()) +
                           " usable points, need 4");

    const size_t n = fit.b_values.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t k = 0; k < n; ++k) {
        double x = fit.b_values[k], y = std::log(fit.llr_values[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (size_t k = 0; k < n; ++k) {
        double y = std::log(fit.llr_values[k]);
        double yhat = fit.intercept + fit.slope * fit.b_values[k];
        ss_res += (y - yhat) * (y - yhat);
        ss_tot += (y - ybar) * (y - ybar);
    }
    if (ss_tot < 1e-30) {
        fit.degenerate = true;
        fit.r_squared = 0.0;
    } else {
        fit.r_squared = 1.0 - ss_res / ss_tot;
    }
    return fit;
}

namespace {

SweepRow sweep_point(SweepKind kind, const SweepSpec& spec, size_t idx) {
    SweepRow row;
    row.kind = kind;
    try {
        switch (kind) {
            case SweepKind::pof_vs_b: {
                const int b = spec.b_grid[idx];
                row.abscissa = b;
                try {
                    PofResult pof = price_of_fairness(spec.chain, b);
                    row.llr_o = pof.llr_o;
                    row.llr_e = pof.llr_e;
                    row.pof = pof.value;
                } catch (const EfficientLLRZero& e) {
                    row.llr_o = e.llr_o;
                    row.llr_e = e.llr_e;
                    row.error = e.what();
                }
                break;
            }
            case SweepKind::fairness_vs_b: {
                const int b = spec.b_grid[idx];
                row.abscissa = b;
                CmdpInstance inst = build_instance(spec.chain, b, ActionMode::efficient);
                row.theta_star = solve_f(inst).objective;
                break;
            }
            case SweepKind::frontier: {
                const double delta = spec.delta_grid[idx];
                row.abscissa = delta;
                CmdpInstance inst = build_instance(spec.chain, spec.frontier_b_max, ActionMode::full);
                double llr_delta = solve_p(inst, FairnessBound::relaxed(delta)).objective;
                double llr_e = compute_llr_e(spec.chain, spec.frontier_b_max);
                row.llr_delta = llr_delta;
                row.llr_e = llr_e;
                if (llr_e < 1e-15)
                    row.error = "epsilon undefined: LLR_e = 0";
                else
                    row.epsilon = llr_delta / llr_e - 1.0;
                break;
            }
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep(SweepKind kind, const SweepSpec& spec) {
    const size_t npoints = kind == SweepKind::frontier ? spec.delta_grid.size() : spec.b_grid.size();
    if (npoints == 0) throw WrongShape("sweep: empty grid");
    if (kind == SweepKind::frontier && spec.frontier_b_max < 0)
        throw WrongShape("sweep: frontier requires a fixed b_max");

    std::vector<SweepRow> rows(npoints);
    const int jobs = std::max(1, spec.jobs);
    if (jobs == 1) {
        for (size_t i = 0; i < npoints; ++i) rows[i] = sweep_point(kind, spec, i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < npoints; i = next.fetch_add(1))
                    rows[i] = sweep_point(kind, spec, i);
            });
        for (auto& t : workers) t.join();
    }
    return rows;
}

std::string sweep_kind_name(SweepKind kind) {
    switch (kind) {
        case SweepKind::pof_vs_b: return "pof_vs_b";
        case SweepKind::fairness_vs_b: return "fairness_vs_b";
        case SweepKind::frontier: return "frontier";
    }
    return "?";
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "kind,abscissa,llr_o,llr_e,llr_delta,pof,theta_star,epsilon\n";
    auto cell = [&](const std::optional<double>& v) {
        os << ",";
        if (v) os << format_double(*v);
    };
    for (const auto& r : rows) {
        os << sweep_kind_name(r.kind) << "," << format_double(r.abscissa);
        cell(r.llr_o);
        cell(r.llr_e);
        cell(r.llr_delta);
        cell(r.pof);
        cell(r.theta_star);
        cell(r.epsilon);
        os << "\n";
    }
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    auto put = [](nlohmann::json& j, const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    for (const auto& r : rows) {
        nlohmann::json j;
        j["kind"] = sweep_kind_name(r.kind);
        j["abscissa"] = r.abscissa;
        put(j, "llr_o", r.llr_o);
        put(j, "llr_e", r.llr_e);
        put(j, "llr_delta", r.llr_delta);
        put(j, "pof", r.pof);
        put(j, "theta_star", r.theta_star);
        put(j, "epsilon", r.epsilon);
        if (!r.error.empty()) j["error"] = r.error;
        out.push_back(std::move(j));
    }
    return out;
}

nlohmann::json decay_to_json(const DecayFit& fit) {
    return {{"b_values", fit.b_values},     {"llr_values", fit.llr_values},
            {"excluded", fit.excluded},     {"slope", fit.slope},
            {"intercept", fit.intercept},   {"r_squared", fit.r_squared},
            {"degenerate", fit.degenerate}, {"exponential", fit.exponential()}};
}

}  // namespace fairshare
