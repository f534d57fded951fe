#include "fairshare/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace fairshare {

namespace {

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw WrongShape(where + ": expected a nonempty nested array");
    const size_t rows = j.size();
    const size_t cols = j.front().size();
    Eigen::MatrixXd m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw WrongShape(where + ": ragged matrix at row " + std::to_string(r));
        for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    double start, stop, step;
    char c1, c2;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':')
        throw WrongShape("grid '" + text + "': expected start:stop:step");
    if (step <= 0 || stop < start)
        throw WrongShape("grid '" + text + "': need step > 0 and stop >= start");
    std::vector<double> out;
    for (long long i = 0;; ++i) {
        double v = start + static_cast<double>(i) * step;
        if (v > stop + step / 2) break;
        out.push_back(v);
    }
    return out;
}

std::vector<int> parse_int_grid(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_grid(text)) {
        int i = static_cast<int>(std::lround(v));
        if (std::abs(v - i) > 1e-9)
            throw WrongShape("grid '" + text + "': expected integer points");
        out.push_back(i);
    }
    return out;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig cfg;
    try {
        if (j.contains("users")) {
            for (const auto& ju : j.at("users")) {
                UserModel u;
                u.label = ju.value("label", "");
                u.support = ju.at("support").get<std::vector<int>>();
                u.transitions = matrix_from_json(ju.at("transitions"),
                                                 "user '" + u.label + "' transitions");
                cfg.users.push_back(std::move(u));
            }
        }
        if (j.contains("joint")) {
            ExplicitJoint joint;
            joint.states = j.at("joint").at("states").get<std::vector<std::vector<int>>>();
            joint.kernel = j.at("joint").at("kernel").get<std::vector<std::vector<double>>>();
            cfg.joint = std::move(joint);
        }
        if (j.contains("b_max")) cfg.b_max = j.at("b_max").get<int>();
        if (j.contains("b_grid")) {
            if (j.at("b_grid").is_string())
                cfg.b_grid = parse_int_grid(j.at("b_grid").get<std::string>());
            else
                cfg.b_grid = j.at("b_grid").get<std::vector<int>>();
        }
        if (j.contains("delta")) {
            if (j.at("delta").is_string()) {
                if (j.at("delta").get<std::string>() != "unconstrained")
                    throw WrongShape("delta: expected a number or \"unconstrained\"");
                cfg.delta_unconstrained = true;
            } else {
                cfg.delta = j.at("delta").get<double>();
            }
        }
        if (j.contains("delta_grid")) {
            if (j.at("delta_grid").is_string())
                cfg.delta_grid = parse_grid(j.at("delta_grid").get<std::string>());
            else
                cfg.delta_grid = j.at("delta_grid").get<std::vector<double>>();
        }
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.steps = j.value("T", 1'000'000LL);
        cfg.output = j.value("output", "");
        cfg.csv_output = j.value("csv_output", "");
        if (j.contains("tolerances")) {
            LpTolerances tol;
            const auto& jt = j.at("tolerances");
            tol.feasibility = jt.value("feasibility", tol.feasibility);
            tol.optimality = jt.value("optimality", tol.optimality);
            tol.pivot = jt.value("pivot", tol.pivot);
            cfg.tolerances = tol;
        }
    } catch (const nlohmann::json::exception& e) {
        throw WrongShape(std::string("config parse error: ") + e.what());
    }
    if (!cfg.b_grid.empty())
        for (size_t i = 1; i < cfg.b_grid.size(); ++i)
            if (cfg.b_grid[i] <= cfg.b_grid[i - 1])
                throw WrongShape("config: b_grid must be strictly increasing");
    for (size_t i = 1; i < cfg.delta_grid.size(); ++i)
        if (cfg.delta_grid[i] <= cfg.delta_grid[i - 1])
            throw WrongShape("config: delta_grid must be strictly increasing");
    if (cfg.users.empty() && !cfg.joint)
        throw WrongShape("config: need either \"users\" or \"joint\"");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw WrongShape("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw WrongShape("config '" + path + "': " + e.what());
    }
    return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    if (!users.empty()) {
        nlohmann::json ju = nlohmann::json::array();
        for (const auto& u : users)
            ju.push_back({{"label", u.label},
                          {"support", u.support},
                          {"transitions", matrix_to_json(u.transitions)}});
        j["users"] = std::move(ju);
    }
    if (joint) j["joint"] = {{"states", joint->states}, {"kernel", joint->kernel}};
    if (b_max) j["b_max"] = *b_max;
    if (!b_grid.empty()) j["b_grid"] = b_grid;
    if (delta_unconstrained)
        j["delta"] = "unconstrained";
    else if (delta)
        j["delta"] = *delta;
    if (!delta_grid.empty()) j["delta_grid"] = delta_grid;
    j["seed"] = seed;
    j["T"] = steps;
    if (!output.empty()) j["output"] = output;
    if (!csv_output.empty()) j["csv_output"] = csv_output;
    if (tolerances)
        j["tolerances"] = {{"feasibility", tolerances->feasibility},
                           {"optimality", tolerances->optimality},
                           {"pivot", tolerances->pivot}};
    return j;
}

JointChain RunConfig::build_chain() const {
    if (joint) {
        Eigen::MatrixXd kernel(joint->kernel.size(),
                               joint->kernel.empty() ? 0 : joint->kernel.front().size());
        for (size_t r = 0; r < joint->kernel.size(); ++r) {
            if (joint->kernel[r].size() != static_cast<size_t>(kernel.cols()))
                throw WrongShape("config: ragged joint kernel");
            for (size_t c = 0; c < joint->kernel[r].size(); ++c) kernel(r, c) = joint->kernel[r][c];
        }
        return build_joint_chain(joint->states, kernel);
    }
    return build_joint_chain(users);
}

}  // namespace fairshare
