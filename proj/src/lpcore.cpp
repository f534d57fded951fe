#include "fairshare/lpcore.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace fairshare {

int LinearProgram::add_variable(std::string name, bool free_var) {
    int idx = num_vars++;
    objective.push_back(0.0);
    var_names.push_back(name.empty() ? "x" + std::to_string(idx) : std::move(name));
    if (free_var) free_vars.push_back(idx);
    return idx;
}

namespace {

struct SparseCol {
    std::vector<std::pair<int, double>> entries;  // (row, value)
};

// Standard-form core: min c.z s.t. Az = b, z >= 0, with artificials last.
struct Simplex {
    int m = 0;
    int ntot = 0;        // including artificials
    int first_artificial = 0;
    std::vector<SparseCol> cols;
    Eigen::VectorXd rhs;
    std::vector<double> cost2;  // phase-2 costs (0 on artificials)

    LpTolerances tol;
    int refactor_period = 64;
    std::vector<int> basis;
    std::vector<char> in_basis;
    Eigen::MatrixXd b_inv;
    Eigen::VectorXd x_b;
    long iterations = 0;

    double col_dot(int j, const Eigen::VectorXd& y) const {
        double s = 0.0;
        for (auto [r, v] : cols[j].entries) s += y(r) * v;
        return s;
    }

    // Remove artificials left basic at zero after phase 1, so a later pivot
    // cannot push them positive and silently violate their row. Rows with no
    // eligible replacement column are linearly dependent and stay inert.
    void expel_basic_artificials() {
        refactor();  // pivot decisions below need an accurate inverse
        for (int i = 0; i < m; ++i) {
            if (basis[i] < first_artificial) continue;
            int entering = -1;
            double best = 1e-7;  // stricter than tol.pivot: these pivots pick the new basis
            for (int j = 0; j < first_artificial; ++j) {
                if (in_basis[j]) continue;
                double v = 0.0;
                for (auto [r, val] : cols[j].entries) v += b_inv(i, r) * val;
                if (std::abs(v) > best) {
                    entering = j;
                    best = std::abs(v);
                }
            }
            if (entering < 0) continue;
            Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
            for (auto [r, v] : cols[entering].entries) a(r) = v;
            Eigen::VectorXd w = b_inv * a;
            in_basis[basis[i]] = 0;
            in_basis[entering] = 1;
            basis[i] = entering;
            b_inv.row(i) /= w(i);
            for (int r = 0; r < m; ++r) {
                if (r == i) continue;
                double f = w(r);
                if (f != 0.0) b_inv.row(r) -= f * b_inv.row(i);
            }
        }
        x_b = b_inv * rhs;
    }

    void refactor() {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (auto [r, v] : cols[basis[i]].entries) b(r, i) = v;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
        if (!lu.isInvertible())
            throw NumericalFailure("simplex: basis matrix became singular");
        b_inv = lu.inverse();
        x_b = b_inv * rhs;
        // A basis whose true basic solution is negative means accumulated
        // pivot error walked us out of the feasible region; bail out so the
        // caller can retry with tighter refactorization.
        if (m > 0 && x_b.minCoeff() < -100 * tol.feasibility)
            throw NumericalFailure("simplex: basis lost primal feasibility");
    }

    // Returns true when the phase reached optimality, false when unbounded.
    bool run_phase(const std::vector<double>& cost, bool allow_artificials) {
        const long bland_after = 5L * (m + ntot);
        const long max_iter = 10000L + 50L * (m + ntot);
        long phase_iter = 0;
        while (true) {
            if (++phase_iter + iterations > max_iter)
                throw NumericalFailure("simplex: iteration limit exceeded");
            const bool bland = phase_iter > bland_after;

            Eigen::VectorXd c_b(m);
            for (int i = 0; i < m; ++i) c_b(i) = cost[basis[i]];
            Eigen::VectorXd y = b_inv.transpose() * c_b;

            int entering = -1;
            double best = -tol.optimality;
            const int limit = allow_artificials ? ntot : first_artificial;
            for (int j = 0; j < limit; ++j) {
                if (in_basis[j]) continue;
                double d = cost[j] - col_dot(j, y);
                if (d < best) {
                    entering = j;
                    best = d;
                    if (bland) break;  // first improving index
                }
                if (bland && entering >= 0) break;
            }
            if (entering < 0) {
                iterations += phase_iter;
                return true;
            }

            Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
            for (auto [r, v] : cols[entering].entries) a(r) = v;
            Eigen::VectorXd w = b_inv * a;

            double t = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i)
                if (w(i) > tol.pivot) t = std::min(t, std::max(x_b(i), 0.0) / w(i));
            if (!std::isfinite(t)) {
                iterations += phase_iter;
                return false;  // unbounded direction
            }
            // Among minimum-ratio rows take the largest pivot element for
            // numerical stability, or the smallest basis index under Bland.
            int leave = -1;
            const double t_cut = t * (1 + 1e-12) + 1e-15;
            for (int i = 0; i < m; ++i) {
                if (w(i) <= tol.pivot || std::max(x_b(i), 0.0) / w(i) > t_cut) continue;
                if (leave < 0 || (bland ? basis[i] < basis[leave] : w(i) > w(leave))) leave = i;
            }

            // Pivot: update basis, basic solution, and the explicit inverse.
            t = std::max(x_b(leave), 0.0) / w(leave);
            x_b -= t * w;
            x_b(leave) = t;
            in_basis[basis[leave]] = 0;
            in_basis[entering] = 1;
            basis[leave] = entering;
            b_inv.row(leave) /= w(leave);
            for (int i = 0; i < m; ++i) {
                if (i == leave) continue;
                double f = w(i);
                if (f != 0.0) b_inv.row(i) -= f * b_inv.row(leave);
            }
            if (phase_iter % refactor_period == 0) refactor();
        }
    }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpTolerances& tol) {
    const int n0 = lp.num_vars;
    const int n_eq = static_cast<int>(lp.equalities.size());
    const int n_ineq = static_cast<int>(lp.inequalities.size());
    const int m = n_eq + n_ineq;

    const bool maximize = lp.sense == Sense::maximize;

    // Extended variables: structural, negative parts of free vars, surplus.
    const int nf = static_cast<int>(lp.free_vars.size());
    const int n_ext = n0 + nf + n_ineq;

    // Dense-by-row assembly, then sign normalization so rhs >= 0.
    std::vector<std::vector<std::pair<int, double>>> rows(m);
    Eigen::VectorXd rhs(m);
    std::vector<double> row_sign(m, 1.0);
    for (int r = 0; r < m; ++r) {
        const LinearRow& src = r < n_eq ? lp.equalities[r] : lp.inequalities[r - n_eq];
        rows[r] = src.coeffs;
        rhs(r) = src.rhs;
        for (auto& [c, v] : rows[r])
            if (c < 0 || c >= n0) throw WrongShape("solve_lp: row references unknown variable");
    }
    std::vector<int> neg_part(n0, -1);
    for (int k = 0; k < nf; ++k) neg_part[lp.free_vars[k]] = n0 + k;
    for (int r = 0; r < m; ++r) {
        std::vector<std::pair<int, double>> extended;
        for (auto [c, v] : rows[r]) {
            extended.emplace_back(c, v);
            if (neg_part[c] >= 0) extended.emplace_back(neg_part[c], -v);
        }
        if (r >= n_eq) extended.emplace_back(n0 + nf + (r - n_eq), -1.0);  // surplus
        if (rhs(r) < 0) {
            for (auto& [c, v] : extended) v = -v;
            rhs(r) = -rhs(r);
            row_sign[r] = -1.0;
        }
        rows[r] = std::move(extended);
    }

    auto attempt = [&](int refactor_period) -> LpSolution {
    Simplex s;
    s.refactor_period = refactor_period;
    s.m = m;
    s.first_artificial = n_ext;
    s.ntot = n_ext + m;
    s.tol = tol;
    s.rhs = rhs;
    s.cols.resize(s.ntot);
    for (int r = 0; r < m; ++r)
        for (auto [c, v] : rows[r])
            if (v != 0.0) s.cols[c].entries.emplace_back(r, v);
    for (int r = 0; r < m; ++r) s.cols[n_ext + r].entries.emplace_back(r, 1.0);

    s.cost2.assign(s.ntot, 0.0);
    for (int j = 0; j < n0; ++j) {
        double c = lp.objective.empty() ? 0.0 : lp.objective[j];
        if (maximize) c = -c;
        s.cost2[j] = c;
        if (neg_part[j] >= 0) s.cost2[neg_part[j]] = -c;
    }

    s.basis.resize(m);
    s.in_basis.assign(s.ntot, 0);
    for (int r = 0; r < m; ++r) {
        s.basis[r] = n_ext + r;
        s.in_basis[n_ext + r] = 1;
    }
    s.b_inv = Eigen::MatrixXd::Identity(m, m);
    s.x_b = rhs;

    LpSolution sol;

    // Phase 1.
    std::vector<double> cost1(s.ntot, 0.0);
    for (int r = 0; r < m; ++r) cost1[n_ext + r] = 1.0;
    if (!s.run_phase(cost1, true))
        throw NumericalFailure("simplex: phase-1 reported an unbounded direction");
    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
        if (s.basis[i] >= n_ext) art_sum += std::max(s.x_b(i), 0.0);
    const double rhs_scale = m > 0 ? rhs.cwiseAbs().maxCoeff() : 0.0;
    if (art_sum > tol.feasibility * std::max(1.0, rhs_scale)) {
        sol.status = LpStatus::infeasible;
        sol.iterations = s.iterations;
        return sol;
    }

    s.expel_basic_artificials();

    // Phase 2 (artificials barred from entering; any still basic sit on
    // linearly dependent rows and cannot move).
    if (!s.run_phase(s.cost2, false)) {
        sol.status = LpStatus::unbounded;
        sol.iterations = s.iterations;
        return sol;
    }
    s.refactor();

    std::vector<double> z(n_ext, 0.0);
    for (int i = 0; i < m; ++i)
        if (s.basis[i] < n_ext) z[s.basis[i]] = s.x_b(i);

    sol.primal.assign(n0, 0.0);
    for (int j = 0; j < n0; ++j) {
        sol.primal[j] = z[j];
        if (neg_part[j] >= 0) sol.primal[j] -= z[neg_part[j]];
    }

    double obj = 0.0;
    for (int j = 0; j < n0 && j < static_cast<int>(lp.objective.size()); ++j)
        obj += lp.objective[j] * sol.primal[j];
    sol.objective = obj;

    // Row residuals against the original formulation.
    double resid = 0.0;
    auto row_value = [&](const LinearRow& row) {
        double v = 0.0;
        for (auto [c, coef] : row.coeffs) v += coef * sol.primal[c];
        return v;
    };
    for (const auto& row : lp.equalities) resid = std::max(resid, std::abs(row_value(row) - row.rhs));
    for (const auto& row : lp.inequalities) resid = std::max(resid, row.rhs - row_value(row));
    sol.max_residual = resid;
    if (resid > 100 * tol.feasibility)
        throw NumericalFailure("simplex: residual blow-up, max residual " + std::to_string(resid));

    Eigen::VectorXd c_b(m);
    for (int i = 0; i < m; ++i) c_b(i) = s.cost2[s.basis[i]];
    Eigen::VectorXd y = s.b_inv.transpose() * c_b;
    sol.dual.resize(m);
    for (int r = 0; r < m; ++r) sol.dual[r] = (maximize ? -1.0 : 1.0) * row_sign[r] * y(r);

    sol.status = LpStatus::optimal;
    sol.iterations = s.iterations;
    return sol;
    };

    try {
        return attempt(64);
    } catch (const NumericalFailure&) {
        // Degenerate pivoting occasionally corrupts the running basis
        // inverse; retry once with a refactorization after every pivot.
        return attempt(1);
    }
}

void dump_lp(const LinearProgram& lp, std::ostream& os) {
    auto name = [&](int j) {
        return j < static_cast<int>(lp.var_names.size()) && !lp.var_names[j].empty()
                   ? lp.var_names[j]
                   : "x" + std::to_string(j);
    };
    os << (lp.sense == Sense::maximize ? "maximize" : "minimize") << ":";
    for (int j = 0; j < static_cast<int>(lp.objective.size()); ++j)
        if (lp.objective[j] != 0.0) os << " " << lp.objective[j] << "*" << name(j);
    os << "\n";
    auto emit = [&](const LinearRow& row, const char* sense, int idx, const char* prefix) {
        os << (row.name.empty() ? std::string(prefix) + std::to_string(idx) : row.name) << ":";
        for (auto [c, v] : row.coeffs) os << " " << v << "*" << name(c);
        os << ", " << sense << ", " << row.rhs << "\n";
    };
    for (size_t r = 0; r < lp.equalities.size(); ++r)
        emit(lp.equalities[r], "=", static_cast<int>(r), "eq");
    for (size_t r = 0; r < lp.inequalities.size(); ++r)
        emit(lp.inequalities[r], ">=", static_cast<int>(r), "ge");
    for (int f : lp.free_vars) os << "free: " << name(f) << "\n";
}

}  // namespace fairshare
