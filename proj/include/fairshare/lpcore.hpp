#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fairshare/errors.hpp"

namespace fairshare {

enum class Sense { minimize, maximize };

struct LinearRow {
    std::vector<std::pair<int, double>> coeffs;  // (variable, coefficient)
    double rhs = 0.0;
    std::string name;
};

/// Variables are nonnegative unless listed in `free_vars`. Inequalities are
/// in ">=" form.
struct LinearProgram {
    int num_vars = 0;
    Sense sense = Sense::minimize;
    std::vector<double> objective;
    std::vector<LinearRow> equalities;
    std::vector<LinearRow> inequalities;
    std::vector<int> free_vars;
    std::vector<std::string> var_names;

    int add_variable(std::string name = {}, bool free_var = false);
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> primal;
    std::vector<double> dual;  // one multiplier per row, equalities first
    long iterations = 0;
    double max_residual = 0.0;
};

struct LpTolerances {
    double feasibility = 1e-9;
    double optimality = 1e-9;
    double pivot = 1e-11;
};

/// Deterministic two-phase revised simplex (dense basis inverse, Dantzig
/// pricing with Bland's rule engaged after 5*(rows+cols) iterations).
LpSolution solve_lp(const LinearProgram& lp, const LpTolerances& tol = {});

/// Plain-text standard-form dump: one line per row,
/// `name: c0*x0 + c1*x1 ..., =|>=, rhs`. See README for the exact layout.
void dump_lp(const LinearProgram& lp, std::ostream& os);

}  // namespace fairshare
