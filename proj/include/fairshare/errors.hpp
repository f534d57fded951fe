#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fairshare {

/// Base for model/contract violations. The CLI maps these to exit code 1.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotStochastic : ModelError {
    using ModelError::ModelError;
};

/// The kernel has more than one communicating class (or more than one
/// reachable recurrent class during policy evaluation).
struct Reducible : ModelError {
    std::vector<std::vector<int>> classes;
    explicit Reducible(const std::string& msg, std::vector<std::vector<int>> cls = {})
        : ModelError(msg), classes(std::move(cls)) {}
};

struct EmptyUserList : ModelError {
    using ModelError::ModelError;
};

struct SelfLoopViolated : ModelError {
    using ModelError::ModelError;
};

struct WrongShape : ModelError {
    using ModelError::ModelError;
};

struct Degenerate : ModelError {
    using ModelError::ModelError;
};

struct BatteryOutOfRange : ModelError {
    using ModelError::ModelError;
};

struct ActionNotAllowed : ModelError {
    using ModelError::ModelError;
};

struct ModeMismatch : ModelError {
    using ModelError::ModelError;
};

struct InstanceTooLarge : ModelError {
    using ModelError::ModelError;
};

struct NotAllGenerating : ModelError {
    using ModelError::ModelError;
};

struct TooFewPoints : ModelError {
    using ModelError::ModelError;
};

struct EfficientLLRZero : ModelError {
    double llr_o;
    double llr_e;
    EfficientLLRZero(const std::string& msg, double num, double den)
        : ModelError(msg), llr_o(num), llr_e(den) {}
};

/// Base for numerical/solver failures. The CLI maps these to exit code 2.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalFailure : SolverError {
    using SolverError::SolverError;
};

struct InternalError : SolverError {
    using SolverError::SolverError;
};

}  // namespace fairshare
