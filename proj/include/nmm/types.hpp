#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace nmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when a caller breaks an operation's precondition (sizes, ranges).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an objective or model produces a non-finite value mid-run.
class NumericalAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown for malformed experiment configurations and hierarchies.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require_dim(const char* where, Index got, Index expected) {
    if (got != expected) {
        throw ContractViolation(std::string(where) + ": dimension mismatch (got " +
                                std::to_string(got) + ", expected " +
                                std::to_string(expected) + ")");
    }
}

} // namespace nmm
