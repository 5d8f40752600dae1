#pragma once

#include "nmm/objective.hpp"
#include "nmm/transfer.hpp"

#include <string>
#include <vector>

namespace nmm {

/// Objectives f^1 .. f^L (coarse to fine) and the transfers between
/// consecutive levels: transfers[i] maps level i (coarse) to level i + 1.
struct ProblemHierarchy {
    std::string name;
    std::vector<ObjectivePtr> objectives;
    std::vector<TransferOps> transfers;

    std::size_t levels() const { return objectives.size(); }
    const Objective& finest() const { return *objectives.back(); }
    std::vector<Index> dims() const;

    /// Throws ConfigError if the level count or dimensions do not chain.
    void validate() const;
};

} // namespace nmm
