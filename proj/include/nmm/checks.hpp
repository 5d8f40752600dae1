#pragma once

#include "nmm/coarse_models.hpp"
#include "nmm/hierarchy.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace nmm {

/// Outcome of one invariant suite. `worst` is the largest observed error and
/// `tolerance` the bound it was compared against (both in the suite's own
/// relative measure; for ratio-based suites tolerance is 1).
struct CheckResult {
    std::string name;
    bool passed = true;
    double worst = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// Problem family instances the suites sweep over.
struct Family {
    std::string name;
    ProblemHierarchy hierarchy;
};

/// Small hierarchies of every family: quadratic, nonconvex1d and the three
/// ResNet datasets (3 levels each).
std::vector<Family> check_families(std::uint64_t seed = 0);

/// Random point on `level` (0-based, coarse to fine) of a family hierarchy.
/// ResNet points are random initialisations plus a perturbation.
Vector random_point(const ProblemHierarchy& hier, std::size_t level, std::mt19937_64& rng);

/// <I u, v> == <u, R v> to 1e-12 relative and P(I x) == x exactly.
CheckResult check_transfers(const std::vector<Family>& families, int vectors, std::uint64_t seed);

/// Zeroth- and first-order coherence of one model kind at `anchors` random
/// anchors per family. Hybrid anchors use random weights. Errors are reported
/// as the worst err/tol ratio, so the suite passes iff worst <= 1.
///   additive, hybrid:  |h(x0) - F| <= 1e-12 (1 + |F|),
///                      |grad h(x0) - r|_inf <= 1e-12 (1 + |r|_inf)
///   multiplicative:    |h(x0) - F| <= 2 k,
///                      |grad h(x0) - r|_inf <= 5 k (1 + |r|_inf) / (|C| + k)
CheckResult check_coherence(const std::vector<Family>& families, ModelKind kind, int anchors,
                            std::uint64_t seed, double kappa = kDefaultKappa);

/// <grad h(x0), s> == <grad f_fine(x_fine), I s> to 1e-10 relative for every kind.
CheckResult check_directional(const std::vector<Family>& families, int anchors,
                              std::uint64_t seed);

/// Objective gradients vs central differences, 1e-6 relative, on every level.
CheckResult check_objective_gradients(const std::vector<Family>& families, int points,
                                      std::uint64_t seed);

/// Model gradients (all three kinds) vs central differences, 1e-6 relative.
CheckResult check_model_gradients(const std::vector<Family>& families, int points,
                                  std::uint64_t seed);

/// Every suite with the default sample counts; used by `nmm check`.
std::vector<CheckResult> run_all_checks(std::uint64_t seed = 0);

} // namespace nmm
