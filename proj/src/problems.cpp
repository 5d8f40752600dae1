#include "nmm/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace nmm {

std::vector<Index> nested_grid_sizes(Index n_coarse, int levels) {
    if (levels < 1) {
        throw ContractViolation("nested_grid_sizes: need at least one level");
    }
    if (n_coarse < 1) {
        throw ContractViolation("nested_grid_sizes: n_coarse must be at least 1");
    }
    std::vector<Index> sizes{n_coarse};
    for (int l = 1; l < levels; ++l) {
        sizes.push_back(2 * sizes.back() + 1);
    }
    return sizes;
}

std::vector<double> quadratic_forcing(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> c;
    for (int k = 1; k <= 5; ++k) {
        // Mode k of the solution then has amplitude ~ 1/k.
        const double scale = (k * k * std::numbers::pi * std::numbers::pi + 1.0) / k;
        c.push_back((sign(rng) ? 1.0 : -1.0) * amp(rng) * scale);
    }
    return c;
}

QuadraticObjective::QuadraticObjective(Index n, std::vector<double> forcing_coeffs)
    : n_(n), h_(1.0 / static_cast<double>(n + 1)), a_(n, n), b_(n) {
    if (n < 1) {
        throw ContractViolation("QuadraticObjective: n must be at least 1");
    }
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(3 * n));
    for (Index i = 0; i < n; ++i) {
        t.emplace_back(i, i, 2.0 / h_ + h_);
        if (i > 0) {
            t.emplace_back(i, i - 1, -1.0 / h_);
        }
        if (i + 1 < n) {
            t.emplace_back(i, i + 1, -1.0 / h_);
        }
    }
    a_.setFromTriplets(t.begin(), t.end());
    a_.makeCompressed();
    for (Index i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i + 1) * h_;
        double beta = 0.0;
        for (std::size_t k = 0; k < forcing_coeffs.size(); ++k) {
            beta += forcing_coeffs[k] * std::sin(static_cast<double>(k + 1) * std::numbers::pi * ti);
        }
        b_[i] = h_ * beta;
    }
}

// Accumulated in extended precision so that the rounded value is monotone in
// the exact one down to the last few ulps; near the minimiser the decrease per
// step is far below double rounding of a plain dot product.
double QuadraticObjective::eval_value(const Vector& x) const {
    long double total = 0.0L;
    for (Index j = 0; j < a_.outerSize(); ++j) {
        long double ax = 0.0L;
        for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) {
            ax += static_cast<long double>(it.value()) * x[it.index()];
        }
        total += static_cast<long double>(x[j]) * (0.5L * ax - b_[j]);
    }
    return static_cast<double>(total);
}

Vector QuadraticObjective::eval_gradient(const Vector& x) const {
    return a_ * x - b_;
}

ProblemHierarchy build_quadratic_hierarchy(Index n_coarse, int levels, std::uint64_t seed) {
    if (levels < 2) {
        throw ContractViolation("build_quadratic_hierarchy: need at least two levels");
    }
    ProblemHierarchy h;
    h.name = "quadratic";
    const auto forcing = quadratic_forcing(seed);
    for (Index n : nested_grid_sizes(n_coarse, levels)) {
        h.objectives.push_back(std::make_shared<QuadraticObjective>(n, forcing));
    }
    for (int l = 0; l + 1 < levels; ++l) {
        h.transfers.push_back(build_interpolation_1d(h.objectives[static_cast<std::size_t>(l)]->dim()));
    }
    h.validate();
    return h;
}

Nonconvex1dObjective::Nonconvex1dObjective(Index n)
    : n_(n), h_(1.0 / static_cast<double>(n + 1)) {
    if (n < 1) {
        throw ContractViolation("Nonconvex1dObjective: n must be at least 1");
    }
}

double Nonconvex1dObjective::eval_value(const Vector& x) const {
    double diffs = 0.0;
    double local = 0.0;
    double left = 0.0;
    for (Index i = 0; i < n_; ++i) {
        const double d = (x[i] - left) / h_;
        diffs += d * d;
        local += std::sin(3.0 * x[i]) + 0.25 * x[i] * x[i] * x[i] * x[i];
        left = x[i];
    }
    const double last = left / h_;
    diffs += last * last;
    return h_ * (0.5 * diffs + local);
}

Vector Nonconvex1dObjective::eval_gradient(const Vector& x) const {
    Vector g(n_);
    for (Index i = 0; i < n_; ++i) {
        const double left = i > 0 ? x[i - 1] : 0.0;
        const double right = i + 1 < n_ ? x[i + 1] : 0.0;
        g[i] = (2.0 * x[i] - left - right) / h_ +
               h_ * (3.0 * std::cos(3.0 * x[i]) + x[i] * x[i] * x[i]);
    }
    return g;
}

ProblemHierarchy build_nonconvex_1d_hierarchy(Index n_coarse, int levels, std::uint64_t seed) {
    if (levels < 2) {
        throw ContractViolation("build_nonconvex_1d_hierarchy: need at least two levels");
    }
    ProblemHierarchy h;
    h.name = "nonconvex1d";
    static_cast<void>(seed);
    for (Index n : nested_grid_sizes(n_coarse, levels)) {
        h.objectives.push_back(std::make_shared<Nonconvex1dObjective>(n));
    }
    for (int l = 0; l + 1 < levels; ++l) {
        h.transfers.push_back(build_interpolation_1d(h.objectives[static_cast<std::size_t>(l)]->dim()));
    }
    h.validate();
    return h;
}

} // namespace nmm
