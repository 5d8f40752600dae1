#pragma once

#include "nmm/hierarchy.hpp"

#include <cstdint>

namespace nmm {

/// Grid sizes n_1 = n_coarse, n_{l+1} = 2 n_l + 1 for `levels` levels.
std::vector<Index> nested_grid_sizes(Index n_coarse, int levels);

/// f(x) = 1/2 x^T A x - b^T x, the h-weighted discretisation of
///   int 1/2 u'^2 + 1/2 u^2 - beta(t) u dt
/// on n interior nodes of (0, 1) with zero boundary values:
///   A = tridiag(-1, 2, -1) / h + h I,  b_i = h beta(t_i).
class QuadraticObjective final : public Objective {
public:
    QuadraticObjective(Index n, std::vector<double> forcing_coeffs);

    Index dim() const override { return n_; }
    double spacing() const { return h_; }
    const Eigen::SparseMatrix<double>& matrix() const { return a_; }
    const Vector& rhs() const { return b_; }

protected:
    double eval_value(const Vector& x) const override;
    Vector eval_gradient(const Vector& x) const override;

private:
    Index n_;
    double h_;
    Eigen::SparseMatrix<double> a_;
    Vector b_;
};

/// beta(t) = sum_k c_k sin(k pi t); coefficients drawn from `seed`.
std::vector<double> quadratic_forcing(std::uint64_t seed);

ProblemHierarchy build_quadratic_hierarchy(Index n_coarse, int levels, std::uint64_t seed);

/// f(x) = sum_i h [ 1/2 ((x_{i+1} - x_i)/h)^2 ] + sum_i h [ sin(3 x_i) + x_i^4 / 4 ]
/// over n interior nodes with x_0 = x_{n+1} = 0. Smooth, nonconvex, bounded
/// below by -n h.
class Nonconvex1dObjective final : public Objective {
public:
    explicit Nonconvex1dObjective(Index n);

    Index dim() const override { return n_; }
    double spacing() const { return h_; }

protected:
    double eval_value(const Vector& x) const override;
    Vector eval_gradient(const Vector& x) const override;

private:
    Index n_;
    double h_;
};

/// The functional has no random data, so `seed` does not change the objectives.
ProblemHierarchy build_nonconvex_1d_hierarchy(Index n_coarse, int levels, std::uint64_t seed);

} // namespace nmm
