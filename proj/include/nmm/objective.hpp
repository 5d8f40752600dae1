#pragma once

#include "nmm/types.hpp"

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace nmm {

/// A smooth objective f : R^n -> R with evaluation counters.
///
/// value() and gradient() check the argument size, bump the matching counter
/// and forward to the derived implementation. Counters are atomic so a handle
/// can be shared by concurrent runs, but a single run should own its
/// hierarchy if per-run work accounting is wanted.
class Objective {
public:
    virtual ~Objective() = default;

    Objective() = default;
    Objective(const Objective&) = delete;
    Objective& operator=(const Objective&) = delete;

    virtual Index dim() const = 0;

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;

    std::uint64_t value_evals() const { return value_evals_.load(); }
    std::uint64_t grad_evals() const { return grad_evals_.load(); }
    void reset_counters() const;

protected:
    virtual double eval_value(const Vector& x) const = 0;
    virtual Vector eval_gradient(const Vector& x) const = 0;

private:
    mutable std::atomic<std::uint64_t> value_evals_{0};
    mutable std::atomic<std::uint64_t> grad_evals_{0};
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
Vector fd_gradient(const Objective& f, const Vector& x, double h = 1e-5);

/// ||g - g_fd||_inf / (1 + ||g||_inf); the relative error used by the oracle suites.
double fd_relative_error(const Objective& f, const Vector& x, double h = 1e-5);

/// Dimension-weighted work accounting.
///
/// A gradient evaluation on level l costs n_l / n_L units and a value
/// evaluation half of that. Levels are indexed coarse to fine, so the last
/// entry of `dims` is the finest level.
class WorkLedger {
public:
    explicit WorkLedger(std::vector<Index> dims);

    void set_counts(std::size_t level, std::uint64_t value_evals, std::uint64_t grad_evals);
    void add_counts(std::size_t level, std::uint64_t value_evals, std::uint64_t grad_evals);

    std::uint64_t value_evals(std::size_t level) const { return values_.at(level); }
    std::uint64_t grad_evals(std::size_t level) const { return grads_.at(level); }
    std::size_t levels() const { return dims_.size(); }

    double level_units(std::size_t level) const;
    double total_units() const;

private:
    std::vector<Index> dims_;
    std::vector<std::uint64_t> values_;
    std::vector<std::uint64_t> grads_;
};

/// Evaluates a user-supplied callable pair; used by tests and the python bindings.
class FunctionObjective final : public Objective {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using GradFn = std::function<Vector(const Vector&)>;

    FunctionObjective(Index n, ValueFn value, GradFn grad)
        : n_(n), value_(std::move(value)), grad_(std::move(grad)) {}

    Index dim() const override { return n_; }

protected:
    double eval_value(const Vector& x) const override { return value_(x); }
    Vector eval_gradient(const Vector& x) const override { return grad_(x); }

private:
    Index n_;
    ValueFn value_;
    GradFn grad_;
};

} // namespace nmm
