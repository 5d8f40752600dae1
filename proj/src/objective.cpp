#include "nmm/objective.hpp"

#include <cmath>

namespace nmm {

double Objective::value(const Vector& x) const {
    require_dim("Objective::value", x.size(), dim());
    value_evals_.fetch_add(1, std::memory_order_relaxed);
    return eval_value(x);
}

Vector Objective::gradient(const Vector& x) const {
    require_dim("Objective::gradient", x.size(), dim());
    grad_evals_.fetch_add(1, std::memory_order_relaxed);
    Vector g = eval_gradient(x);
    require_dim("Objective::gradient (result)", g.size(), dim());
    return g;
}

void Objective::reset_counters() const {
    value_evals_.store(0);
    grad_evals_.store(0);
}

Vector fd_gradient(const Objective& f, const Vector& x, double h) {
    require_dim("fd_gradient", x.size(), f.dim());
    if (!(h > 0.0)) {
        throw ContractViolation("fd_gradient: step h must be positive");
    }
    Vector g(x.size());
    Vector probe = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        probe[i] = xi + h;
        const double fp = f.value(probe);
        probe[i] = xi - h;
        const double fm = f.value(probe);
        probe[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

double fd_relative_error(const Objective& f, const Vector& x, double h) {
    const Vector g = f.gradient(x);
    const Vector g_fd = fd_gradient(f, x, h);
    return (g - g_fd).lpNorm<Eigen::Infinity>() / (1.0 + g.lpNorm<Eigen::Infinity>());
}

WorkLedger::WorkLedger(std::vector<Index> dims)
    : dims_(std::move(dims)), values_(dims_.size(), 0), grads_(dims_.size(), 0) {
    if (dims_.empty()) {
        throw ContractViolation("WorkLedger: at least one level required");
    }
    for (Index n : dims_) {
        if (n <= 0) {
            throw ContractViolation("WorkLedger: level dimensions must be positive");
        }
    }
}

void WorkLedger::set_counts(std::size_t level, std::uint64_t value_evals,
                            std::uint64_t grad_evals) {
    values_.at(level) = value_evals;
    grads_.at(level) = grad_evals;
}

void WorkLedger::add_counts(std::size_t level, std::uint64_t value_evals,
                            std::uint64_t grad_evals) {
    values_.at(level) += value_evals;
    grads_.at(level) += grad_evals;
}

double WorkLedger::level_units(std::size_t level) const {
    const double scale = static_cast<double>(dims_.at(level)) / static_cast<double>(dims_.back());
    return scale * (static_cast<double>(grads_.at(level)) + 0.5 * static_cast<double>(values_.at(level)));
}

double WorkLedger::total_units() const {
    double total = 0.0;
    for (std::size_t l = 0; l < dims_.size(); ++l) {
        total += level_units(l);
    }
    return total;
}

} // namespace nmm
