#include "nmm/coarse_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nmm {

ModelAnchor make_anchor(const Objective& fine, const Vector& x_fine, const Objective& coarse,
                        const TransferOps& ops, double kappa) {
    if (!(kappa > 0.0)) {
        throw ContractViolation("make_anchor: kappa must be positive");
    }
    require_dim("make_anchor (fine iterate)", x_fine.size(), fine.dim());
    require_dim("make_anchor (transfer fine side)", ops.n_fine(), fine.dim());
    require_dim("make_anchor (transfer coarse side)", ops.n_coarse(), coarse.dim());

    ModelAnchor a;
    a.kappa = kappa;
    a.x0 = ops.project(x_fine);
    a.fine_value = fine.value(x_fine);
    a.restricted_fine_grad = ops.restrict(fine.gradient(x_fine));
    a.coarse_value = coarse.value(a.x0);
    a.coarse_grad = coarse.gradient(a.x0);
    return a;
}

const char* to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::additive:
        return "additive";
    case ModelKind::multiplicative:
        return "multiplicative";
    case ModelKind::hybrid:
        return "hybrid";
    }
    return "unknown";
}

CoarseModel::CoarseModel(ModelKind kind, ModelAnchor anchor, ObjectivePtr coarse,
                         HybridWeights weights)
    : kind_(kind), anchor_(std::move(anchor)), coarse_(std::move(coarse)), weights_(weights) {
    if (!coarse_) {
        throw ContractViolation("CoarseModel: null coarse objective");
    }
    const Index n = coarse_->dim();
    require_dim("CoarseModel (x0)", anchor_.x0.size(), n);
    require_dim("CoarseModel (restricted gradient)", anchor_.restricted_fine_grad.size(), n);
    require_dim("CoarseModel (coarse gradient)", anchor_.coarse_grad.size(), n);
    if (!(anchor_.kappa > 0.0)) {
        throw ContractViolation("CoarseModel: kappa must be positive");
    }
    if (!(weights_.w_add >= 0.0 && weights_.w_add <= 1.0 && weights_.w_mult >= 0.0 &&
          weights_.w_mult <= 1.0) ||
        std::abs(weights_.w_add + weights_.w_mult - 1.0) > 1e-12) {
        throw ContractViolation("CoarseModel: hybrid weights must be convex");
    }

    const double F = anchor_.fine_value;
    const double C = anchor_.coarse_value;
    const double k = anchor_.kappa;

    additive_offset_ = F - C;
    grad_gamma_add_ = anchor_.restricted_fine_grad - anchor_.coarse_grad;

    gamma_mult_at_x0_ = (F + k) / (C + k);
    grad_gamma_mult_ = anchor_.restricted_fine_grad / (C + k) -
                       ((F + k) / ((C + k) * (C + k))) * anchor_.coarse_grad;
}

double CoarseModel::additive_from(const Vector& x, double fx) const {
    return fx + additive_offset_ + grad_gamma_add_.dot(x - anchor_.x0);
}

double CoarseModel::mult_from(const Vector& x, double fx) const {
    return (gamma_mult_at_x0_ + grad_gamma_mult_.dot(x - anchor_.x0)) * (fx + anchor_.kappa) -
           anchor_.kappa;
}

double CoarseModel::additive_value(const Vector& x) const {
    require_dim("CoarseModel::additive_value", x.size(), dim());
    return additive_from(x, coarse_->value(x));
}

Vector CoarseModel::additive_gradient(const Vector& x) const {
    require_dim("CoarseModel::additive_gradient", x.size(), dim());
    return coarse_->gradient(x) + grad_gamma_add_;
}

double CoarseModel::mult_corr_value(const Vector& x) const {
    require_dim("CoarseModel::mult_corr_value", x.size(), dim());
    return gamma_mult_at_x0_ + grad_gamma_mult_.dot(x - anchor_.x0);
}

double CoarseModel::mult_value(const Vector& x) const {
    const double gt = mult_corr_value(x);
    return gt * (coarse_->value(x) + anchor_.kappa) - anchor_.kappa;
}

Vector CoarseModel::mult_gradient(const Vector& x) const {
    const double gt = mult_corr_value(x);
    const double fx = coarse_->value(x);
    return gt * coarse_->gradient(x) + (fx + anchor_.kappa) * grad_gamma_mult_;
}

ComponentValues CoarseModel::components_from(const Vector& x, double fx) const {
    require_dim("CoarseModel::components_from", x.size(), dim());
    return {additive_from(x, fx), mult_from(x, fx)};
}

ComponentValues CoarseModel::components(const Vector& x) const {
    require_dim("CoarseModel::components", x.size(), dim());
    return components_from(x, coarse_->value(x));
}

double CoarseModel::hybrid_value(const Vector& x) const {
    require_dim("CoarseModel::hybrid_value", x.size(), dim());
    const double fx = coarse_->value(x);
    // Exact zero weights drop the other component entirely so degenerate
    // weights reproduce the pure models.
    if (weights_.w_mult == 0.0) {
        return additive_from(x, fx);
    }
    const double mult = mult_from(x, fx);
    if (weights_.w_add == 0.0) {
        return mult;
    }
    return weights_.w_add * additive_from(x, fx) + weights_.w_mult * mult;
}

Vector CoarseModel::hybrid_gradient(const Vector& x) const {
    require_dim("CoarseModel::hybrid_gradient", x.size(), dim());
    if (weights_.w_mult == 0.0) {
        return additive_gradient(x);
    }
    const double fx = coarse_->value(x);
    const Vector gf = coarse_->gradient(x);
    const Vector mult = mult_corr_value(x) * gf + (fx + anchor_.kappa) * grad_gamma_mult_;
    if (weights_.w_add == 0.0) {
        return mult;
    }
    return weights_.w_add * (gf + grad_gamma_add_) + weights_.w_mult * mult;
}

double CoarseModel::eval_value(const Vector& x) const {
    switch (kind_) {
    case ModelKind::additive:
        return additive_value(x);
    case ModelKind::multiplicative:
        return mult_value(x);
    case ModelKind::hybrid:
        return hybrid_value(x);
    }
    return 0.0;
}

Vector CoarseModel::eval_gradient(const Vector& x) const {
    switch (kind_) {
    case ModelKind::additive:
        return additive_gradient(x);
    case ModelKind::multiplicative:
        return mult_gradient(x);
    case ModelKind::hybrid:
        return hybrid_gradient(x);
    }
    return Vector();
}

std::optional<double> mfv_raw_weight(double prev_fine_value, double add_value, double mult_value) {
    const double denom = add_value - mult_value;
    if (!std::isfinite(denom) || std::abs(denom) <= 1e-12 * (1.0 + std::abs(prev_fine_value))) {
        return std::nullopt;
    }
    return (prev_fine_value - mult_value) / denom;
}

HybridWeights mfv_weights(double prev_fine_value, double add_value, double mult_value) {
    const auto raw = mfv_raw_weight(prev_fine_value, add_value, mult_value);
    if (!raw || !std::isfinite(*raw)) {
        return {};
    }
    return HybridWeights::from_add(std::clamp(*raw, 0.0, 1.0));
}

HybridWeights mfv_weights(const CoarseModel& model, double prev_fine_value,
                          const Vector& x_prev_coarse) {
    const ComponentValues v = model.components(x_prev_coarse);
    return mfv_weights(prev_fine_value, v.additive, v.multiplicative);
}

void HistoryBuffer::record(double fine_value, double add_value, double mult_value) {
    samples_.push_back({fine_value, add_value, mult_value});
    if (capacity_ != 0 && samples_.size() > capacity_) {
        samples_.pop_front();
    }
}

ModelVariances estimate_variances(const HistoryBuffer& buf) {
    ModelVariances v;
    if (buf.empty()) {
        return v;
    }
    for (const HistorySample& s : buf.samples()) {
        const double ra = s.fine_value - s.add_value;
        const double rm = s.fine_value - s.mult_value;
        v.add += ra * ra;
        v.mult += rm * rm;
    }
    const double d = static_cast<double>(buf.size());
    v.add = std::max(v.add / d, kVarianceFloor);
    v.mult = std::max(v.mult / d, kVarianceFloor);
    return v;
}

HybridWeights bayes_update_weights(const HybridWeights& w, const HistoryBuffer& buf) {
    if (buf.empty()) {
        return w;
    }
    const ModelVariances var = estimate_variances(buf);
    const double d = static_cast<double>(buf.size());
    const double two_pi = 2.0 * std::numbers::pi;
    // The common exp(-d/2) factor cancels in the ratio.
    const double log_psi_add = -0.5 * d * std::log(two_pi * var.add);
    const double log_psi_mult = -0.5 * d * std::log(two_pi * var.mult);

    const double log_add = std::log(w.w_add) + log_psi_add;
    const double log_mult = std::log(w.w_mult) + log_psi_mult;
    if (std::isnan(log_add) || std::isnan(log_mult) ||
        (std::isinf(log_add) && std::isinf(log_mult))) {
        return w;
    }
    // w_add = 1 / (1 + exp(log_mult - log_add)), evaluated without overflow.
    const double diff = log_mult - log_add;
    double w_add = 0.0;
    if (diff > 0.0) {
        const double e = std::exp(-diff);
        w_add = e / (1.0 + e);
    } else {
        w_add = 1.0 / (1.0 + std::exp(diff));
    }
    if (!std::isfinite(w_add)) {
        return w;
    }
    w_add = std::clamp(w_add, kBayesWeightMargin, 1.0 - kBayesWeightMargin);
    return HybridWeights::from_add(w_add);
}

} // namespace nmm
