#pragma once

#include "nmm/objective.hpp"
#include "nmm/transfer.hpp"

#include <cstddef>
#include <deque>
#include <optional>

namespace nmm {

inline constexpr double kDefaultKappa = 1e-8;

/// Frozen fine-level data a coarse model is built around.
///
/// x0 is the projected fine iterate, fine_value and restricted_fine_grad come
/// from the fine model at that iterate, coarse_value/coarse_grad from f^l at x0.
struct ModelAnchor {
    Vector x0;
    double fine_value = 0.0;
    Vector restricted_fine_grad;
    double coarse_value = 0.0;
    Vector coarse_grad;
    double kappa = kDefaultKappa;
};

/// Evaluates `fine` and `coarse` once each at the matching points and freezes
/// the results. x0 = ops.project(x_fine).
ModelAnchor make_anchor(const Objective& fine, const Vector& x_fine, const Objective& coarse,
                        const TransferOps& ops, double kappa = kDefaultKappa);

enum class ModelKind { additive, multiplicative, hybrid };

const char* to_string(ModelKind kind);

/// Convex weights of the hybrid model. Always w_add + w_mult == 1.
struct HybridWeights {
    double w_add = 0.5;
    double w_mult = 0.5;

    static HybridWeights from_add(double w_add) { return {w_add, 1.0 - w_add}; }
};

/// Values of the additive and multiplicative components at one point.
struct ComponentValues {
    double additive = 0.0;
    double multiplicative = 0.0;
};

/// First-order coherent coarse model h^l built from f^l and an anchor.
///
///   additive:        h_add(x)  = f(x) + (F - C) + <g_add, x - x0>
///   multiplicative:  h_mult(x) = gt(x) (f(x) + k) - k,
///                    gt(x)     = (F + k)/(C + k) + <g_mult, x - x0>
///   hybrid:          w_add h_add(x) + w_mult h_mult(x)
///
/// with F the fine value, C = f(x0), r the restricted fine gradient and
///   g_add  = r - grad f(x0)
///   g_mult = r/(C + k) - (F + k) grad f(x0)/(C + k)^2.
///
/// The multiplicative correction is applied to the shifted function f + k, so
/// h_mult(x0) = F and grad h_mult(x0) = r hold exactly; k only guards the
/// ratio against f(x0) -> 0 and the model tends to gt(x) f(x) as k -> 0.
///
/// Evaluations of f^l go through the wrapped objective, so its counters
/// account for the model's work. The component accessors are available for
/// every kind; value()/gradient() dispatch on kind().
class CoarseModel final : public Objective {
public:
    CoarseModel(ModelKind kind, ModelAnchor anchor, ObjectivePtr coarse,
                HybridWeights weights = {});

    Index dim() const override { return coarse_->dim(); }
    ModelKind kind() const { return kind_; }
    const ModelAnchor& anchor() const { return anchor_; }
    const HybridWeights& weights() const { return weights_; }
    const Objective& coarse_objective() const { return *coarse_; }

    const Vector& additive_shift_gradient() const { return grad_gamma_add_; }
    const Vector& mult_shift_gradient() const { return grad_gamma_mult_; }

    double additive_value(const Vector& x) const;
    Vector additive_gradient(const Vector& x) const;

    /// Linearised multiplicative correction gt(x).
    double mult_corr_value(const Vector& x) const;
    double mult_value(const Vector& x) const;
    Vector mult_gradient(const Vector& x) const;

    double hybrid_value(const Vector& x) const;
    Vector hybrid_gradient(const Vector& x) const;

    /// Both component values at x given f^l(x) already evaluated.
    ComponentValues components_from(const Vector& x, double coarse_value_at_x) const;

    /// Both component values at x; one evaluation of f^l.
    ComponentValues components(const Vector& x) const;

protected:
    double eval_value(const Vector& x) const override;
    Vector eval_gradient(const Vector& x) const override;

private:
    double additive_from(const Vector& x, double fx) const;
    double mult_from(const Vector& x, double fx) const;

    ModelKind kind_;
    ModelAnchor anchor_;
    ObjectivePtr coarse_;
    HybridWeights weights_;
    double additive_offset_;
    double gamma_mult_at_x0_;
    Vector grad_gamma_add_;
    Vector grad_gamma_mult_;
};

/// Matching-function-value weights.
///
/// Chooses w_add so that w_add * add_value + w_mult * mult_value reproduces
/// prev_fine_value, where the model values are taken at the projected previous
/// fine iterate. The result is clamped to [0, 1]; a vanishing denominator
/// (|add - mult| <= 1e-12 (1 + |prev_fine_value|)) falls back to 0.5.
HybridWeights mfv_weights(double prev_fine_value, double add_value, double mult_value);

/// Convenience overload: evaluates the components of `model` at x_prev_coarse.
HybridWeights mfv_weights(const CoarseModel& model, double prev_fine_value,
                          const Vector& x_prev_coarse);

/// Returns the unclamped MFV weight, or nullopt on a degenerate denominator.
std::optional<double> mfv_raw_weight(double prev_fine_value, double add_value, double mult_value);

/// One history sample: fine value and both model predictions at the same point.
struct HistorySample {
    double fine_value = 0.0;
    double add_value = 0.0;
    double mult_value = 0.0;
};

/// Bounded FIFO of history samples. capacity == 0 means unbounded.
class HistoryBuffer {
public:
    explicit HistoryBuffer(std::size_t capacity = 0) : capacity_(capacity) {}

    void record(double fine_value, double add_value, double mult_value);

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::size_t capacity() const { return capacity_; }
    bool unbounded() const { return capacity_ == 0; }
    const std::deque<HistorySample>& samples() const { return samples_; }

private:
    std::size_t capacity_;
    std::deque<HistorySample> samples_;
};

inline void record_history(HistoryBuffer& buf, double fine_value, double add_value,
                           double mult_value) {
    buf.record(fine_value, add_value, mult_value);
}

/// Per-model variance estimates (mean squared residual, floored).
struct ModelVariances {
    double add = 0.0;
    double mult = 0.0;
};

inline constexpr double kVarianceFloor = 1e-300;
/// Bayesian weights are kept this far away from 0 and 1.
inline constexpr double kBayesWeightMargin = 1e-12;

ModelVariances estimate_variances(const HistoryBuffer& buf);

/// Posterior reweighting with Gaussian likelihoods
///   psi_m = (2 pi sigma_m^2)^(-d/2) exp(-d/2),
///   w_add <- w_add psi_add / (w_mult psi_mult + w_add psi_add).
/// Evaluated in log space. An empty buffer or a non-finite posterior leaves the
/// weights unchanged.
HybridWeights bayes_update_weights(const HybridWeights& w, const HistoryBuffer& buf);

} // namespace nmm
