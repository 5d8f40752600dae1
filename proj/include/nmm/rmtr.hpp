#pragma once

#include "nmm/coarse_models.hpp"
#include "nmm/hierarchy.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace nmm {

struct TrustRegionParams {
    double delta0 = 1.0;
    double delta_max = 1e3;
    double eta1 = 0.1;
    double eta2 = 0.75;
    double shrink = 0.5;
    double grow = 2.0;

    void validate() const;
};

struct TrustRegionState {
    double radius = 1.0;
};

/// Called with the model value each time a fine-level iterate is accepted.
using AcceptObserver = std::function<void(double)>;

struct SmoothResult {
    Vector x;
    double value = 0.0;
    double entry_value = 0.0;
    /// Iterate (and value) before the last smoothing step.
    Vector x_prev;
    double value_prev = 0.0;
    int accepted = 0;
    int rejected = 0;
};

/// Trust-region Cauchy-point smoothing.
///
/// Each step takes s = -alpha g with alpha = min(radius/|g|, 1/c), where c is
/// the curvature along g from one forward-difference gradient probe; c <= 0
/// uses the boundary step. The step is accepted iff
/// rho = (h(x) - h(x + s)) / pred >= eta1. The radius shrinks on rejection and
/// grows on rho >= eta2 with a boundary step. After a rejection the gradient
/// and curvature are reused. A zero gradient ends smoothing early.
///
/// When h(x) - h(x + s) is within rounding noise of h(x), the actual decrease
/// is replaced by -(g(x) + g(x + s))^T s / 2, which stays accurate near a
/// minimiser; the trial gradient is then reused if the step is accepted.
///
/// `known_value` skips the initial evaluation of h(x) when the caller has it.
SmoothResult smooth(const Objective& model, const Vector& x, int steps, TrustRegionState& tr,
                    const TrustRegionParams& params,
                    std::optional<double> known_value = std::nullopt,
                    const AcceptObserver& on_accept = {});

struct ControlResult {
    Vector x;
    double value = 0.0;
    bool accepted = false;
    bool attempted = false;
};

/// Accepts x + correction iff it decreases h and
/// (h(x) - h(x + correction)) / max(pred_coarse, eps) >= eta1, with the same
/// gradient-based decrease as smooth() when the value difference is noise.
/// A zero correction is a no-op and leaves the radius alone.
ControlResult convergence_control(const Objective& model, const Vector& x, double value_at_x,
                                  const Vector& correction, double pred_coarse,
                                  TrustRegionState& tr, const TrustRegionParams& params);

struct WeightStrategy {
    enum class Kind { fixed, mfv, bayes };
    Kind kind = Kind::fixed;
    double fixed_w_add = 0.5;
    /// History length for bayes; 0 keeps every past cycle.
    std::size_t capacity = 0;

    static WeightStrategy fixed(double w_add) { return {Kind::fixed, w_add, 0}; }
    static WeightStrategy mfv() { return {Kind::mfv, 0.5, 0}; }
    static WeightStrategy bayes(std::size_t capacity) { return {Kind::bayes, 0.5, capacity}; }
};

struct VCycleConfig {
    int mu_pre = 2;
    int mu_post = 2;
    int mu_coarse = 20;
    ModelKind model_kind = ModelKind::additive;
    WeightStrategy weights = {};
    double kappa = kDefaultKappa;
    double grad_tol = 1e-6;
    /// Optional stop once f(x) <= target_value.
    std::optional<double> target_value;
    int max_cycles = 100;
    /// Skip the hierarchy: each cycle is mu_pre + mu_post smoothing steps on f^L.
    bool single_level = false;
    TrustRegionParams tr = {};

    void validate() const;
};

struct CycleRecord {
    int cycle = 0;
    double f_value = 0.0;
    double grad_norm = 0.0;
    double work_units = 0.0;
    int accepted_coarse_steps = 0;
    /// w_add per coarse level, from level L-1 down to level 1.
    std::vector<double> w_add;
};

struct RunReport {
    std::vector<CycleRecord> rows;
    /// Fine-level objective values at every accepted fine iterate, in order.
    std::vector<double> accepted_fine_values;
    Vector x;
    bool converged = false;
    int cycles = 0;
    /// Work units at the first row meeting the stopping criterion, else at the last row.
    double cost = 0.0;
    std::vector<std::uint64_t> value_evals;
    std::vector<std::uint64_t> grad_evals;
};

/// Per-level solver state. Index 0 is the coarsest level.
struct LevelState {
    TrustRegionState tr;
    HistoryBuffer history;
    HybridWeights weights;
    std::shared_ptr<const CoarseModel> last_model;
    int accepted_corrections = 0;
    int rejected_corrections = 0;
};

struct CycleOutcome {
    Vector x;
    double value = 0.0;
    double entry_value = 0.0;
};

/// Recursive multilevel trust-region V-cycle over a problem hierarchy.
///
/// Levels are numbered 1 (coarsest) .. L (finest) in the public interface. The
/// hierarchy must outlive the solver.
class MultilevelSolver {
public:
    MultilevelSolver(const ProblemHierarchy& hierarchy, VCycleConfig config);

    /// One V-cycle entered at `level` with model h^level. level >= 2.
    CycleOutcome v_cycle(std::size_t level, const Objective& model, const Vector& x0,
                         std::optional<double> known_value = std::nullopt);

    RunReport minimize(const Vector& x_init);

    const LevelState& level_state(std::size_t level) const { return states_.at(level - 1); }
    const VCycleConfig& config() const { return config_; }

    /// Called with every accepted fine-level value (pre/post smoothing and corrections).
    void set_accept_observer(AcceptObserver obs) { observer_ = std::move(obs); }

private:
    HybridWeights choose_weights(std::size_t coarse_level, const ModelAnchor& anchor,
                                 const SmoothResult& pre,
                                 const std::shared_ptr<const Objective>& coarse_obj,
                                 const TransferOps& ops);
    std::vector<double> current_weights() const;
    int total_accepted_corrections() const;

    const ProblemHierarchy& hierarchy_;
    VCycleConfig config_;
    std::vector<LevelState> states_;
    AcceptObserver observer_;
};

/// Convenience wrapper: build a solver and run it.
RunReport minimize(const ProblemHierarchy& hierarchy, const VCycleConfig& config,
                   const Vector& x_init);

} // namespace nmm
