#include "nmm/rmtr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nmm {

namespace {

constexpr double kMinRadius = std::numeric_limits<double>::min();

void check_finite(const char* where, double v) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << where << ": non-finite value " << v;
        throw NumericalAbort(os.str());
    }
}

void check_finite(const char* where, const Vector& v) {
    if (!v.allFinite()) {
        throw NumericalAbort(std::string(where) + ": non-finite gradient entry");
    }
}

void shrink_radius(TrustRegionState& tr, const TrustRegionParams& p) {
    tr.radius = std::max(tr.radius * p.shrink, kMinRadius);
}

void grow_radius(TrustRegionState& tr, const TrustRegionParams& p) {
    tr.radius = std::min(tr.radius * p.grow, p.delta_max);
}

// Below this many ulps of |f| a value difference is rounding noise.
constexpr double kNoiseUlps = 1e3;

bool decrease_is_noise(double f_ref, double ared) {
    return std::abs(ared) <=
           kNoiseUlps * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f_ref));
}

// Trapezoidal estimate of f(x) - f(x + s) from the end-point gradients.
double gradient_decrease(const Vector& g_x, const Vector& g_trial, const Vector& s) {
    return -0.5 * (g_x + g_trial).dot(s);
}

} // namespace

void TrustRegionParams::validate() const {
    if (!(delta0 > 0.0) || !(delta_max >= delta0)) {
        throw ConfigError("trust region: need 0 < delta0 <= delta_max");
    }
    if (!(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0)) {
        throw ConfigError("trust region: need 0 < eta1 <= eta2 < 1");
    }
    if (!(shrink > 0.0 && shrink < 1.0)) {
        throw ConfigError("trust region: shrink must lie in (0, 1)");
    }
    if (!(grow > 1.0)) {
        throw ConfigError("trust region: grow must exceed 1");
    }
}

void VCycleConfig::validate() const {
    if (mu_pre < 1 || mu_post < 1 || mu_coarse < 1) {
        throw ConfigError("v-cycle: smoothing step counts must be at least 1");
    }
    if (max_cycles < 0) {
        throw ConfigError("v-cycle: max_cycles must be non-negative");
    }
    if (!(kappa > 0.0)) {
        throw ConfigError("v-cycle: kappa must be positive");
    }
    if (!(grad_tol >= 0.0)) {
        throw ConfigError("v-cycle: grad_tol must be non-negative");
    }
    if (weights.kind == WeightStrategy::Kind::fixed &&
        !(weights.fixed_w_add >= 0.0 && weights.fixed_w_add <= 1.0)) {
        throw ConfigError("v-cycle: fixed hybrid weight must lie in [0, 1]");
    }
    tr.validate();
}

SmoothResult smooth(const Objective& model, const Vector& x0, int steps, TrustRegionState& tr,
                    const TrustRegionParams& p, std::optional<double> known_value,
                    const AcceptObserver& on_accept) {
    if (steps < 1) {
        throw ContractViolation("smooth: steps must be at least 1");
    }
    require_dim("smooth", x0.size(), model.dim());

    SmoothResult r;
    r.x = x0;
    r.value = known_value ? *known_value : model.value(x0);
    check_finite("smooth (initial value)", r.value);
    r.entry_value = r.value;
    r.x_prev = r.x;
    r.value_prev = r.value;

    Vector g;
    Vector known_grad;
    double gnorm = 0.0;
    double curvature = 0.0;
    bool stale = true;

    for (int k = 0; k < steps; ++k) {
        r.x_prev = r.x;
        r.value_prev = r.value;

        if (stale) {
            g = known_grad.size() ? std::move(known_grad) : model.gradient(r.x);
            known_grad.resize(0);
            check_finite("smooth (gradient)", g);
            gnorm = g.norm();
            if (gnorm == 0.0) {
                break;
            }
            const Vector dir = g / gnorm;
            const double eps = 1e-7 * std::max(1.0, r.x.norm());
            const Vector g_probe = model.gradient(r.x + eps * dir);
            check_finite("smooth (curvature probe)", g_probe);
            curvature = dir.dot(g_probe - g) / eps;
            stale = false;
        }

        double alpha = tr.radius / gnorm;
        if (curvature > 0.0) {
            alpha = std::min(alpha, 1.0 / curvature);
        }
        const Vector trial = r.x - alpha * g;
        const double g2 = gnorm * gnorm;
        const double pred = alpha * g2 - 0.5 * alpha * alpha * g2 * curvature;
        const double f_trial = model.value(trial);
        check_finite("smooth (trial value)", f_trial);

        double ared = r.value - f_trial;
        Vector g_trial;
        if (decrease_is_noise(r.value, ared)) {
            g_trial = model.gradient(trial);
            check_finite("smooth (trial gradient)", g_trial);
            ared = gradient_decrease(g, g_trial, trial - r.x);
        }
        const double rho = ared / pred;
        const bool boundary = alpha * gnorm >= tr.radius * (1.0 - 1e-12);

        if (rho >= p.eta1 && ared > 0.0 && f_trial <= r.value) {
            r.x = trial;
            r.value = f_trial;
            ++r.accepted;
            stale = true;
            known_grad = std::move(g_trial);
            if (on_accept) {
                on_accept(f_trial);
            }
            if (rho >= p.eta2 && boundary) {
                grow_radius(tr, p);
            }
        } else {
            ++r.rejected;
            shrink_radius(tr, p);
        }
    }
    return r;
}

ControlResult convergence_control(const Objective& model, const Vector& x, double value_at_x,
                                  const Vector& correction, double pred_coarse,
                                  TrustRegionState& tr, const TrustRegionParams& p) {
    require_dim("convergence_control", x.size(), model.dim());
    require_dim("convergence_control (correction)", correction.size(), model.dim());

    ControlResult r{x, value_at_x, false, false};
    if (correction.isZero(0.0)) {
        return r;
    }
    r.attempted = true;
    const Vector trial = x + correction;
    const double f_trial = model.value(trial);
    check_finite("convergence_control (trial value)", f_trial);

    double ared = value_at_x - f_trial;
    if (decrease_is_noise(value_at_x, ared)) {
        const Vector g_x = model.gradient(x);
        const Vector g_trial = model.gradient(trial);
        check_finite("convergence_control (gradient)", g_trial);
        ared = gradient_decrease(g_x, g_trial, correction);
    }
    const double rho = ared / std::max(pred_coarse, std::numeric_limits<double>::epsilon());
    if (ared > 0.0 && rho >= p.eta1 && f_trial <= value_at_x) {
        r.x = trial;
        r.value = f_trial;
        r.accepted = true;
        if (rho >= p.eta2) {
            grow_radius(tr, p);
        }
    } else {
        shrink_radius(tr, p);
    }
    return r;
}

MultilevelSolver::MultilevelSolver(const ProblemHierarchy& hierarchy, VCycleConfig config)
    : hierarchy_(hierarchy), config_(std::move(config)) {
    hierarchy_.validate();
    config_.validate();
    if (!config_.single_level && hierarchy_.levels() < 2) {
        throw ConfigError("multilevel solver: need at least two levels (or single_level)");
    }
    states_.resize(hierarchy_.levels());
    for (LevelState& s : states_) {
        s.tr.radius = config_.tr.delta0;
        s.history = HistoryBuffer(config_.weights.capacity);
    }
}

HybridWeights MultilevelSolver::choose_weights(std::size_t coarse_level, const ModelAnchor& anchor,
                                               const SmoothResult& pre,
                                               const std::shared_ptr<const Objective>& coarse_obj,
                                               const TransferOps& ops) {
    LevelState& st = states_.at(coarse_level - 1);
    switch (config_.model_kind) {
    case ModelKind::additive:
        st.weights = {1.0, 0.0};
        return st.weights;
    case ModelKind::multiplicative:
        st.weights = {0.0, 1.0};
        return st.weights;
    case ModelKind::hybrid:
        break;
    }

    switch (config_.weights.kind) {
    case WeightStrategy::Kind::fixed:
        st.weights = HybridWeights::from_add(config_.weights.fixed_w_add);
        break;
    case WeightStrategy::Kind::mfv: {
        const CoarseModel probe(ModelKind::hybrid, anchor, coarse_obj);
        st.weights = mfv_weights(probe, pre.value_prev, ops.project(pre.x_prev));
        break;
    }
    case WeightStrategy::Kind::bayes:
        // The previous model at this level predicts the value at the new anchor;
        // f^l(x0) is already part of the anchor, so this costs no evaluation.
        if (st.last_model) {
            const ComponentValues v = st.last_model->components_from(anchor.x0, anchor.coarse_value);
            record_history(st.history, anchor.fine_value, v.additive, v.multiplicative);
            st.weights = bayes_update_weights(st.weights, st.history);
        }
        break;
    }
    return st.weights;
}

CycleOutcome MultilevelSolver::v_cycle(std::size_t level, const Objective& model,
                                       const Vector& x0, std::optional<double> known_value) {
    if (level < 2 || level > hierarchy_.levels()) {
        throw ContractViolation("v_cycle: level out of range");
    }
    const bool finest = level == hierarchy_.levels();
    const AcceptObserver& obs = finest ? observer_ : AcceptObserver{};
    LevelState& st = states_.at(level - 1);
    LevelState& child = states_.at(level - 2);

    const SmoothResult pre = smooth(model, x0, config_.mu_pre, st.tr, config_.tr, known_value, obs);

    const auto& coarse_obj = hierarchy_.objectives.at(level - 2);
    const TransferOps& ops = hierarchy_.transfers.at(level - 2);
    ModelAnchor anchor = make_anchor(model, pre.x, *coarse_obj, ops, config_.kappa);
    const HybridWeights w = choose_weights(level - 1, anchor, pre, coarse_obj, ops);
    auto coarse_model =
        std::make_shared<const CoarseModel>(config_.model_kind, std::move(anchor), coarse_obj, w);
    child.last_model = coarse_model;
    const Vector& xc0 = coarse_model->anchor().x0;

    CycleOutcome coarse;
    if (level == 2) {
        const SmoothResult solve =
            smooth(*coarse_model, xc0, config_.mu_coarse, child.tr, config_.tr);
        coarse = {solve.x, solve.value, solve.entry_value};
    } else {
        coarse = v_cycle(level - 1, *coarse_model, xc0);
    }

    const Vector coarse_step = coarse.x - xc0;
    const Vector correction = ops.prolongate(coarse_step);
    const double pred_coarse = coarse.entry_value - coarse.value;
    const ControlResult ctrl =
        convergence_control(model, pre.x, pre.value, correction, pred_coarse, st.tr, config_.tr);
    if (ctrl.attempted) {
        if (ctrl.accepted) {
            ++st.accepted_corrections;
            if (obs) {
                obs(ctrl.value);
            }
        } else {
            ++st.rejected_corrections;
            // Keep the next coarse solve inside the step that just failed.
            child.tr.radius =
                std::max(config_.tr.shrink * std::min(child.tr.radius, coarse_step.norm()),
                         kMinRadius);
        }
    }

    const SmoothResult post =
        smooth(model, ctrl.x, config_.mu_post, st.tr, config_.tr, ctrl.value, obs);
    return {post.x, post.value, pre.entry_value};
}

std::vector<double> MultilevelSolver::current_weights() const {
    std::vector<double> w;
    if (config_.single_level) {
        return w;
    }
    for (std::size_t level = hierarchy_.levels() - 1; level >= 1; --level) {
        w.push_back(states_.at(level - 1).weights.w_add);
    }
    return w;
}

int MultilevelSolver::total_accepted_corrections() const {
    int total = 0;
    for (const LevelState& s : states_) {
        total += s.accepted_corrections;
    }
    return total;
}

RunReport MultilevelSolver::minimize(const Vector& x_init) {
    const Objective& f = hierarchy_.finest();
    require_dim("minimize (initial iterate)", x_init.size(), f.dim());
    const std::size_t L = hierarchy_.levels();

    std::vector<std::uint64_t> v0(L), g0(L);
    for (std::size_t i = 0; i < L; ++i) {
        v0[i] = hierarchy_.objectives[i]->value_evals();
        g0[i] = hierarchy_.objectives[i]->grad_evals();
    }
    WorkLedger ledger(hierarchy_.dims());
    auto work = [&] {
        for (std::size_t i = 0; i < L; ++i) {
            ledger.set_counts(i, hierarchy_.objectives[i]->value_evals() - v0[i],
                              hierarchy_.objectives[i]->grad_evals() - g0[i]);
        }
        return ledger.total_units();
    };

    for (LevelState& s : states_) {
        s.weights = config_.model_kind == ModelKind::multiplicative ? HybridWeights{0.0, 1.0}
                    : config_.model_kind == ModelKind::additive  ? HybridWeights{1.0, 0.0}
                                                                 : HybridWeights{};
    }

    RunReport report;
    AcceptObserver user = observer_;
    observer_ = [&report, &user](double v) {
        report.accepted_fine_values.push_back(v);
        if (user) {
            user(v);
        }
    };

    Vector x = x_init;
    double fx = f.value(x);
    check_finite("minimize (initial value)", fx);
    Vector g = f.gradient(x);
    check_finite("minimize (initial gradient)", g);
    report.accepted_fine_values.push_back(fx);

    auto met = [&](double value, double gnorm) {
        return gnorm <= config_.grad_tol || (config_.target_value && value <= *config_.target_value);
    };

    double gnorm = g.lpNorm<Eigen::Infinity>();
    report.rows.push_back({0, fx, gnorm, work(), 0, current_weights()});
    bool done = met(fx, gnorm);

    try {
        int cycle = 0;
        while (!done && cycle < config_.max_cycles) {
            ++cycle;
            const int accepted_before = total_accepted_corrections();
            if (config_.single_level) {
                const SmoothResult r = smooth(f, x, config_.mu_pre + config_.mu_post,
                                              states_.back().tr, config_.tr, fx, observer_);
                x = r.x;
                fx = r.value;
            } else {
                const CycleOutcome out = v_cycle(L, f, x, fx);
                x = out.x;
                fx = out.value;
            }
            g = f.gradient(x);
            check_finite("minimize (gradient)", g);
            gnorm = g.lpNorm<Eigen::Infinity>();
            report.rows.push_back({cycle, fx, gnorm, work(),
                                   total_accepted_corrections() - accepted_before,
                                   current_weights()});
            done = met(fx, gnorm);
        }
        report.cycles = cycle;
    } catch (...) {
        observer_ = user;
        throw;
    }
    observer_ = user;

    report.x = x;
    report.converged = done;
    report.cost = report.rows.back().work_units;
    for (std::size_t i = 0; i < L; ++i) {
        report.value_evals.push_back(ledger.value_evals(i));
        report.grad_evals.push_back(ledger.grad_evals(i));
    }
    return report;
}

RunReport minimize(const ProblemHierarchy& hierarchy, const VCycleConfig& config,
                   const Vector& x_init) {
    MultilevelSolver solver(hierarchy, config);
    return solver.minimize(x_init);
}

} // namespace nmm
