#include "nmm/checks.hpp"

#include "nmm/datasets.hpp"
#include "nmm/problems.hpp"
#include "nmm/resnet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nmm {

namespace {

Vector gaussian(Index n, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> g(0.0, sd);
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = g(rng);
    }
    return v;
}

// Tracks the worst case of a suite and where it happened.
struct Worst {
    double value = 0.0;
    std::string where;
    bool nan = false;

    void update(double v, const std::string& w) {
        if (std::isnan(v)) {
            nan = true;
            where = w;
            return;
        }
        if (v > value) {
            value = v;
            where = w;
        }
    }
};

CheckResult finish(std::string name, const Worst& w, double tol) {
    CheckResult r;
    r.name = std::move(name);
    r.worst = w.value;
    r.tolerance = tol;
    r.passed = !w.nan && w.value <= tol;
    std::ostringstream os;
    os << "worst " << w.value << " (tol " << tol << ")";
    if (!w.where.empty()) {
        os << " at " << w.where;
    }
    if (w.nan) {
        os << ", NaN encountered";
    }
    r.detail = os.str();
    return r;
}

std::string at(const Family& f, std::size_t level, int i) {
    return f.name + " level " + std::to_string(level + 1) + " sample " + std::to_string(i);
}

struct AnchorSample {
    std::size_t coarse_level;
    Vector x_fine;
    ModelAnchor anchor;
};

AnchorSample draw_anchor(const Family& fam, int i, std::mt19937_64& rng, double kappa) {
    const ProblemHierarchy& h = fam.hierarchy;
    const std::size_t pairs = h.levels() - 1;
    const std::size_t coarse = static_cast<std::size_t>(i) % pairs;
    AnchorSample s{coarse, random_point(h, coarse + 1, rng), {}};
    s.anchor = make_anchor(*h.objectives[coarse + 1], s.x_fine, *h.objectives[coarse],
                           h.transfers[coarse], kappa);
    return s;
}

HybridWeights weights_for(ModelKind kind, std::mt19937_64& rng) {
    switch (kind) {
    case ModelKind::additive:
        return {1.0, 0.0};
    case ModelKind::multiplicative:
        return {0.0, 1.0};
    case ModelKind::hybrid:
        break;
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return HybridWeights::from_add(u(rng));
}

} // namespace

std::vector<Family> check_families(std::uint64_t seed) {
    std::vector<Family> f;
    f.push_back({"quadratic", build_quadratic_hierarchy(7, 3, seed)});
    f.push_back({"nonconvex1d", build_nonconvex_1d_hierarchy(7, 3, seed)});
    for (const char* name : {"blobs", "smiley", "spiral"}) {
        auto data = std::make_shared<const Dataset>(generate_named(name, 32, seed));
        ResNetSpec spec;
        spec.n_in = data->n_in();
        spec.n_out = data->n_out();
        f.push_back({std::string("resnet-") + name, build_resnet_hierarchy(spec, 2, data)});
    }
    return f;
}

Vector random_point(const ProblemHierarchy& hier, std::size_t level, std::mt19937_64& rng) {
    const Objective& obj = *hier.objectives.at(level);
    if (const auto* net = dynamic_cast<const ResNetObjective*>(&obj)) {
        return resnet_initial_params(net->spec(), rng()) + gaussian(obj.dim(), rng, 0.1);
    }
    return gaussian(obj.dim(), rng);
}

CheckResult check_transfers(const std::vector<Family>& families, int vectors, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst adj;
    Worst inj;
    for (const Family& fam : families) {
        for (std::size_t l = 0; l < fam.hierarchy.transfers.size(); ++l) {
            const TransferOps& ops = fam.hierarchy.transfers[l];
            for (int i = 0; i < vectors; ++i) {
                const Vector u = gaussian(ops.n_coarse(), rng);
                const Vector v = gaussian(ops.n_fine(), rng);
                const Vector iu = ops.prolongate(u);
                const double lhs = iu.dot(v);
                const double rhs = u.dot(ops.restrict(v));
                adj.update(std::abs(lhs - rhs) / (1.0 + iu.norm() * v.norm()), at(fam, l, i));
                const Vector back = ops.project(iu);
                inj.update((back - u).lpNorm<Eigen::Infinity>(), at(fam, l, i));
            }
        }
    }
    CheckResult a = finish("transfer adjointness", adj, 1e-12);
    const CheckResult p = finish("transfer injection P(Ix) = x", inj, 0.0);
    a.name = "transfer suite";
    a.passed = a.passed && p.passed;
    a.worst = std::max(a.worst, p.worst);
    a.detail = "adjointness " + a.detail + "; injection " + p.detail;
    return a;
}

CheckResult check_coherence(const std::vector<Family>& families, ModelKind kind, int anchors,
                            std::uint64_t seed, double kappa) {
    std::mt19937_64 rng(seed);
    Worst zeroth;
    Worst first;
    for (const Family& fam : families) {
        for (int i = 0; i < anchors; ++i) {
            const AnchorSample s = draw_anchor(fam, i, rng, kappa);
            const ModelAnchor& a = s.anchor;
            const CoarseModel m(kind, a, fam.hierarchy.objectives[s.coarse_level],
                                weights_for(kind, rng));
            const double r_inf = a.restricted_fine_grad.lpNorm<Eigen::Infinity>();
            double tol0 = 1e-12 * (1.0 + std::abs(a.fine_value));
            double tol1 = 1e-12 * (1.0 + r_inf);
            if (kind == ModelKind::multiplicative) {
                tol0 = 2.0 * kappa;
                tol1 = 5.0 * kappa * (1.0 + r_inf) / (std::abs(a.coarse_value) + kappa);
            }
            const double e0 = std::abs(m.value(a.x0) - a.fine_value);
            const double e1 = (m.gradient(a.x0) - a.restricted_fine_grad).lpNorm<Eigen::Infinity>();
            zeroth.update(e0 / tol0, at(fam, s.coarse_level, i));
            first.update(e1 / tol1, at(fam, s.coarse_level, i));
        }
    }
    const std::string label = std::string("coherence (") + to_string(kind) + ")";
    CheckResult z = finish(label, zeroth, 1.0);
    const CheckResult f = finish(label, first, 1.0);
    z.passed = z.passed && f.passed;
    z.worst = std::max(z.worst, f.worst);
    z.detail = "zeroth-order err/tol " + z.detail + "; first-order err/tol " + f.detail;
    return z;
}

CheckResult check_directional(const std::vector<Family>& families, int anchors,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w;
    for (const Family& fam : families) {
        for (int i = 0; i < anchors; ++i) {
            const AnchorSample s = draw_anchor(fam, i, rng, kDefaultKappa);
            const ProblemHierarchy& h = fam.hierarchy;
            const Vector g_fine = h.objectives[s.coarse_level + 1]->gradient(s.x_fine);
            const Vector dir = gaussian(s.anchor.x0.size(), rng);
            const Vector i_dir = h.transfers[s.coarse_level].prolongate(dir);
            const double via_fine = g_fine.dot(i_dir);
            const double via_r = s.anchor.restricted_fine_grad.dot(dir);
            const double scale = 1.0 + g_fine.norm() * i_dir.norm();
            w.update(std::abs(via_fine - via_r) / scale, at(fam, s.coarse_level, i));
            // The model gradient at x0 is only as coherent as the model kind
            // allows, so the additive and hybrid models are checked here.
            for (ModelKind kind : {ModelKind::additive, ModelKind::hybrid}) {
                const CoarseModel m(kind, s.anchor, h.objectives[s.coarse_level],
                                    weights_for(kind, rng));
                w.update(std::abs(m.gradient(s.anchor.x0).dot(dir) - via_fine) / scale,
                         at(fam, s.coarse_level, i));
            }
        }
    }
    return finish("directional derivative identity", w, 1e-10);
}

CheckResult check_objective_gradients(const std::vector<Family>& families, int points,
                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w;
    for (const Family& fam : families) {
        for (std::size_t l = 0; l < fam.hierarchy.levels(); ++l) {
            for (int i = 0; i < points; ++i) {
                const Vector x = random_point(fam.hierarchy, l, rng);
                w.update(fd_relative_error(*fam.hierarchy.objectives[l], x), at(fam, l, i));
            }
        }
    }
    return finish("objective gradients vs finite differences", w, 1e-6);
}

CheckResult check_model_gradients(const std::vector<Family>& families, int points,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Worst w;
    for (const Family& fam : families) {
        for (int i = 0; i < points; ++i) {
            const AnchorSample s = draw_anchor(fam, i, rng, kDefaultKappa);
            const ObjectivePtr& coarse = fam.hierarchy.objectives[s.coarse_level];
            for (ModelKind kind :
                 {ModelKind::additive, ModelKind::multiplicative, ModelKind::hybrid}) {
                const CoarseModel m(kind, s.anchor, coarse, weights_for(kind, rng));
                const Vector x = random_point(fam.hierarchy, s.coarse_level, rng);
                w.update(fd_relative_error(m, x),
                         at(fam, s.coarse_level, i) + " " + to_string(kind));
            }
        }
    }
    return finish("model gradients vs finite differences", w, 1e-6);
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
    const std::vector<Family> fams = check_families(seed);
    return {
        check_transfers(fams, 100, seed + 1),
        check_coherence(fams, ModelKind::additive, 50, seed + 2),
        check_coherence(fams, ModelKind::multiplicative, 50, seed + 3),
        check_coherence(fams, ModelKind::hybrid, 50, seed + 4),
        check_directional(fams, 20, seed + 5),
        check_objective_gradients(fams, 10, seed + 6),
        check_model_gradients(fams, 10, seed + 7),
    };
}

} // namespace nmm
