#include "nmm/resnet.hpp"

#include <cmath>
#include <random>

namespace nmm {

namespace {

using ConstMatMap = Eigen::Map<const Matrix>;
using ConstVecMap = Eigen::Map<const Vector>;
using MatMap = Eigen::Map<Matrix>;
using VecMap = Eigen::Map<Vector>;

// tanh through the vectorised exp; the scalar tanh dominates the run time
// otherwise. Arguments are clipped where tanh is 1 to double precision.
template <typename Derived>
Matrix fast_tanh(const Eigen::MatrixBase<Derived>& a) {
    const auto e = (2.0 * a.array().min(40.0).max(-40.0)).exp();
    return (1.0 - 2.0 / (e + 1.0)).matrix();
}

struct Offsets {
    Index w_in, b_in, blocks, block_size, w_out, b_out;
};

Offsets offsets(const ResNetSpec& s) {
    const DepthLayout l = s.layout();
    Offsets o{};
    o.w_in = 0;
    o.b_in = s.width * s.n_in;
    o.blocks = l.leading_params;
    o.block_size = l.block_params;
    o.w_out = l.leading_params + s.blocks * l.block_params;
    o.b_out = o.w_out + s.n_out * s.width;
    return o;
}

} // namespace

DepthLayout ResNetSpec::layout() const {
    DepthLayout l;
    l.blocks = blocks;
    l.block_params = width * width + width;
    l.leading_params = width * n_in + width;
    l.trailing_params = n_out * width + n_out;
    return l;
}

void ResNetSpec::validate() const {
    if (blocks < 1 || width < 1 || n_in < 1 || n_out < 1) {
        throw ContractViolation("ResNetSpec: blocks, width, n_in and n_out must be positive");
    }
    if (!(horizon > 0.0)) {
        throw ContractViolation("ResNetSpec: horizon must be positive");
    }
}

ResNetObjective::ResNetObjective(ResNetSpec spec, std::shared_ptr<const Dataset> data)
    : spec_(spec), data_(std::move(data)) {
    spec_.validate();
    if (!data_) {
        throw ContractViolation("ResNetObjective: null dataset");
    }
    require_dim("ResNetObjective (inputs)", data_->n_in(), spec_.n_in);
    require_dim("ResNetObjective (labels)", data_->n_out(), spec_.n_out);
    if (data_->samples() < 1) {
        throw ContractViolation("ResNetObjective: empty dataset");
    }
}

Vector ResNetObjective::hidden_state(const Vector& z, const Vector& x) const {
    require_dim("ResNetObjective::hidden_state (params)", x.size(), dim());
    require_dim("ResNetObjective::hidden_state (input)", z.size(), spec_.n_in);
    const Offsets o = offsets(spec_);
    const Index w = spec_.width;
    const double h = spec_.step();
    Vector u = ConstMatMap(x.data() + o.w_in, w, spec_.n_in) * z + ConstVecMap(x.data() + o.b_in, w);
    for (Index k = 0; k < spec_.blocks; ++k) {
        const double* base = x.data() + o.blocks + k * o.block_size;
        u += h * fast_tanh(ConstMatMap(base, w, w) * u + ConstVecMap(base + w * w, w));
    }
    return u;
}

Vector ResNetObjective::logits(const Vector& z, const Vector& x) const {
    const Offsets o = offsets(spec_);
    const Vector u = hidden_state(z, x);
    return ConstMatMap(x.data() + o.w_out, spec_.n_out, spec_.width) * u +
           ConstVecMap(x.data() + o.b_out, spec_.n_out);
}

double ResNetObjective::accuracy(const Vector& x) const {
    const auto cls = data_->class_indices();
    Index correct = 0;
    for (Index s = 0; s < data_->samples(); ++s) {
        Index best = 0;
        logits(data_->inputs.row(s).transpose(), x).maxCoeff(&best);
        correct += best == cls[static_cast<std::size_t>(s)] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(data_->samples());
}

double ResNetObjective::loss_and_gradient(const Vector& x, Vector* grad) const {
    const Offsets o = offsets(spec_);
    const Index w = spec_.width;
    const Index nb = spec_.blocks;
    const double h = spec_.step();
    const double inv_n = 1.0 / static_cast<double>(data_->samples());

    const ConstMatMap w_in(x.data() + o.w_in, w, spec_.n_in);
    const ConstVecMap b_in(x.data() + o.b_in, w);
    const ConstMatMap w_out(x.data() + o.w_out, spec_.n_out, w);
    const ConstVecMap b_out(x.data() + o.b_out, spec_.n_out);

    // One column per sample. Hidden states U_0..U_nb and activations tanh(A_k)
    // are kept for the backward sweep.
    const Matrix z = data_->inputs.transpose();
    const Matrix c = data_->labels.transpose();
    std::vector<Matrix> u(static_cast<std::size_t>(nb + 1));
    std::vector<Matrix> act(static_cast<std::size_t>(nb));

    u[0] = (w_in * z).colwise() + b_in;
    for (Index k = 0; k < nb; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const double* base = x.data() + o.blocks + k * o.block_size;
        act[ks] = fast_tanh((ConstMatMap(base, w, w) * u[ks]).colwise() +
                            ConstVecMap(base + w * w, w));
        u[ks + 1] = u[ks] + h * act[ks];
    }
    const Matrix logits = (w_out * u[static_cast<std::size_t>(nb)]).colwise() + b_out;
    const Eigen::RowVectorXd m = logits.colwise().maxCoeff();
    const Matrix e = (logits.rowwise() - m).array().exp().matrix();
    const Eigen::RowVectorXd sum_e = e.colwise().sum();
    const Eigen::RowVectorXd lse = m.array() + sum_e.array().log();
    const Eigen::RowVectorXd c_sum = c.colwise().sum();
    const double loss =
        (lse.cwiseProduct(c_sum).sum() - c.cwiseProduct(logits).sum()) * inv_n;

    if (!grad) {
        return loss;
    }
    grad->setZero(dim());
    Vector& g = *grad;
    // d loss / d logits = (softmax * sum(c) - c) / n
    Matrix dlogits = e.array().rowwise() * (c_sum.array() / sum_e.array());
    dlogits = (dlogits - c) * inv_n;
    MatMap(g.data() + o.w_out, spec_.n_out, w).noalias() =
        dlogits * u[static_cast<std::size_t>(nb)].transpose();
    VecMap(g.data() + o.b_out, spec_.n_out) = dlogits.rowwise().sum();
    Matrix du = w_out.transpose() * dlogits;
    for (Index k = nb - 1; k >= 0; --k) {
        const auto ks = static_cast<std::size_t>(k);
        const double* base = x.data() + o.blocks + k * o.block_size;
        double* gbase = g.data() + o.blocks + k * o.block_size;
        const Matrix da = h * du.cwiseProduct((1.0 - act[ks].array().square()).matrix());
        MatMap(gbase, w, w).noalias() = da * u[ks].transpose();
        VecMap(gbase + w * w, w) = da.rowwise().sum();
        du.noalias() += ConstMatMap(base, w, w).transpose() * da;
    }
    MatMap(g.data() + o.w_in, w, spec_.n_in).noalias() = du * z.transpose();
    VecMap(g.data() + o.b_in, w) = du.rowwise().sum();
    return loss;
}

double ResNetObjective::eval_value(const Vector& x) const {
    return loss_and_gradient(x, nullptr);
}

Vector ResNetObjective::eval_gradient(const Vector& x) const {
    Vector g;
    loss_and_gradient(x, &g);
    return g;
}

ProblemHierarchy build_resnet_hierarchy(const ResNetSpec& coarse, int refinements,
                                        std::shared_ptr<const Dataset> data) {
    if (refinements < 1) {
        throw ContractViolation("build_resnet_hierarchy: need at least one refinement");
    }
    coarse.validate();
    ProblemHierarchy hier;
    hier.name = "resnet";
    ResNetSpec spec = coarse;
    for (int r = 0; r <= refinements; ++r) {
        hier.objectives.push_back(std::make_shared<ResNetObjective>(spec, data));
        if (r < refinements) {
            hier.transfers.push_back(build_resnet_transfer(spec.layout()));
            spec.blocks = 2 * spec.blocks - 1;
        }
    }
    hier.validate();
    return hier;
}

Vector resnet_initial_params(const ResNetSpec& spec, std::uint64_t seed, double scale) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Offsets o = offsets(spec);
    const Index w = spec.width;
    Vector x = Vector::Zero(spec.num_params());
    auto fill = [&](Index offset, Index count, double fan_in) {
        const double sd = scale / std::sqrt(fan_in);
        for (Index i = 0; i < count; ++i) {
            x[offset + i] = sd * gauss(rng);
        }
    };
    fill(o.w_in, w * spec.n_in, static_cast<double>(spec.n_in));
    for (Index k = 0; k < spec.blocks; ++k) {
        fill(o.blocks + k * o.block_size, w * w, static_cast<double>(w));
    }
    fill(o.w_out, spec.n_out * w, static_cast<double>(w));
    return x;
}

} // namespace nmm
