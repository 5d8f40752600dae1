#pragma once

#include "nmm/datasets.hpp"
#include "nmm/hierarchy.hpp"

#include <memory>

namespace nmm {

/// Fully connected residual network read as forward Euler in depth:
///
///   u_0     = W_in z + b_in
///   u_{k+1} = u_k + h tanh(W_k u_k + b_k),   k = 0 .. blocks-1,  h = T / blocks
///   logits  = W_out u_blocks + b_out
///
/// Parameters are flattened as [W_in, b_in | (W_k, b_k) per block | W_out, b_out]
/// with column-major matrices.
struct ResNetSpec {
    Index blocks = 3;
    Index width = 8;
    Index n_in = 2;
    Index n_out = 2;
    double horizon = 1.0;

    double step() const { return horizon / static_cast<double>(blocks); }
    DepthLayout layout() const;
    Index num_params() const { return layout().size(); }
    void validate() const;
};

class ResNetObjective final : public Objective {
public:
    ResNetObjective(ResNetSpec spec, std::shared_ptr<const Dataset> data);

    Index dim() const override { return spec_.num_params(); }
    const ResNetSpec& spec() const { return spec_; }
    const Dataset& data() const { return *data_; }

    /// Network output for one input.
    Vector logits(const Vector& z, const Vector& params) const;

    /// Final hidden state u_blocks for one input.
    Vector hidden_state(const Vector& z, const Vector& params) const;

    /// Fraction of samples whose arg-max logit matches the label.
    double accuracy(const Vector& params) const;

protected:
    double eval_value(const Vector& x) const override;
    Vector eval_gradient(const Vector& x) const override;

private:
    double loss_and_gradient(const Vector& x, Vector* grad) const;

    ResNetSpec spec_;
    std::shared_ptr<const Dataset> data_;
};

/// Depth hierarchy: blocks b, 2b - 1, 4b - 3, ... over `refinements` refinements
/// (3 -> 5 -> 9 -> 17 for the defaults), sharing one dataset.
ProblemHierarchy build_resnet_hierarchy(const ResNetSpec& coarse, int refinements,
                                        std::shared_ptr<const Dataset> data);

/// Random parameters: weights ~ N(0, scale^2 / fan_in), biases zero.
Vector resnet_initial_params(const ResNetSpec& spec, std::uint64_t seed, double scale = 1.0);

} // namespace nmm
