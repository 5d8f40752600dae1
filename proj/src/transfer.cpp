#include "nmm/transfer.hpp"

#include <vector>

namespace nmm {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& entries) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    return m;
}

} // namespace

TransferOps::TransferOps(SparseMatrix prolongation, SparseMatrix projection)
    : prolongation_(std::move(prolongation)), projection_(std::move(projection)) {
    if (prolongation_.cols() <= 0) {
        throw ContractViolation("TransferOps: empty coarse level");
    }
    if (prolongation_.cols() > prolongation_.rows()) {
        throw ContractViolation("TransferOps: coarse level larger than fine level");
    }
    if (projection_.rows() != prolongation_.cols() || projection_.cols() != prolongation_.rows()) {
        throw ContractViolation("TransferOps: projection shape does not match prolongation");
    }
}

TransferOps TransferOps::identity(Index n) {
    if (n < 1) {
        throw ContractViolation("TransferOps::identity: n must be at least 1");
    }
    SparseMatrix eye(n, n);
    eye.setIdentity();
    return TransferOps(eye, eye);
}

Vector TransferOps::prolongate(const Vector& v) const {
    require_dim("TransferOps::prolongate", v.size(), n_coarse());
    return prolongation_ * v;
}

Vector TransferOps::restrict(const Vector& v) const {
    require_dim("TransferOps::restrict", v.size(), n_fine());
    return prolongation_.transpose() * v;
}

Vector TransferOps::project(const Vector& x) const {
    require_dim("TransferOps::project", x.size(), n_fine());
    return projection_ * x;
}

TransferOps build_interpolation_1d(Index n_coarse) {
    if (n_coarse < 1) {
        throw ContractViolation("build_interpolation_1d: n_coarse must be at least 1");
    }
    const Index n_fine = 2 * n_coarse + 1;
    std::vector<Triplet> prolong;
    std::vector<Triplet> inject;
    prolong.reserve(static_cast<std::size_t>(3 * n_coarse));
    inject.reserve(static_cast<std::size_t>(n_coarse));
    for (Index j = 0; j < n_coarse; ++j) {
        const Index centre = 2 * j + 1;
        prolong.emplace_back(centre - 1, j, 0.5);
        prolong.emplace_back(centre, j, 1.0);
        prolong.emplace_back(centre + 1, j, 0.5);
        inject.emplace_back(j, centre, 1.0);
    }
    return TransferOps(from_triplets(n_fine, n_coarse, prolong),
                       from_triplets(n_coarse, n_fine, inject));
}

DepthLayout refine_layout(const DepthLayout& coarse) {
    DepthLayout fine = coarse;
    fine.blocks = 2 * coarse.blocks - 1;
    return fine;
}

TransferOps build_resnet_transfer(const DepthLayout& coarse) {
    if (coarse.blocks < 2) {
        // A single block refines to a single block, which is not a coarsening.
        throw ContractViolation("build_resnet_transfer: need at least two coarse blocks");
    }
    if (coarse.block_params <= 0 || coarse.leading_params < 0 || coarse.trailing_params < 0) {
        throw ContractViolation("build_resnet_transfer: incompatible block shapes");
    }
    const DepthLayout fine = refine_layout(coarse);
    const Index bp = coarse.block_params;

    std::vector<Triplet> prolong;
    std::vector<Triplet> inject;

    auto pass_through = [&](Index fine_offset, Index coarse_offset, Index count) {
        for (Index i = 0; i < count; ++i) {
            prolong.emplace_back(fine_offset + i, coarse_offset + i, 1.0);
            inject.emplace_back(coarse_offset + i, fine_offset + i, 1.0);
        }
    };

    pass_through(0, 0, coarse.leading_params);

    const Index coarse_base = coarse.leading_params;
    const Index fine_base = fine.leading_params;
    for (Index k = 0; k < coarse.blocks; ++k) {
        const Index c_off = coarse_base + k * bp;
        const Index f_even = fine_base + (2 * k) * bp;
        for (Index i = 0; i < bp; ++i) {
            prolong.emplace_back(f_even + i, c_off + i, 1.0);
            inject.emplace_back(c_off + i, f_even + i, 1.0);
        }
        if (k + 1 < coarse.blocks) {
            const Index f_odd = fine_base + (2 * k + 1) * bp;
            for (Index i = 0; i < bp; ++i) {
                prolong.emplace_back(f_odd + i, c_off + i, 0.5);
                prolong.emplace_back(f_odd + i, c_off + bp + i, 0.5);
            }
        }
    }

    pass_through(fine_base + fine.blocks * bp, coarse_base + coarse.blocks * bp,
                 coarse.trailing_params);

    return TransferOps(from_triplets(fine.size(), coarse.size(), prolong),
                       from_triplets(coarse.size(), fine.size(), inject));
}

} // namespace nmm
