#pragma once

#include "nmm/types.hpp"

#include <Eigen/SparseCore>

namespace nmm {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Grid-transfer operators between a coarse level (n_coarse unknowns) and the
/// next finer level (n_fine unknowns).
///
///   prolongate : R^{n_coarse} -> R^{n_fine}      (I)
///   restrict   : R^{n_fine}   -> R^{n_coarse}    (R = I^T)
///   project    : R^{n_fine}   -> R^{n_coarse}    (P, with P(I x) = x)
///
/// Both operators are stored as sparse matrices; restriction applies the
/// transpose of the stored prolongation so the adjoint identity holds by
/// construction. Immutable once built.
///
/// The grid builders always produce n_coarse < n_fine; the constructor also
/// admits n_coarse == n_fine so degenerate two-level setups (identity
/// transfer) can be expressed.
class TransferOps {
public:
    TransferOps(SparseMatrix prolongation, SparseMatrix projection);

    static TransferOps identity(Index n);

    Index n_coarse() const { return prolongation_.cols(); }
    Index n_fine() const { return prolongation_.rows(); }

    Vector prolongate(const Vector& v) const;
    Vector restrict(const Vector& v) const;
    Vector project(const Vector& x) const;

    const SparseMatrix& prolongation() const { return prolongation_; }
    const SparseMatrix& projection() const { return projection_; }

    Matrix dense_prolongation() const { return Matrix(prolongation_); }
    Matrix dense_projection() const { return Matrix(projection_); }

private:
    SparseMatrix prolongation_;
    SparseMatrix projection_;
};

/// Piecewise-linear interpolation between nested 1-D grids of interior nodes
/// with homogeneous Dirichlet ends. Fine size is 2 * n_coarse + 1; coarse node
/// j sits on fine node 2j + 1. Projection is injection.
TransferOps build_interpolation_1d(Index n_coarse);

/// Flattened parameter layout of a network whose middle part is a stack of
/// identically shaped blocks:
///   [ leading | block_0 | ... | block_{blocks-1} | trailing ]
struct DepthLayout {
    Index blocks = 0;
    Index block_params = 0;
    Index leading_params = 0;
    Index trailing_params = 0;

    Index size() const { return leading_params + blocks * block_params + trailing_params; }
};

/// Depth refinement of a residual network seen as a forward-Euler time grid.
///
/// The fine network has 2 * blocks - 1 blocks. Coarse block k is copied to
/// fine block 2k, fine block 2k + 1 is the average of coarse blocks k and k + 1.
/// Leading and trailing parameters (input embedding, classifier head) pass
/// through unchanged. Projection injects the even fine blocks.
TransferOps build_resnet_transfer(const DepthLayout& coarse);

/// Layout of the network produced by build_resnet_transfer(coarse).
DepthLayout refine_layout(const DepthLayout& coarse);

} // namespace nmm
