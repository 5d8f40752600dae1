#include "nmm/transfer.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nmm;

namespace {

Vector random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v[i] = g(rng);
    }
    return v;
}

} // namespace

TEST(Interpolation1d, MatchesHandBuiltMatrix) {
    const TransferOps ops = build_interpolation_1d(2);
    Matrix expected(5, 2);
    expected << 0.5, 0.0, //
        1.0, 0.0,         //
        0.5, 0.5,         //
        0.0, 1.0,         //
        0.0, 0.5;
    EXPECT_EQ(ops.dense_prolongation(), expected);
    Matrix inject = Matrix::Zero(2, 5);
    inject(0, 1) = 1.0;
    inject(1, 3) = 1.0;
    EXPECT_EQ(ops.dense_projection(), inject);

    Vector u(2);
    u << 1.0, 3.0;
    Vector v(5);
    v << 1.0, 2.0, 3.0, 4.0, 5.0;
    EXPECT_TRUE(ops.prolongate(u).isApprox(expected * u));
    EXPECT_TRUE(ops.restrict(v).isApprox(expected.transpose() * v));
}

TEST(Interpolation1d, AdjointAndInjection) {
    std::mt19937_64 rng(3);
    const TransferOps ops = build_interpolation_1d(15);
    for (int i = 0; i < 100; ++i) {
        const Vector u = random_vector(15, rng);
        const Vector v = random_vector(31, rng);
        EXPECT_NEAR(ops.prolongate(u).dot(v), u.dot(ops.restrict(v)), 1e-12 * (1 + u.norm() * v.norm()));
        EXPECT_EQ(ops.project(ops.prolongate(u)), u);
    }
}

TEST(Interpolation1d, Errors) {
    EXPECT_THROW(build_interpolation_1d(0), ContractViolation);
    const TransferOps ops = build_interpolation_1d(3);
    EXPECT_THROW(ops.prolongate(Vector::Zero(7)), ContractViolation);
    EXPECT_THROW(ops.restrict(Vector::Zero(3)), ContractViolation);
    EXPECT_THROW(ops.project(Vector::Zero(3)), ContractViolation);
}

TEST(TransferOps, IdentityAndShapeChecks) {
    const TransferOps id = TransferOps::identity(4);
    const Vector x = Vector::LinSpaced(4, -1, 2);
    EXPECT_EQ(id.prolongate(x), x);
    EXPECT_EQ(id.restrict(x), x);
    EXPECT_EQ(id.project(x), x);
    EXPECT_THROW(TransferOps::identity(0), ContractViolation);

    SparseMatrix p(3, 4);
    SparseMatrix q(4, 3);
    EXPECT_THROW(TransferOps(p, q), ContractViolation);
    SparseMatrix p2(4, 2);
    SparseMatrix q2(4, 2);
    EXPECT_THROW(TransferOps(p2, q2), ContractViolation);
}

TEST(ResNetTransfer, LayoutAndStencil) {
    DepthLayout coarse{3, 2, 1, 1};
    const TransferOps ops = build_resnet_transfer(coarse);
    EXPECT_EQ(ops.n_coarse(), 1 + 3 * 2 + 1);
    EXPECT_EQ(ops.n_fine(), 1 + 5 * 2 + 1);
    EXPECT_EQ(refine_layout(coarse).blocks, 5);

    Vector x(8);
    x << 9, 1, 2, 3, 4, 5, 6, 7;
    Vector expected(12);
    // lead | blocks (1,2) (2,3) (3,4) (4,5) (5,6) | trail
    expected << 9, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 7;
    EXPECT_EQ(ops.prolongate(x), expected);
    EXPECT_EQ(ops.project(ops.prolongate(x)), x);
}

TEST(ResNetTransfer, DepthConstantParametersStayConstant) {
    DepthLayout coarse{3, 3, 2, 2};
    const TransferOps ops = build_resnet_transfer(coarse);
    Vector x(coarse.size());
    x << 1, 2, 5, 6, 7, 5, 6, 7, 5, 6, 7, 3, 4;
    const Vector f = ops.prolongate(x);
    for (Index k = 0; k < 5; ++k) {
        EXPECT_EQ(f.segment(2 + 3 * k, 3), x.segment(2, 3));
    }
}

TEST(ResNetTransfer, AdjointOnRandomVectors) {
    std::mt19937_64 rng(5);
    const TransferOps ops = build_resnet_transfer({5, 6, 4, 3});
    for (int i = 0; i < 100; ++i) {
        const Vector u = random_vector(ops.n_coarse(), rng);
        const Vector v = random_vector(ops.n_fine(), rng);
        EXPECT_NEAR(ops.prolongate(u).dot(v), u.dot(ops.restrict(v)), 1e-12 * (1 + u.norm() * v.norm()));
        EXPECT_EQ(ops.project(ops.prolongate(u)), u);
    }
}

TEST(ResNetTransfer, RejectsSingleBlock) {
    EXPECT_THROW(build_resnet_transfer({1, 2, 1, 1}), ContractViolation);
    EXPECT_THROW(build_resnet_transfer({3, 0, 1, 1}), ContractViolation);
}
