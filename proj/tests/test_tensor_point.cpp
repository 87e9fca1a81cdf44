#include <gtest/gtest.h>

#include <random>

#include "kahler/tensor_point.hpp"

using namespace kahler;

TEST(TensorPoint, TraceOfDiagonalAgainstDiagonalInverse) {
    EXPECT_DOUBLE_EQ(trace(HermMatrix::diag({1.0, 3.0}), HermMatrix::diag({1.0, 0.5})), 2.5);
}

TEST(TensorPoint, MinEigenvalueOfIndefiniteDiagonal) {
    EXPECT_NEAR(min_eigenvalue(HermMatrix::diag({2.0, -1.0}), HermMatrix::identity(2)), -1.0, 1e-15);
}

TEST(TensorPoint, InverseContractsToIdentity) {
    HermMatrix g(2, {2.0, cplx(0.3, 0.4), cplx(0.3, -0.4), 1.5});
    HermMatrix gi = inverse_metric(g);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
            cplx s = 0.0;
            for (int b = 0; b < 2; ++b) s += gi(a, b) * g(c, b);
            EXPECT_NEAR(std::abs(s - (a == c ? 1.0 : 0.0)), 0.0, 1e-15);
        }
}

TEST(TensorPoint, SingularMetricThrows) {
    EXPECT_THROW(inverse_metric(HermMatrix::diag({1.0, 0.0})), SingularMetricError);
}

TEST(TensorPoint, SymmetrizeTakesHermitianPart) {
    HermMatrix a(2);
    a(0, 1) = cplx(1.0, 1.0);
    a(1, 0) = cplx(0.0, 0.0);
    a.symmetrize();
    EXPECT_NEAR(std::abs(a(0, 1) - cplx(0.5, 0.5)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1, 0) - cplx(0.5, -0.5)), 0.0, 1e-15);
}

TEST(TensorPoint, FrameMakesMetricIdentity) {
    HermMatrix g(2, {2.0, cplx(0.3, 0.4), cplx(0.3, -0.4), 1.5});
    Frame fr(g);
    PointTensor t(2, {false, true});
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) t(a, b) = g(a, b);
    PointTensor f = fr.apply(t);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) EXPECT_NEAR(std::abs(f(a, b) - (a == b ? 1.0 : 0.0)), 0.0, 1e-14);
}

// Property: frame eigenvalues of A equal the g-relative eigenvalues, trace is invariant.
TEST(TensorPoint, FrameInvariantsOnRandomMatrices) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        cplx off(nd(rng), nd(rng));
        HermMatrix g(2, {2.0 + std::abs(nd(rng)), 0.5 * off, 0.5 * std::conj(off), 2.0 + std::abs(nd(rng))});
        cplx ao(nd(rng), nd(rng));
        HermMatrix A(2, {nd(rng), ao, std::conj(ao), nd(rng)});
        PointTensor t(2, {false, true});
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) t(a, b) = A(a, b);
        HermMatrix F = Frame(g).apply(t).as_matrix();
        EXPECT_NEAR(trace(F, HermMatrix::identity(2)), trace(A, inverse_metric(g)), 1e-12);
        EXPECT_NEAR(min_eigenvalue(F, HermMatrix::identity(2)), min_eigenvalue(A, g), 1e-11);
    }
}

TEST(TensorPoint, NormsAreSumsOfSquares) {
    HJet j;
    j.h = PointTensor(1, {false, true});
    j.h(0, 0) = 2.0;
    j.d = PointTensor(1, {false, false, true});
    j.d(0, 0, 0) = cplx(0.0, 1.0);
    j.db = PointTensor(1, {true, false, true});
    j.db(0, 0, 0) = cplx(0.0, -1.0);
    j.dd = PointTensor(1, {false, false, false, true});
    j.ddb = PointTensor(1, {false, true, false, true});
    j.ddb(0, 0, 0, 0) = 3.0;
    Norms n = tensor_norms(j);
    EXPECT_DOUBLE_EQ(n.Phi, 4.0);
    EXPECT_DOUBLE_EQ(n.Psi, 2.0);
    EXPECT_DOUBLE_EQ(n.Lambda, 9.0);
}
