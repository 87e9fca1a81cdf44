#include <gtest/gtest.h>

#include <cmath>

#include "kahler/fd_backend.hpp"
#include "kahler/models.hpp"

using namespace kahler;

TEST(FdBackend, WeightsOfLowOrders) {
    EXPECT_EQ(central_weights(1), (std::vector<double>{-0.5, 0.0, 0.5}));
    EXPECT_EQ(central_weights(2), (std::vector<double>{1.0, -2.0, 1.0}));
    EXPECT_EQ(central_weights(3), (std::vector<double>{-0.5, 1.0, 0.0, -1.0, 0.5}));
}

TEST(FdBackend, QuadraticsAreExact) {
    // f = 2x^2 - xy + 3y + 1 around (x0, y0) = (0.3, -0.2): every second-order jet entry is exact.
    const double x0 = 0.3, y0 = -0.2, dx = 0.1;
    auto f = [&](double x, double y) { return 2 * x * x - x * y + 3 * y + 1; };
    Jet j = fd_jet([&](int i, int k) { return cplx(f(x0 + i * dx, y0 + k * dx)); }, dx, 2);
    const cplx z0(x0, y0);
    Jet w = Jet::coordinate(1, 2, 0, z0, false), wb = Jet::coordinate(1, 2, 0, z0, true);
    Jet X = 0.5 * (w + wb), Y = cplx(0, -0.5) * (w - wb);
    Jet ref = 2.0 * X * X - X * Y + 3.0 * Y + 1.0;
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(std::abs(j.coeff(i) - ref.coeff(i)), 0.0, 1e-12);
}

TEST(FdBackend, QuarticConvergesAtSecondOrder) {
    auto run = [](double dx) {
        auto f = [](double x, double y) { return std::pow(x, 4) + x * x * y * y - 2 * std::pow(y, 3) * x; };
        const double x0 = 0.4, y0 = 0.1;
        Jet j = fd_jet([&](int i, int k) { return cplx(f(x0 + i * dx, y0 + k * dx)); }, dx, 4);
        const cplx z0(x0, y0);
        Jet w = Jet::coordinate(1, 4, 0, z0, false), wb = Jet::coordinate(1, 4, 0, z0, true);
        Jet X = 0.5 * (w + wb), Y = cplx(0, -0.5) * (w - wb);
        Jet ref = X * X * X * X + X * X * Y * Y - 2.0 * Y * Y * Y * X;
        double e = 0.0;
        for (int i = 0; i < 15; ++i) e = std::max(e, std::abs(j.coeff(i) - ref.coeff(i)));
        return e;
    };
    const double e1 = run(0.02), e2 = run(0.01);
    EXPECT_LT(e1, 1e-2);
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
}

// Backend agreement on the cigar bundle, with second-order refinement.
TEST(FdBackend, CigarCurvatureAgreesWithAnalytic) {
    const ModelSpec s = ModelSpec::cigar();
    const double x0 = 0.5, y0 = 0.25;
    Geometry ga(metric_jet(s, {cplx(x0, y0)}, 0.0, 4));
    Curvature ca = curvature(ga);
    CurvatureBundle ba = curvature_bundle(ga, ca, 2);
    auto err = [&](double dx) {
        TensorJet g(1, {false, true}, 4);
        g(0, 0) = fd_jet([&](int i, int k) { return cplx(conformal_factor(s, std::norm(cplx(x0 + i * dx, y0 + k * dx)), 0.0)); }, dx, 4);
        Geometry gf(g);
        CurvatureBundle bf = curvature_bundle(gf, curvature(gf), 2);
        double e = std::abs(bf.scalar - ba.scalar);
        e = std::max(e, std::abs(christoffel(gf)[0] - christoffel(ga)[0]));
        e = std::max(e, std::abs(bf.dRic.flat(0) - ba.dRic.flat(0)));
        e = std::max(e, std::abs(bf.lapRic.flat(0) - ba.lapRic.flat(0)));
        return e;
    };
    const double e1 = err(0.02), e2 = err(0.01);
    EXPECT_LT(e1, 1e-2);
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);
}

TEST(FdBackend, RejectsBadArguments) {
    auto f = [](int, int) { return cplx(1.0); };
    EXPECT_THROW(fd_jet(f, 0.1, 7), ArgumentError);
    EXPECT_THROW(fd_jet(f, 0.0, 2), ArgumentError);
}
