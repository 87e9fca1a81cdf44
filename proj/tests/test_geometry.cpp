#include <gtest/gtest.h>

#include <random>

#include "kahler/geometry.hpp"

using namespace kahler;

namespace {

/// Metric jet of order `order` from a potential jet of order order + 2.
TensorJet metric_from_potential(const Jet& phi) {
    const int m = phi.dim();
    TensorJet g(m, {false, true}, phi.order() - 2);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) g(a, b) = phi.dz(a).dzbar(b);
    return g;
}

Jet modulus2(int m, int order, const std::vector<cplx>& z0) {
    Jet s(m, order);
    for (int a = 0; a < m; ++a)
        s += Jet::coordinate(m, order, a, z0[a], false) * Jet::coordinate(m, order, a, z0[a], true);
    return s;
}

Geometry fubini_study(int m, const std::vector<cplx>& z0, int order = 6) {
    return Geometry(metric_from_potential(log(modulus2(m, order + 2, z0) + 1.0)));
}

/// Random small perturbation of the flat potential.
Jet random_potential(int m, int order, const std::vector<cplx>& z0, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Jet phi = modulus2(m, order, z0);
    std::vector<Jet> w, wb;
    for (int a = 0; a < m; ++a) {
        w.push_back(Jet::coordinate(m, order, a, z0[a], false));
        wb.push_back(Jet::coordinate(m, order, a, z0[a], true));
    }
    for (int k = 0; k < 4; ++k) {
        int a = static_cast<int>(rng() % m), b = static_cast<int>(rng() % m), c = static_cast<int>(rng() % m);
        Jet mono = w[a] * w[b] * wb[c];
        phi += 0.1 * nd(rng) * real_part(cplx(nd(rng), nd(rng)) * mono);
    }
    phi += 0.05 * std::abs(nd(rng)) * modulus2(m, order, z0) * modulus2(m, order, z0);
    return phi;
}

}  // namespace

TEST(Geometry, FubiniStudyChristoffelAtOne) {
    Geometry geo = fubini_study(1, {1.0});
    EXPECT_NEAR(std::abs(christoffel(geo)[0] - cplx(-1.0)), 0.0, 1e-14);
}

TEST(Geometry, CigarScalarCurvatureAtUnitRadius) {
    const cplx z0(0.6, 0.8);
    Jet r2 = modulus2(1, 6, {z0});
    TensorJet g(1, {false, true}, 6);
    g(0, 0) = reciprocal(r2 + 1.0);
    Geometry geo(g);
    Curvature cv = curvature(geo);
    EXPECT_NEAR(cv.scalar.value().real(), 0.5, 1e-14);
    EXPECT_NEAR(cv.Ric(0, 0).value().real(), 0.25, 1e-14);
}

TEST(Geometry, FubiniStudyIsEinstein) {
    for (int m = 1; m <= 2; ++m) {
        std::vector<cplx> z0 = m == 1 ? std::vector<cplx>{cplx(0.3, -0.2)} : std::vector<cplx>{cplx(0.3, -0.2), cplx(-0.1, 0.5)};
        Geometry geo = fubini_study(m, z0);
        Curvature cv = curvature(geo);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                EXPECT_NEAR(std::abs(cv.Ric(a, b).value() - double(m + 1) * geo.metric()(a, b).value()), 0.0, 1e-13);
        EXPECT_NEAR(cv.scalar.value().real(), m * (m + 1.0), 1e-13);
        // Kähler-Einstein metrics are fixed by the Lichnerowicz operator.
        TensorJet L = lichnerowicz_rhs(geo.metric(), geo, cv);
        for (int i = 0; i < L.size(); ++i) EXPECT_NEAR(std::abs(L.flat(i).value()), 0.0, 1e-12);
    }
}

TEST(Geometry, MetricIsParallel) {
    std::mt19937_64 rng(3);
    Geometry geo(metric_from_potential(random_potential(2, 7, {0.2, cplx(0.1, 0.3)}, rng)));
    for (bool bar : {false, true}) {
        TensorJet d = covariant(geo.metric(), geo, bar);
        for (int i = 0; i < d.size(); ++i) EXPECT_NEAR(std::abs(d.flat(i).value()), 0.0, 1e-13);
    }
}

TEST(Geometry, ScalarLaplacianIsTraceOfDdbar) {
    std::mt19937_64 rng(5);
    const std::vector<cplx> z0{0.3, cplx(-0.2, 0.1)};
    Geometry geo(metric_from_potential(random_potential(2, 7, z0, rng)));
    Jet f = exp(Jet::coordinate(2, 5, 0, z0[0], false) * Jet::coordinate(2, 5, 1, z0[1], true) * 0.7);
    f = real_part(f);
    Jet lap = laplacian(scalar_tensor(f), geo).flat(0);
    cplx ref = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) ref += geo.inverse()(a, b).value() * f.dz(a).dzbar(b).value();
    EXPECT_NEAR(std::abs(lap.value() - ref), 0.0, 1e-13);
}

// Property: Kähler symmetries of curvature on random metrics.
TEST(Geometry, CurvatureSymmetriesOnRandomMetrics) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<cplx> z0{cplx(0.1 * trial, 0.05), cplx(-0.2, 0.03 * trial)};
        Geometry geo(metric_from_potential(random_potential(2, 7, z0, rng)));
        Curvature cv = curvature(geo);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) {
                        const cplx r = cv.Rm(a, b, c, d).value();
                        EXPECT_NEAR(std::abs(r - cv.Rm(c, b, a, d).value()), 0.0, 1e-12);
                        EXPECT_NEAR(std::abs(r - cv.Rm(a, d, c, b).value()), 0.0, 1e-12);
                        EXPECT_NEAR(std::abs(r - std::conj(cv.Rm(b, a, d, c).value())), 0.0, 1e-12);
                    }
        // second Bianchi: nabla_c R_{a bbar} = nabla_a R_{c bbar}
        TensorJet dR = covariant(cv.Ric, geo, false);
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    EXPECT_NEAR(std::abs(dR(c, a, b).value() - dR(a, c, b).value()), 0.0, 1e-11);
    }
}

TEST(Geometry, BundleFrameRicciOfFubiniStudy) {
    Geometry geo = fubini_study(2, {cplx(0.4, 0.1), cplx(0.0, -0.3)});
    Curvature cv = curvature(geo);
    CurvatureBundle b = curvature_bundle(geo, cv, 2);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) EXPECT_NEAR(std::abs(b.Ric(a, c) - (a == c ? 3.0 : 0.0)), 0.0, 1e-12);
    for (int i = 0; i < b.dRic.size(); ++i) EXPECT_NEAR(std::abs(b.dRic.flat(i)), 0.0, 1e-12);
    for (int i = 0; i < b.lapRic.size(); ++i) EXPECT_NEAR(std::abs(b.lapRic.flat(i)), 0.0, 1e-11);
}
