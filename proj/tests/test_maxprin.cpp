#include <gtest/gtest.h>

#include <cmath>

#include "kahler/maxprin.hpp"

using namespace kahler;

TEST(MaxPrinciple, ZeroDataStaysZero) {
    HeatTestCase c;
    c.profile = InitialProfile::zero;
    c.N = 32;
    const auto v = run_max_principle(c);
    EXPECT_TRUE(v.pass);
    EXPECT_EQ(v.sup_f, 0.0);
    EXPECT_EQ(v.growth_integral, 0.0);
}

TEST(MaxPrinciple, NegativeGaussianMatchesConvolution) {
    HeatTestCase c;
    c.exact = negative_gaussian_solution;
    c.N = 32;
    const auto coarse = run_max_principle(c);
    c.N = 64;
    const auto fine = run_max_principle(c);
    EXPECT_TRUE(fine.pass);
    EXPECT_LE(fine.sup_f, 0.0);
    EXPECT_LT(fine.max_error, 2e-3);
    EXPECT_NEAR(coarse.max_error / fine.max_error, 4.0, 1.0);
}

TEST(MaxPrinciple, ClippedCosineOnCigar) {
    HeatTestCase c;
    c.model = ModelSpec::cigar();
    c.profile = InitialProfile::clipped_cosine;
    const auto v = run_max_principle(c);
    EXPECT_TRUE(v.pass) << v.sup_f;
    EXPECT_LT(v.sup_f, 0.0);
}

TEST(MaxPrinciple, SubsolutionVariantAndFubiniStudy) {
    for (auto m : {ModelSpec::cigar(), ModelSpec::fubini_study(1)}) {
        HeatTestCase c;
        c.model = m;
        c.rho = 2.0;
        c.N = 32;
        c.T = m.kind == ModelKind::fubini_study ? 0.3 : 0.5;
        c.radius = m.kind == ModelKind::fubini_study ? 2.0 : 4.0;
        // touches zero on the axis x = 0 mod 2 pi only from below
        c.f0 = [](cplx z) { return -std::pow(std::sin(z.real()), 2) * std::exp(-0.1 * std::norm(z)); };
        const auto v = run_max_principle(c);
        EXPECT_TRUE(v.pass) << v.sup_f;
    }
}

TEST(MaxPrinciple, RejectsInvalidCases) {
    HeatTestCase c;
    c.f0 = [](cplx) { return 0.5; };
    EXPECT_THROW(run_max_principle(c), ArgumentError);
    c = HeatTestCase{};
    c.kappa = 0.5;
    EXPECT_THROW(run_max_principle(c), StepSizeError);
    c = HeatTestCase{};
    c.model = ModelSpec::fubini_study(1);
    c.T = 0.6;
    EXPECT_THROW(run_max_principle(c), DomainError);
    EXPECT_THROW(parse_initial_profile("bogus"), ParseError);
}

TEST(Barrier, FlatClosedForm) {
    // on flat C: f = sqrt(1 + r^2), dd̄ f = (2 + r^2) / (4 (1+r^2)^{3/2}) <= 1/2, |d f|^2 = r^2 / (4 (1 + r^2)) < 1/4
    const auto b = build_and_check_barrier(ModelSpec::flat(1), 1.0, 0.5);
    ASSERT_TRUE(b.found);
    EXPECT_GE(b.margin, 0.0);
    EXPECT_TRUE(b.sandwich);
    EXPECT_LE(b.A, 4.0);
    EXPECT_LE(b.sup_hess_f, 0.5 + 1e-12);
    EXPECT_LT(b.sup_grad_f, 0.5);
}

TEST(Barrier, MarginAndMonotonicityInC) {
    for (auto m : {ModelSpec::flat(1), ModelSpec::cigar()}) {
        double prev = 0.0;
        for (double C : {0.0, 1.0, 2.0, 5.0}) {
            const auto b = build_and_check_barrier(m, C, 0.5);
            ASSERT_TRUE(b.found);
            EXPECT_GE(b.margin, 0.0);
            EXPECT_TRUE(b.sandwich);
            EXPECT_GE(b.A, prev);
            prev = b.A;
        }
    }
}

TEST(Barrier, ExhaustionIsReported) {
    const auto b = build_and_check_barrier(ModelSpec::flat(1), 1e14, 0.5);
    EXPECT_FALSE(b.found);
    EXPECT_LT(b.margin, 0.0);
    EXPECT_FALSE(b.diagnostic.empty());
}

TEST(Barrier, EpsilonBarrierKeepsTensorPositive) {
    FlowConfig c;
    c.N = 32;
    c.h_init = HInit::ricci;
    const auto r = epsilon_barrier_check(c, {1e-3, 1e-5});
    EXPECT_TRUE(r.pass);
    for (double v : r.min_value) EXPECT_GT(v, 0.0);
    c.h_init = HInit::none;
    EXPECT_THROW(epsilon_barrier_check(c, {1e-3}), ArgumentError);
}

TEST(Barrier, SquareRootComparisonOnHeatKernel) {
    FlowConfig c;
    c.model = ModelSpec::flat(1);
    c.N = 64;
    c.t0 = 0.25;
    c.T = 0.5;
    c.h_init = HInit::heat_kernel;
    c.monitor_every = 0.25;
    const double tm = 0.4, d = 1e-3;
    std::vector<FlowState> snaps;
    run_flow(c, {tm - d, tm, tm + d}, [&](const FlowState& s) {
        if (std::abs(s.t - tm) <= 1.5 * d) snaps.push_back(s);
    });
    ASSERT_EQ(snaps.size(), 3u);
    const auto r = measure_barrier_comparison(snaps[0], snaps[1], snaps[2]);
    EXPECT_GT(r.samples, 100);
    // on flat space C1 = 0 up to the difference error
    EXPECT_LE(r.C1, r.fd_tol + 1e-6);
}
