#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>

#include "kahler/models.hpp"

using namespace kahler;

namespace {

TensorJet dt_metric(const ModelSpec& s, const Point& z, double t, int order) {
    const double tau = 1e-3;
    TensorJet d = metric_jet(s, z, t - 2 * tau, order) * cplx(1.0) - metric_jet(s, z, t + 2 * tau, order) * cplx(1.0);
    d += (metric_jet(s, z, t + tau, order) - metric_jet(s, z, t - tau, order)) * cplx(8.0);
    return d * cplx(1.0 / (12.0 * tau));
}

Point random_point(int m, double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-radius, radius);
    Point z(m);
    for (auto& c : z) c = cplx(u(rng), u(rng));
    return z;
}

}  // namespace

TEST(Models, ClosedFormValues) {
    EXPECT_NEAR(exact_flow_metric(ModelSpec::flat(2), {0.3, 0.1}, 5.0)(1, 1).real(), 1.0, 0.0);
    EXPECT_NEAR(exact_flow_metric(ModelSpec::cigar(), {0.0}, 0.0)(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(exact_flow_metric(ModelSpec::cigar(), {0.0}, std::log(2.0))(0, 0).real(), 0.5, 1e-15);
    EXPECT_NEAR(exact_flow_metric(ModelSpec::fubini_study(1), {0.0}, 0.1)(0, 0).real(), 0.8, 1e-15);
}

TEST(Models, TimeWindowIsEnforced) {
    EXPECT_THROW(exact_flow_metric(ModelSpec::fubini_study(1), {0.0}, 0.5), DomainError);
    EXPECT_THROW(exact_flow_metric(ModelSpec::fubini_study(2), {0.0, 0.0}, 0.34), DomainError);
    EXPECT_THROW(exact_flow_metric(ModelSpec::cigar(), {0.0}, -0.1), DomainError);
    EXPECT_NO_THROW(exact_flow_metric(ModelSpec::cigar(), {0.0}, 10.0));
}

// Property: the exact flows solve dg/dt = -Ric.
TEST(Models, ExactFlowResidual) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ut(0.01, 1.0);
    for (ModelSpec s : {ModelSpec::flat(1), ModelSpec::flat(2), ModelSpec::fubini_study(1), ModelSpec::fubini_study(2), ModelSpec::cigar()}) {
        for (int k = 0; k < 100; ++k) {
            const double t = std::min(ut(rng), 0.9 * time_window(s));
            const Point z = random_point(s.m, 2.0, rng);
            Geometry geo(metric_jet(s, z, t, 2));
            Curvature cv = curvature(geo);
            TensorJet d = dt_metric(s, z, t, 0);
            double res = 0.0;
            for (int i = 0; i < d.size(); ++i) res = std::max(res, std::abs(d.flat(i).value() + cv.Ric.flat(i).value()));
            ASSERT_LE(res, 1e-8) << s.name() << " m=" << s.m << " t=" << t;
        }
    }
}

// Property: nonnegative holomorphic bisectional curvature.
TEST(Models, BisectionalCurvatureIsNonnegative) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (ModelSpec s : {ModelSpec::flat(2), ModelSpec::fubini_study(1), ModelSpec::fubini_study(2), ModelSpec::cigar()}) {
        const int m = s.m;
        for (int k = 0; k < 10; ++k) {
            const Point z = random_point(m, 2.0, rng);
            Geometry geo(metric_jet(s, z, 0.1, 2));
            Curvature cv = curvature(geo);
            for (int trial = 0; trial < 100; ++trial) {
                std::vector<cplx> v(m), w(m);
                for (int a = 0; a < m; ++a) v[a] = cplx(nd(rng), nd(rng)), w[a] = cplx(nd(rng), nd(rng));
                cplx b = 0.0;
                for (int a = 0; a < m; ++a)
                    for (int bb = 0; bb < m; ++bb)
                        for (int c = 0; c < m; ++c)
                            for (int d = 0; d < m; ++d)
                                b += cv.Rm(a, bb, c, d).value() * v[a] * std::conj(v[bb]) * w[c] * std::conj(w[d]);
                ASSERT_GE(b.real(), -1e-10);
            }
        }
    }
}

TEST(Models, CurvatureAnchors) {
    Geometry fs(metric_jet(ModelSpec::fubini_study(1), {0.0}, 0.0, 2));
    Curvature c1 = curvature(fs);
    EXPECT_NEAR(c1.Rm(0, 0, 0, 0).value().real(), 2.0, 1e-14);
    EXPECT_NEAR(c1.Ric(0, 0).value().real(), 2.0, 1e-14);
    EXPECT_NEAR(c1.scalar.value().real(), 2.0, 1e-14);
    EXPECT_NEAR(trace(c1.Ric.value().as_matrix(), inverse_metric(fs.metric_value())), 2.0, 1e-14);

    Geometry cg(metric_jet(ModelSpec::cigar(), {1.0}, 0.0, 2));
    EXPECT_NEAR(std::abs(christoffel(cg)[0] - cplx(-0.5)), 0.0, 1e-15);
    Geometry cg0(metric_jet(ModelSpec::cigar(), {0.0}, 0.0, 4));
    Curvature c0 = curvature(cg0);
    EXPECT_NEAR(c0.Ric(0, 0).value().real(), 1.0, 1e-14);
    EXPECT_NEAR(c0.scalar.value().real(), 1.0, 1e-14);
    // Delta R = -1 at the tip
    EXPECT_NEAR(laplacian(scalar_tensor(c0.scalar), cg0).flat(0).value().real(), -1.0, 1e-13);
}

TEST(Models, HeatKernelValuesAndEquation) {
    EXPECT_NEAR(heat_kernel_h({0.0}, 1.0)(0, 0).real(), 1.0 / std::numbers::pi, 1e-15);
    const double t = 0.7;
    EXPECT_NEAR(heat_kernel_h({std::sqrt(t)}, t)(0, 0).real(), std::exp(-1.0) / (std::numbers::pi * t), 1e-15);
    EXPECT_THROW(heat_kernel_h({0.0}, 0.0), DomainError);
    // u_t = dd̄ u, m = 1 and m = 2
    for (int m = 1; m <= 2; ++m) {
        Point z(m, cplx(0.4, -0.3));
        const double tau = 1e-4;
        const double ut = (heat_kernel_jet(m, z, t + tau, 0)(0, 0).value() - heat_kernel_jet(m, z, t - tau, 0)(0, 0).value()).real() / (2 * tau);
        Jet u = heat_kernel_jet(m, z, t, 2)(0, 0);
        cplx lap = 0.0;
        for (int a = 0; a < m; ++a) lap += u.dz(a).dzbar(a).value();
        EXPECT_NEAR(ut, lap.real(), 1e-7);
    }
}

TEST(Models, HeatKernelHasUnitMass) {
    for (double t : {0.25, 1.0}) {
        const double L = 12.0 * std::sqrt(t), h = L / 400;
        double s = 0.0;
        for (int i = -400; i <= 400; ++i)
            for (int j = -400; j <= 400; ++j) s += heat_kernel_value(1, (i * h) * (i * h) + (j * h) * (j * h), t);
        EXPECT_NEAR(s * h * h, 1.0, 1e-10);
    }
}

TEST(Models, BarrierProfileClosedForms) {
    EXPECT_NEAR(barrier_phi(ModelSpec::flat(1), {0.0}, 0.0, 3.0, 1.0), std::exp(1.0), 1e-15);
    EXPECT_NEAR(barrier_profile(ModelSpec::cigar(), std::sinh(1.0)).f, std::sqrt(2.0), 1e-15);
    for (double r : {0.0, 0.5, 2.0}) {
        BarrierProfile b = barrier_profile(ModelSpec::flat(1), r);
        const double f = std::sqrt(1 + r * r);
        EXPECT_NEAR(b.lap_flat, (2 + r * r) / (4 * f * f * f), 1e-12);
        EXPECT_NEAR(b.grad_flat, r * r / (4 * f * f), 1e-15);
    }
    // monotone in t for A > 0
    EXPECT_GE(barrier_phi(ModelSpec::cigar(), {0.7}, 0.4, 2.0, 1.0), barrier_phi(ModelSpec::cigar(), {0.7}, 0.1, 2.0, 1.0));
}

TEST(Models, BarrierLaplacianMatchesJetLaplacian) {
    // dd̄ of sqrt(1 + asinh(|z|)^2) against a jet oracle built from the series of asinh
    const double r = 0.8;
    const double tau = 1e-4;
    auto F = [](double rr) { return std::sqrt(1.0 + std::asinh(rr) * std::asinh(rr)); };
    const double f1 = (F(r + tau) - F(r - tau)) / (2 * tau);
    const double f2 = (F(r + tau) - 2 * F(r) + F(r - tau)) / (tau * tau);
    EXPECT_NEAR(barrier_profile(ModelSpec::cigar(), r).lap_flat, 0.25 * (f2 + f1 / r), 1e-6);
}

TEST(Models, RadialProfileReproducesCigar) {
    const std::string path = ::testing::TempDir() + "cigar_profile.txt";
    {
        std::ofstream out(path);
        out.precision(17);
        out << "# r u0\n";
        for (int i = 0; i <= 400; ++i) {
            const double r = 0.01 * i;
            out << r << " " << -std::log(1 + r * r) << "\n";
        }
    }
    ModelSpec s = ModelSpec::radial(RadialProfile::load(path));
    std::remove(path.c_str());
    EXPECT_GT(profile_min_curvature(s), 0.0);
    for (double r : {0.3, 1.0, 2.0}) {
        Geometry a(metric_jet(s, {cplx(r, 0.0)}, 0.0, 2));
        Geometry b(metric_jet(ModelSpec::cigar(), {cplx(r, 0.0)}, 0.0, 2));
        EXPECT_NEAR(a.metric_value()(0, 0).real(), b.metric_value()(0, 0).real(), 1e-8);
        EXPECT_NEAR(curvature(a).scalar.value().real(), curvature(b).scalar.value().real(), 1e-4);
    }
    EXPECT_THROW(metric_jet(s, {cplx(5.0, 0.0)}, 0.0, 2), OutOfDomainError);
    EXPECT_THROW(metric_jet(s, {cplx(1.0, 0.0)}, 0.1, 2), DomainError);
}

TEST(Models, RadialProfileRejectsBadInput) {
    EXPECT_THROW(RadialProfile({0.1, 0.2, 0.3}, {0, 0, 0}), ParseError);
    EXPECT_THROW(RadialProfile({0.0, 0.2, 0.2}, {0, 0, 0}), ParseError);
    EXPECT_THROW(RadialProfile::load("/nonexistent/profile.txt"), ParseError);
}
