#include <gtest/gtest.h>

#include "kahler/identities.hpp"

using namespace kahler;

namespace {

IdentityCase make_case(IdentityId id, const ModelSpec& s, Point z, double t, HSource src = HSource::random_polynomial) {
    IdentityCase c;
    c.id = id;
    c.model = s;
    c.z = std::move(z);
    c.t = t;
    c.source = src;
    return c;
}

std::vector<ModelSpec> exact_models() {
    return {ModelSpec::flat(1), ModelSpec::flat(2), ModelSpec::cigar(), ModelSpec::fubini_study(1), ModelSpec::fubini_study(2)};
}

Point point_for(const ModelSpec& s) {
    return s.m == 1 ? Point{cplx(0.3, -0.2)} : Point{cplx(0.3, 0.0), cplx(0.0, -0.2)};
}

}  // namespace

TEST(Identities, RicciEvolutionVanishesOnFlat) {
    IdentityResult r = check_identity(make_case(IdentityId::ricci_heat, ModelSpec::flat(2), {0.1, 0.2}, 0.7));
    for (size_t i = 0; i < r.lhs.size(); ++i) {
        EXPECT_EQ(r.lhs[i], cplx(0.0));
        EXPECT_EQ(r.rhs[i], cplx(0.0));
    }
    EXPECT_TRUE(r.pass);
}

TEST(Identities, DivergenceEvolutionOnCigarConvergesAtSecondOrder) {
    IdentityCase c = make_case(IdentityId::div_heat, ModelSpec::cigar(), {0.5}, 0.2, HSource::ricci);
    c.backend = Backend::finite_difference;
    c.dx = 0.05;
    IdentityResult r = check_identity(c);
    EXPECT_GE(r.slope, 1.5);
    EXPECT_LE(r.slope, 2.5);
    EXPECT_LT(r.residual_half, r.residual);
    EXPECT_TRUE(r.pass);
}

TEST(Identities, RicciCommutatorOnProjectivePlane) {
    IdentityResult r = check_identity(make_case(IdentityId::ricci_commutator, ModelSpec::fubini_study(2), {0.3, cplx(0.0, -0.2)}, 0.1));
    EXPECT_LE(r.relative, 1e-9);
    EXPECT_GT(r.scale, 1.0);  // not trivially zero
}

TEST(Identities, AllHoldAnalyticallyOnEveryExactModel) {
    for (const ModelSpec& s : exact_models()) {
        for (double t : {0.06, 0.2}) {
            for (IdentityId id : kAllIdentities) {
                IdentityResult r = check_identity(make_case(id, s, point_for(s), t));
                EXPECT_TRUE(r.pass) << identity_name(id) << " on " << s.name() << " m=" << s.m << " t=" << t << ": " << r.relative;
            }
        }
    }
}

TEST(Identities, RicciAsTheTensorOnCurvedModels) {
    for (const ModelSpec& s : {ModelSpec::cigar(), ModelSpec::fubini_study(2)}) {
        for (IdentityId id : kAllIdentities) {
            IdentityResult r = check_identity(make_case(id, s, point_for(s), 0.15, HSource::ricci));
            EXPECT_TRUE(r.pass) << identity_name(id) << " on " << s.name() << ": " << r.relative;
        }
    }
}

TEST(Identities, HeatKernelTensorOnFlat) {
    for (int m : {1, 2}) {
        for (IdentityId id : kAllIdentities) {
            IdentityResult r = check_identity(make_case(id, ModelSpec::flat(m), point_for(ModelSpec::flat(m)), 0.5, HSource::heat_kernel));
            EXPECT_TRUE(r.pass) << identity_name(id) << " m=" << m << ": " << r.relative;
        }
    }
}

TEST(Identities, EpsilonTermBelongsOutsideTheBracket) {
    for (const ModelSpec& s : {ModelSpec::cigar(), ModelSpec::fubini_study(1), ModelSpec::fubini_study(2)}) {
        IdentityCase c = make_case(IdentityId::term4_heat, s, point_for(s), 0.12);
        EXPECT_LE(check_identity(c).relative, 1e-9);
        c.eps_placement = EpsPlacement::inside_bracket;
        EXPECT_GT(check_identity(c).relative, 1e-4) << s.name();
    }
}

TEST(Identities, BracketPairsHtildeWithMatchingIndices) {
    for (const ModelSpec& s : {ModelSpec::flat(2), ModelSpec::fubini_study(2)}) {
        IdentityCase c = make_case(IdentityId::zhat_heat, s, point_for(s), 0.12);
        EXPECT_LE(check_identity(c).relative, 1e-9);
        c.bracket = BracketForm::transposed;
        EXPECT_GT(check_identity(c).relative, 1e-5) << s.name();
    }
}

TEST(Identities, ConjugationDuality) {
    for (const ModelSpec& s : exact_models()) {
        IdentityResult a = check_identity(make_case(IdentityId::div_heat, s, point_for(s), 0.1));
        IdentityResult b = check_identity(make_case(IdentityId::divbar_heat, s, point_for(s), 0.1));
        ASSERT_EQ(a.lhs.size(), b.lhs.size());
        for (size_t i = 0; i < a.lhs.size(); ++i) {
            EXPECT_NEAR(std::abs(b.lhs[i] - std::conj(a.lhs[i])), 0.0, 1e-12 * a.scale);
            EXPECT_NEAR(std::abs(b.rhs[i] - std::conj(a.rhs[i])), 0.0, 1e-12 * a.scale);
        }
        EXPECT_NEAR(b.residual, a.residual, 1e-12 * a.scale);
        IdentityResult c = check_identity(make_case(IdentityId::divdiv_heat, s, point_for(s), 0.1));
        IdentityResult d = check_identity(make_case(IdentityId::divbar_div_heat, s, point_for(s), 0.1));
        EXPECT_NEAR(std::abs(d.lhs[0] - std::conj(c.lhs[0])), 0.0, 1e-12 * c.scale);
    }
}

TEST(Identities, ContractedBianchi) {
    for (const ModelSpec& s : exact_models()) {
        Geometry geo(metric_jet(s, point_for(s), 0.1, 4));
        Curvature cv = curvature(geo);
        CurvatureBundle b = curvature_bundle(geo, cv, 1);
        for (int a = 0; a < s.m; ++a) {
            cplx lhs = 0.0;
            for (int g = 0; g < s.m; ++g) lhs += b.dRic(g, a, g);
            EXPECT_NEAR(std::abs(lhs - b.dScalar(a)), 0.0, 1e-11 * std::max(1.0, std::abs(lhs)));
        }
    }
}

TEST(Identities, SweepEdgeAndFlatCases) {
    SweepOptions o;
    o.samples = 0;
    EXPECT_TRUE(sweep({kAllIdentities.begin(), kAllIdentities.end()}, o).empty());
    for (int m : {1, 2}) {
        o.model = ModelSpec::flat(m);
        o.samples = 32;
        o.seed = 3;
        o.h_degree = 2;
        auto rows = sweep({kAllIdentities.begin(), kAllIdentities.end()}, o);
        ASSERT_EQ(rows.size(), kAllIdentities.size());
        for (const auto& r : rows) {
            EXPECT_EQ(r.samples, 32);
            EXPECT_LE(r.max_residual, 1e-12) << identity_name(r.id);
        }
    }
}

TEST(Identities, CigarSweepConvergesAtSecondOrder) {
    SweepOptions o;
    o.model = ModelSpec::cigar();
    o.samples = 32;
    o.seed = 7;
    o.backend = Backend::finite_difference;
    auto rows = sweep({kAllIdentities.begin(), kAllIdentities.end()}, o);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.pass()) << identity_name(r.id);
        if (is_evolution(r.id)) {
            EXPECT_GE(r.min_slope, 1.5) << identity_name(r.id);
            EXPECT_LE(r.max_slope, 2.5) << identity_name(r.id);
        } else {
            EXPECT_LE(r.max_residual, 1e-9) << identity_name(r.id);  // exact for any jet metric
        }
    }
}

TEST(Identities, SweepIsDeterministic) {
    SweepOptions o;
    o.model = ModelSpec::fubini_study(2);
    o.samples = 3;
    o.seed = 11;
    auto a = sweep({IdentityId::zhat_heat, IdentityId::term3_heat}, o);
    auto b = sweep({IdentityId::zhat_heat, IdentityId::term3_heat}, o);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].max_residual, b[i].max_residual);
        EXPECT_EQ(a[i].failures, b[i].failures);
    }
    o.seed = 12;
    auto c = sweep({IdentityId::zhat_heat}, o);
    EXPECT_NE(c[0].max_residual, a[0].max_residual);
}

TEST(Identities, InvalidCases) {
    EXPECT_THROW(check_identity(make_case(IdentityId::div_heat, ModelSpec::fubini_study(1), {0.1}, 0.6)), DomainError);
    EXPECT_THROW(check_identity(make_case(IdentityId::div_heat, ModelSpec::fubini_study(1), {0.1}, 0.5)), DomainError);
    EXPECT_THROW(check_identity(make_case(IdentityId::div_heat, ModelSpec::flat(1), {0.1}, 0.0)), DomainError);
    EXPECT_THROW(check_identity(make_case(IdentityId::div_heat, ModelSpec::cigar(), {0.1}, 0.2, HSource::heat_kernel)), ArgumentError);
    IdentityCase c = make_case(IdentityId::div_heat, ModelSpec::flat(2), {0.1, 0.1}, 0.5);
    c.backend = Backend::finite_difference;
    EXPECT_THROW(check_identity(c), ArgumentError);
    EXPECT_THROW(parse_identity("nope"), ParseError);
    EXPECT_EQ(parse_identity("zhat_heat"), IdentityId::zhat_heat);
    EXPECT_THROW(parse_hsource("x"), ParseError);
}
