#pragma once

/**
 * @file identities.hpp
 * @brief Two-path checks of the heat-type evolution identities behind the Harnack estimate.
 *
 * Left sides are (d/dt - Delta) of chart jets, with d/dt a central difference
 * over exact flow slices; right sides are assembled from frame values of
 * covariant derivatives.  The two paths share only the metric jets.
 */

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/fd_backend.hpp"
#include "kahler/geometry.hpp"
#include "kahler/harnack.hpp"
#include "kahler/models.hpp"

namespace kahler {

enum class IdentityId {
    div_heat,           // (d/dt - Delta) div(h)_a
    divbar_heat,        // (d/dt - Delta) div(h)_bbar
    divdiv_heat,        // (d/dt - Delta) g^{a bbar} nabla_bbar div(h)_a
    divbar_div_heat,    // (d/dt - Delta) g^{b abar} nabla_b div(h)_abar
    ricci_heat,         // (d/dt - Delta) R_{a bbar}
    term1_heat,         // (d/dt - Delta) I
    term2_heat,         // (d/dt - Delta) II
    term3_heat,         // (d/dt - Delta) III
    term4_heat,         // (d/dt - Delta) IV
    term5_heat,         // (d/dt - Delta) V
    ricci_commutator,   // pointwise commutation of Ric against second derivatives of h
    optimal_gradient,   // nabla V* from the differentiated first-variation system
    zhat_heat,          // (d/dt - Delta) Zhat at V* in the Y1 + Y2 form
};

inline constexpr std::array<IdentityId, 13> kAllIdentities{
    IdentityId::div_heat,      IdentityId::divbar_heat, IdentityId::divdiv_heat,      IdentityId::divbar_div_heat,
    IdentityId::ricci_heat,    IdentityId::term1_heat,  IdentityId::term2_heat,       IdentityId::term3_heat,
    IdentityId::term4_heat,    IdentityId::term5_heat,  IdentityId::ricci_commutator, IdentityId::optimal_gradient,
    IdentityId::zhat_heat};

inline std::string identity_name(IdentityId id) {
    switch (id) {
        case IdentityId::div_heat: return "div_heat";
        case IdentityId::divbar_heat: return "divbar_heat";
        case IdentityId::divdiv_heat: return "divdiv_heat";
        case IdentityId::divbar_div_heat: return "divbar_div_heat";
        case IdentityId::ricci_heat: return "ricci_heat";
        case IdentityId::term1_heat: return "term1_heat";
        case IdentityId::term2_heat: return "term2_heat";
        case IdentityId::term3_heat: return "term3_heat";
        case IdentityId::term4_heat: return "term4_heat";
        case IdentityId::term5_heat: return "term5_heat";
        case IdentityId::ricci_commutator: return "ricci_commutator";
        case IdentityId::optimal_gradient: return "optimal_gradient";
        case IdentityId::zhat_heat: return "zhat_heat";
    }
    return "?";
}

inline IdentityId parse_identity(const std::string& s) {
    for (IdentityId id : kAllIdentities)
        if (identity_name(id) == s) return id;
    throw ParseError("unknown identity '" + s + "'");
}

/// Whether the identity involves a time derivative.
inline bool is_evolution(IdentityId id) { return id != IdentityId::ricci_commutator && id != IdentityId::optimal_gradient; }

enum class HSource { ricci, random_polynomial, heat_kernel };
enum class Backend { analytic, finite_difference };

/// Where the eps Ric(V, Vbar) term of the IV evolution sits: added on its own, or
/// multiplied into the htilde bracket.
enum class EpsPlacement { outside_bracket, inside_bracket };

/// Index pairing of htilde against nablabar V* in the 1/t bracket of the Zhat evolution.
enum class BracketForm { aligned, transposed };

inline std::string hsource_name(HSource s) {
    switch (s) {
        case HSource::ricci: return "ric";
        case HSource::random_polynomial: return "random-polynomial";
        case HSource::heat_kernel: return "heat-kernel";
    }
    return "?";
}

inline HSource parse_hsource(const std::string& s) {
    if (s == "ric" || s == "ricci") return HSource::ricci;
    if (s == "random-polynomial" || s == "random") return HSource::random_polynomial;
    if (s == "heat-kernel") return HSource::heat_kernel;
    throw ParseError("unknown h source '" + s + "'");
}

struct IdentityCase {
    IdentityId id = IdentityId::div_heat;
    ModelSpec model = ModelSpec::flat(1);
    Point z{0.0};
    double t = 0.5;
    HSource source = HSource::random_polynomial;
    Backend backend = Backend::analytic;
    double tau = 0.0;    // time step of the difference stencil; 0 selects min(1e-2, t / 100, (T - t) / 100)
    double dx = 0.05;    // grid spacing, finite-difference backend only
    int h_degree = 4;    // polynomial degree of the random h
    double eps = 0.05;
    std::uint64_t seed = 1;  // random h and V
    EpsPlacement eps_placement = EpsPlacement::outside_bracket;
    BracketForm bracket = BracketForm::aligned;
};

struct IdentityResult {
    IdentityCase c;
    std::vector<cplx> lhs, rhs;  // frame components
    double residual = 0.0;       // |lhs - rhs| in g(t)
    double scale = 1.0;          // max(1, |lhs|, |rhs|)
    double relative = 0.0;
    double residual_half = std::numeric_limits<double>::quiet_NaN();  // at dx / 2
    double slope = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
};

inline constexpr double kIdentityTol = 1e-9;

namespace detail {

/// Eighth-order central first derivative over k = -4..4.
inline constexpr std::array<double, 9> kTimeWeights{1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0, 4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
inline constexpr int kTimeRadius = 4;
inline constexpr int kCenterOrder = 6;
inline constexpr int kOuterOrder = 4;

inline cplx unit_disk(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = std::sqrt(u(rng)), th = 2.0 * std::numbers::pi * u(rng);
    return std::polar(r, th);
}

/// Polynomial in the offsets (w - z, wbar - zbar) of the given degree, coefficients in the unit disk.
inline Jet random_polynomial(int m, int order, int degree, std::mt19937_64& rng) {
    Jet p(m, order);
    const auto& tab = p.table();
    for (int i = 0; i < static_cast<int>(p.coefficients().size()); ++i)
        if (tab.degree(i) <= degree) p.coeff(i) = unit_disk(rng);
    return p;
}

/// Hermitian random h of the given polynomial degree, shifted by `shift` times the identity.
inline TensorJet random_hermitian(int m, int order, int degree, double shift, std::mt19937_64& rng) {
    TensorJet P(m, {false, true}, order);
    for (int i = 0; i < P.size(); ++i) P.flat(i) = random_polynomial(m, order, degree, rng);
    TensorJet h(m, {false, true}, order);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            h(a, b) = 0.5 * (P(a, b) + P(b, a).conj());
            if (a == b) h(a, b) += shift;
        }
    return h;
}

/// Time-independent (1,0)-form with quadratic polynomial chart components.
inline TensorJet random_form(int m, int order, std::mt19937_64& rng) {
    TensorJet V(m, {false}, order);
    for (int a = 0; a < m; ++a) V(a) = random_polynomial(m, order, 2, rng);
    return V;
}

/// Metric jet of the model, either exact or from grid samples of the exact metric.
inline TensorJet slice_metric(const IdentityCase& c, double t, int order, double dx) {
    if (c.backend == Backend::analytic) return metric_jet(c.model, c.z, t, order);
    if (c.model.m != 1) throw ArgumentError("finite-difference backend supports m = 1 only");
    TensorJet g(1, {false, true}, order);
    const cplx z0 = c.z[0];
    g(0, 0) = fd_jet([&](int i, int j) { return exact_flow_metric(c.model, {z0 + cplx(i * dx, j * dx)}, t)(0, 0); }, dx, order);
    return g;
}

struct Slice {
    double t = 0.0;
    Geometry geo;
    Curvature cv;
    TensorJet h;
};

struct Inputs {
    TensorJet h0, L0, V;  // random h at the centre, its Lichnerowicz derivative, random form
};

inline TensorJet slice_h(const IdentityCase& c, const Slice& s, const Inputs& in, int order, double dx) {
    switch (c.source) {
        case HSource::ricci: return s.cv.Ric;
        case HSource::random_polynomial: return in.h0.truncated(in.L0.order()) + (s.t - c.t) * in.L0;
        case HSource::heat_kernel: {
            if (c.model.kind != ModelKind::flat) throw ArgumentError("heat-kernel h requires the flat model");
            if (c.backend == Backend::analytic) return heat_kernel_jet(c.model.m, c.z, s.t, order);
            TensorJet h(1, {false, true}, order);
            const cplx z0 = c.z[0];
            h(0, 0) = fd_jet([&](int i, int j) { return cplx(heat_kernel_value(1, std::norm(z0 + cplx(i * dx, j * dx)), s.t)); }, dx, order);
            return h;
        }
    }
    return {};
}

inline Slice make_slice(const IdentityCase& c, double t, int order, double dx, const Inputs& in) {
    Slice s;
    s.t = t;
    s.geo = Geometry(slice_metric(c, t, order, dx));
    s.cv = curvature(s.geo);
    s.h = slice_h(c, s, in, order, dx);
    return s;
}

/// The tensor whose heat operator the identity describes, in chart components.
inline TensorJet evolved_quantity(const IdentityCase& c, const Slice& s, const Inputs& in) {
    const Geometry& geo = s.geo;
    switch (c.id) {
        case IdentityId::div_heat: return divergence_jet(s.h, geo);
        case IdentityId::divbar_heat: return divergence_bar_jet(s.h, geo);
        case IdentityId::divdiv_heat: return contract(covariant(divergence_jet(s.h, geo), geo, true), 1, 0, geo);
        case IdentityId::divbar_div_heat: return contract(covariant(divergence_bar_jet(s.h, geo), geo, false), 0, 1, geo);
        case IdentityId::ricci_heat: return s.cv.Ric;
        case IdentityId::term1_heat: return scalar_tensor(z_jets(s.h, geo, s.cv, in.V, s.t, c.eps).I);
        case IdentityId::term2_heat: return scalar_tensor(z_jets(s.h, geo, s.cv, in.V, s.t, c.eps).II);
        case IdentityId::term3_heat: return scalar_tensor(z_jets(s.h, geo, s.cv, in.V, s.t, c.eps).III);
        case IdentityId::term4_heat: return scalar_tensor(z_jets(s.h, geo, s.cv, in.V, s.t, c.eps).IV);
        case IdentityId::term5_heat: return scalar_tensor(z_jets(s.h, geo, s.cv, in.V, s.t, c.eps).V);
        case IdentityId::zhat_heat: {
            TensorJet ht = s.h + c.eps * geo.metric().truncated(s.h.order());
            TensorJet Vs = optimal_vector_jet(ht, divergence_jet(s.h, geo), geo);
            return scalar_tensor(z_jets(s.h, geo, s.cv, Vs, s.t, c.eps).total());
        }
        default: break;
    }
    throw ArgumentError("identity has no evolved quantity");
}

inline std::vector<cplx> flatten(const PointTensor& p) {
    std::vector<cplx> v(p.size());
    for (int i = 0; i < p.size(); ++i) v[i] = p.flat(i);
    return v;
}

}  // namespace detail

namespace detail {

/// Frame values of a (1,0)-form field used by the III and IV evolutions.
struct FormData {
    VectorFieldValues vf;
    PointTensor LV;  // (d/dt - Delta) V = -Delta V, V being time independent in the chart
};

inline std::vector<cplx> right_side(const IdentityCase& c, const HJet& j, const CurvatureBundle& b, const FormData& f) {
    const int m = j.h.dim();
    const double t = c.t, eps = c.eps;
    const Divergence dv = divergence(j);
    const auto& R = b.Ric;
    const auto& Rm = b.Rm;
    auto nabla_div = [&](int s, int a) {  // nabla_s div_a
        cplx r = 0.0;
        for (int g = 0; g < m; ++g) r += j.dd(s, g, a, g);
        return r;
    };
    auto nablabar_div = [&](int s, int a) {  // nabla_sbar div_a
        cplx r = 0.0;
        for (int g = 0; g < m; ++g) r += j.dbd(s, g, a, g);
        return r;
    };
    auto nabla_divbar = [&](int s, int a) {  // nabla_s div_abar
        cplx r = 0.0;
        for (int g = 0; g < m; ++g) r += j.ddb(s, g, g, a);
        return r;
    };
    auto nablabar_divbar = [&](int s, int a) {  // nabla_sbar div_abar
        cplx r = 0.0;
        for (int g = 0; g < m; ++g) r += j.dbdb(s, g, g, a);
        return r;
    };
    std::vector<cplx> out;
    cplx acc = 0.0;

    switch (c.id) {
        case IdentityId::div_heat:
            for (int a = 0; a < m; ++a) {
                cplx r = 0.0;
                for (int s = 0; s < m; ++s)
                    for (int u = 0; u < m; ++u) r += R(s, u) * j.d(u, a, s) + b.dRic(a, s, u) * j.h(u, s);
                for (int u = 0; u < m; ++u) r -= 0.5 * R(a, u) * dv.div[u];
                out.push_back(r);
            }
            return out;
        case IdentityId::divbar_heat:
            for (int be = 0; be < m; ++be) {
                cplx r = 0.0;
                for (int s = 0; s < m; ++s)
                    for (int p = 0; p < m; ++p) r += R(s, p) * j.db(s, p, be) + b.dbRic(be, s, p) * j.h(p, s);
                for (int u = 0; u < m; ++u) r -= 0.5 * R(u, be) * dv.divbar[u];
                out.push_back(r);
            }
            return out;
        case IdentityId::divdiv_heat:
            for (int a = 0; a < m; ++a)
                for (int s = 0; s < m; ++s) {
                    acc += R(s, a) * nablabar_div(s, a);
                    for (int u = 0; u < m; ++u)
                        acc += b.dbRic(a, s, u) * j.d(u, a, s) + b.dRic(a, s, u) * j.db(a, u, s) + R(s, u) * j.dbd(a, u, a, s) +
                               b.dbdRic(a, a, s, u) * j.h(u, s);
                }
            return {acc};
        case IdentityId::divbar_div_heat:
            for (int a = 0; a < m; ++a)
                for (int p = 0; p < m; ++p) {
                    acc += R(a, p) * nabla_divbar(p, a);
                    for (int s = 0; s < m; ++s)
                        acc += b.dRic(a, s, p) * j.db(s, p, a) + b.dbRic(a, p, s) * j.d(a, s, p) + R(s, p) * j.ddb(a, s, p, a) +
                               b.ddbRic(a, a, p, s) * j.h(s, p);
                }
            return {acc};
        case IdentityId::ricci_heat:
            for (int a = 0; a < m; ++a)
                for (int be = 0; be < m; ++be) {
                    cplx r = 0.0;
                    for (int g = 0; g < m; ++g)
                        for (int d = 0; d < m; ++d) r += Rm(a, be, g, d) * R(d, g);
                    for (int s = 0; s < m; ++s) r -= R(a, s) * R(s, be);
                    out.push_back(r);
                }
            return out;
        case IdentityId::term1_heat:
            for (int a = 0; a < m; ++a)
                for (int p = 0; p < m; ++p) acc += 0.5 * (R(a, p) * nabla_divbar(p, a) + R(p, a) * nablabar_div(p, a));
            for (int a = 0; a < m; ++a)
                for (int s = 0; s < m; ++s)
                    for (int p = 0; p < m; ++p) acc += 0.5 * R(s, p) * (j.ddb(a, s, p, a) + j.dbd(a, p, a, s));
            for (int s = 0; s < m; ++s)
                for (int u = 0; u < m; ++u) {
                    acc += b.lapRic(s, u) * j.h(u, s);
                    for (int a = 0; a < m; ++a) acc += b.dbRic(u, s, a) * j.d(u, a, s) + b.dRic(u, s, a) * j.db(u, a, s);
                }
            return {acc};
        case IdentityId::term2_heat:
            for (int a = 0; a < m; ++a)
                for (int be = 0; be < m; ++be) {
                    acc += eps * std::norm(R(a, be));
                    for (int s = 0; s < m; ++s) {
                        acc -= b.dRic(s, a, be) * j.db(s, be, a) + b.dbRic(s, a, be) * j.d(s, be, a);
                        for (int u = 0; u < m; ++u) acc += 2.0 * Rm(a, be, s, u) * R(u, s) * j.h(be, a);
                    }
                }
            return {acc};
        case IdentityId::term3_heat: {
            const Vec10& V = f.vf.V;
            const auto& dV = f.vf.dv.dV;
            const auto& dbV = f.vf.dv.dbV;
            for (int a = 0; a < m; ++a) {
                acc += dv.div[a] * std::conj(f.LV(a)) + dv.divbar[a] * f.LV(a);
                for (int be = 0; be < m; ++be) acc += R(be, a) * (dv.div[a] * std::conj(V[be]) + dv.divbar[be] * V[a]);
                cplx e1 = 0.0, e2 = 0.0;
                for (int s = 0; s < m; ++s)
                    for (int u = 0; u < m; ++u) {
                        e1 += R(s, u) * j.d(u, a, s) + b.dRic(s, a, u) * j.h(u, s);
                        e2 += R(s, u) * j.db(s, u, a) + b.dbRic(s, u, a) * j.h(s, u);
                    }
                for (int u = 0; u < m; ++u) {
                    e1 -= 0.5 * R(a, u) * dv.div[u];
                    e2 -= 0.5 * R(u, a) * dv.divbar[u];
                }
                acc += e1 * std::conj(V[a]) + e2 * V[a];
                for (int s = 0; s < m; ++s)
                    acc -= nabla_div(s, a) * std::conj(dV(s, a)) + nablabar_div(s, a) * std::conj(dbV(s, a)) +
                           nabla_divbar(s, a) * dbV(s, a) + nablabar_divbar(s, a) * dV(s, a);
            }
            return {acc};
        }
        case IdentityId::term4_heat: {
            const Vec10& V = f.vf.V;
            const auto& dV = f.vf.dv.dV;
            const auto& dbV = f.vf.dv.dbV;
            for (int a = 0; a < m; ++a)
                for (int g = 0; g < m; ++g) {
                    const cplx ht = j.h(a, g) + (a == g ? eps : 0.0);
                    const cplx vv = std::conj(V[a]) * V[g];
                    for (int s = 0; s < m; ++s) {
                        acc += 0.5 * (R(a, s) * j.h(s, g) + j.h(a, s) * R(s, g)) * vv;
                        for (int u = 0; u < m; ++u) acc += Rm(a, g, s, u) * j.h(u, s) * vv;
                    }
                    acc += ht * (f.LV(g) * std::conj(V[a]) + V[g] * std::conj(f.LV(a)));
                    for (int s = 0; s < m; ++s) {
                        acc -= j.d(s, a, g) * (dbV(s, g) * std::conj(V[a]) + V[g] * std::conj(dV(s, a)));
                        acc -= j.db(s, a, g) * (dV(s, g) * std::conj(V[a]) + V[g] * std::conj(dbV(s, a)));
                        acc -= ht * (dV(s, g) * std::conj(dV(s, a)) + dbV(s, g) * std::conj(dbV(s, a)));
                    }
                    if (c.eps_placement == EpsPlacement::outside_bracket)
                        acc += eps * R(a, g) * vv;
                    else
                        acc -= ht * eps * R(a, g) * vv;
                }
            return {acc};
        }
        case IdentityId::term5_heat: {
            cplx H = 0.0;
            for (int a = 0; a < m; ++a) {
                H += j.h(a, a);
                for (int s = 0; s < m; ++s) acc += R(a, s) * j.h(s, a) / t;
            }
            acc -= (H + eps * m) / (t * t);
            return {acc};
        }
        case IdentityId::ricci_commutator:
            for (int a = 0; a < m; ++a)
                for (int p = 0; p < m; ++p)
                    for (int s = 0; s < m; ++s) {
                        acc += R(s, p) * (j.ddb(a, s, p, a) + j.dbd(a, p, a, s)) - 2.0 * R(a, p) * R(p, s) * j.h(s, a);
                        for (int g = 0; g < m; ++g) acc += 2.0 * R(a, p) * Rm(p, a, s, g) * j.h(g, s);
                    }
            return {acc};
        case IdentityId::optimal_gradient: {
            const HermMatrix ht = htilde_of(j, eps);
            const Vec10 Vs = optimal_vector(ht, dv.div);
            const VectorDerivatives d = optimal_vector_derivatives(j, ht, Vs);
            out = flatten(d.dV);
            for (cplx x : flatten(d.dbV)) out.push_back(x);
            return out;
        }
        case IdentityId::zhat_heat: {
            const HermMatrix ht = htilde_of(j, eps);
            const Vec10 Vs = optimal_vector(ht, dv.div);
            const VectorDerivatives d = optimal_vector_derivatives(j, ht, Vs);
            cplx B = 2.0 * (eps * b.scalar + eps * m / t);
            for (int a = 0; a < m; ++a) {
                B += 2.0 * j.h(a, a) / t;
                for (int g = 0; g < m; ++g) {
                    B += 2.0 * R(a, g) * j.h(g, a);
                    B -= ht(g, a) * std::conj(d.dbV(a, g));
                    B -= (c.bracket == BracketForm::aligned ? ht(g, a) * d.dbV(g, a) : ht(g, a) * d.dbV(a, g));
                }
            }
            return {evaluate_Y1(j, b, Vs, t) + evaluate_Y2(ht, b, d, t) - B / t};
        }
    }
    return out;
}

}  // namespace detail

namespace detail {

struct Sides {
    std::vector<cplx> lhs, rhs;
};

inline double time_step(const IdentityCase& c);

inline Sides evaluate_sides(const IdentityCase& c, double dx) {
    const double tau = time_step(c);
    std::mt19937_64 rng(c.seed);
    const int m = c.model.m;
    Inputs in;
    in.h0 = random_hermitian(m, kCenterOrder, c.h_degree, m + 1.0, rng);
    in.V = random_form(m, kCenterOrder, rng);

    Slice s0;
    s0.t = c.t;
    s0.geo = Geometry(slice_metric(c, c.t, kCenterOrder, dx));
    s0.cv = curvature(s0.geo);
    if (c.source == HSource::random_polynomial) in.L0 = lichnerowicz_rhs(in.h0, s0.geo, s0.cv);
    s0.h = slice_h(c, s0, in, kCenterOrder, dx);

    const Frame fr = s0.geo.frame();
    const HJet j = covariant_derivatives(s0.h, s0.geo, fr);
    const CurvatureBundle b = curvature_bundle(s0.geo, s0.cv, 2);
    Sides out;

    if (c.id == IdentityId::ricci_commutator) {
        cplx lhs = 0.0;
        const Divergence dv = divergence(j);
        (void)dv;
        for (int a = 0; a < m; ++a)
            for (int p = 0; p < m; ++p)
                for (int g = 0; g < m; ++g) lhs += b.Ric(p, a) * j.dbd(p, g, a, g) + b.Ric(a, p) * j.ddb(p, g, g, a);
        out.lhs = {lhs};
        out.rhs = right_side(c, j, b, {});
        return out;
    }
    if (c.id == IdentityId::optimal_gradient) {
        TensorJet ht = s0.h + c.eps * s0.geo.metric().truncated(s0.h.order());
        TensorJet Vs = optimal_vector_jet(ht, divergence_jet(s0.h, s0.geo), s0.geo);
        VectorFieldValues vf = vector_field_values(Vs, s0.geo, fr);
        out.lhs = flatten(vf.dv.dV);
        for (cplx x : flatten(vf.dv.dbV)) out.lhs.push_back(x);
        out.rhs = right_side(c, j, b, {});
        return out;
    }

    // (d/dt - Delta) Q at the centre: time difference of chart values minus the jet Laplacian
    const TensorJet Q0 = evolved_quantity(c, s0, in);
    PointTensor dQ = Q0.value();
    for (int i = 0; i < dQ.size(); ++i) dQ.flat(i) = 0.0;
    for (int k = -kTimeRadius; k <= kTimeRadius; ++k) {
        const double w = kTimeWeights[k + kTimeRadius];
        if (w == 0.0) continue;
        Slice sk = make_slice(c, c.t + k * tau, kOuterOrder, dx, in);
        const PointTensor q = evolved_quantity(c, sk, in).value();
        for (int i = 0; i < dQ.size(); ++i) dQ.flat(i) += w * q.flat(i) / tau;
    }
    const PointTensor lap = laplacian(Q0, s0.geo).value();
    for (int i = 0; i < dQ.size(); ++i) dQ.flat(i) -= lap.flat(i);
    out.lhs = flatten(fr.apply(dQ));

    FormData f;
    if (c.id == IdentityId::term3_heat || c.id == IdentityId::term4_heat) {
        f.vf = vector_field_values(in.V, s0.geo, fr);
        f.LV = fr.apply((-1.0 * laplacian(in.V, s0.geo)).value());
    }
    out.rhs = right_side(c, j, b, f);
    return out;
}

inline double time_step(const IdentityCase& c) {
    if (c.tau > 0.0) return c.tau;
    const double T = time_window(c.model);
    return std::min({1e-2, c.t / 100.0, std::isfinite(T) ? (T - c.t) / 100.0 : 1e-2});
}

inline double norm(const std::vector<cplx>& v) {
    double s = 0.0;
    for (cplx x : v) s += std::norm(x);
    return std::sqrt(s);
}

}  // namespace detail

/// Validate the case: model window around t, evaluable point, backend support.
inline void validate_case(const IdentityCase& c) {
    check_point(c.model, c.z);
    if (c.model.kind == ModelKind::radial_profile) throw DomainError("identities need an exact flow; the radial profile is a t = 0 metric");
    if (!(c.tau >= 0.0)) throw ArgumentError("identity case: tau must be nonnegative");
    if (!(c.dx > 0.0)) throw ArgumentError("identity case: dx must be positive");
    if (!(c.eps >= 0.0)) throw ArgumentError("identity case: eps must be nonnegative");
    if (c.h_degree < 0 || c.h_degree > 4) throw ArgumentError("identity case: h degree must be in [0, 4]");
    const double reach = is_evolution(c.id) ? detail::kTimeRadius * detail::time_step(c) : 0.0;
    if (!(c.t - reach > 0.0)) throw DomainError("identity case: t must exceed the time stencil");
    check_time(c.model, c.t - reach);
    check_time(c.model, c.t + reach);
    if (c.t + reach >= time_window(c.model)) throw DomainError("identity case: time stencil leaves the model window");
    if (c.backend == Backend::finite_difference && c.model.m != 1) throw ArgumentError("finite-difference backend supports m = 1 only");
    if (c.source == HSource::heat_kernel && c.model.kind != ModelKind::flat) throw ArgumentError("heat-kernel h requires the flat model");
}

/// Residual of one identity.  Analytic: pass iff the relative residual is <= 1e-9.
/// Finite differences: also evaluated at dx / 2; pass iff the refinement slope is in
/// [1.5, 2.5] or the residual is already at the analytic tolerance.
inline IdentityResult check_identity(const IdentityCase& c) {
    validate_case(c);
    IdentityResult r;
    r.c = c;
    auto sides = detail::evaluate_sides(c, c.dx);
    r.lhs = sides.lhs;
    r.rhs = sides.rhs;
    std::vector<cplx> diff(r.lhs.size());
    for (size_t i = 0; i < diff.size(); ++i) diff[i] = r.lhs[i] - r.rhs[i];
    r.residual = detail::norm(diff);
    r.scale = std::max({1.0, detail::norm(r.lhs), detail::norm(r.rhs)});
    r.relative = r.residual / r.scale;
    r.pass = r.relative <= kIdentityTol;
    if (c.backend == Backend::finite_difference) {
        auto half = detail::evaluate_sides(c, 0.5 * c.dx);
        double s = 0.0;
        for (size_t i = 0; i < half.lhs.size(); ++i) s += std::norm(half.lhs[i] - half.rhs[i]);
        r.residual_half = std::sqrt(s);
        if (r.residual > 0.0 && r.residual_half > 0.0) r.slope = std::log2(r.residual / r.residual_half);
        r.pass = r.pass || (r.slope >= 1.5 && r.slope <= 2.5);
    }
    return r;
}

struct SweepRow {
    IdentityId id = IdentityId::div_heat;
    std::string model;
    int samples = 0;
    double max_residual = 0.0;  // relative
    double min_slope = std::numeric_limits<double>::quiet_NaN();
    double max_slope = std::numeric_limits<double>::quiet_NaN();
    int failures = 0;
    bool pass() const { return failures == 0; }
};

struct SweepOptions {
    ModelSpec model = ModelSpec::flat(1);
    int samples = 0;
    std::uint64_t seed = 0;
    Backend backend = Backend::analytic;
    HSource source = HSource::random_polynomial;
    double dx = 0.05;
    double eps = 0.05;
    int h_degree = 4;
};

/// Randomized cases per identity; the same seed gives bit-identical rows.
inline std::vector<SweepRow> sweep(const std::vector<IdentityId>& ids, const SweepOptions& o) {
    if (o.samples < 0) throw ArgumentError("sweep: negative sample count");
    std::vector<SweepRow> rows;
    if (o.samples == 0) return rows;
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double t_lo = 0.5, t_hi = 1.5;
    if (o.model.kind == ModelKind::fubini_study) {
        t_lo = 0.05;
        t_hi = 0.7 / (o.model.m + 1);
    } else if (o.model.kind == ModelKind::cigar) {
        t_lo = 0.1;
        t_hi = 1.0;
    }
    for (IdentityId id : ids) {
        SweepRow row;
        row.id = id;
        row.model = o.model.name();
        for (int k = 0; k < o.samples; ++k) {
            IdentityCase c;
            c.id = id;
            c.model = o.model;
            c.z.assign(o.model.m, 0.0);
            for (auto& zi : c.z) zi = std::polar(0.8 / std::sqrt(o.model.m) * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
            c.t = t_lo + (t_hi - t_lo) * u(rng);
            c.seed = rng();
            c.backend = o.backend;
            c.source = o.source;
            c.dx = o.dx;
            c.eps = o.eps;
            c.h_degree = o.h_degree;
            IdentityResult r = check_identity(c);
            ++row.samples;
            row.max_residual = std::max(row.max_residual, r.relative);
            if (!std::isnan(r.slope)) {
                row.min_slope = std::isnan(row.min_slope) ? r.slope : std::min(row.min_slope, r.slope);
                row.max_slope = std::isnan(row.max_slope) ? r.slope : std::max(row.max_slope, r.slope);
            }
            if (!r.pass) ++row.failures;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace kahler
