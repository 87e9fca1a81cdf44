#pragma once

/**
 * @file harnack.hpp
 * @brief The linear trace Harnack quantity Z, its regularization Zhat, the
 * minimizing vector field and the auxiliary terms Y1, Y2.
 *
 * Pointwise evaluation works on frame components (g = identity), so every
 * contraction is a plain sum.  Storage follows geometry.hpp: d(c,a,b) =
 * nabla_c h_{a bbar}, db(c,a,b) = nabla_cbar h_{a bbar}, dbd(d,c,a,b) =
 * nabla_dbar nabla_c h, and so on.  V holds the components V_a; V_abar is
 * conj(V_a).  dV(s,a) = nabla_s V_a and dbV(s,a) = nabla_sbar V_a.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "kahler/errors.hpp"
#include "kahler/geometry.hpp"
#include "kahler/tensor_point.hpp"

namespace kahler {

using CVec = std::array<cplx, kMaxDim>;

struct Divergence {
    CVec div{};     // div(h)_a = sum_c nabla_c h_{a cbar}
    CVec divbar{};  // div(h)_bbar = sum_c nabla_cbar h_{c bbar}
};

inline Divergence divergence(const HJet& j) {
    const int m = j.h.dim();
    Divergence d;
    for (int a = 0; a < m; ++a)
        for (int c = 0; c < m; ++c) {
            d.div[a] += j.d(c, a, c);
            d.divbar[a] += j.db(c, c, a);
        }
    return d;
}

/// Solve sum_c H(a,c) x_c = rhs_a for Hermitian H (m <= 2).
inline CVec hermitian_solve(const HermMatrix& H, const CVec& rhs) {
    const int m = H.dim();
    const cplx det = H.det();
    double scale = 0.0;
    for (int a = 0; a < m; ++a) scale = std::max(scale, std::abs(H(a, a)));
    if (!(std::abs(det) > 1e-14 * std::pow(std::max(scale, 1e-300), m)))
        throw SingularMetricError("optimal vector: h + eps g is singular");
    CVec x{};
    if (m == 1) {
        x[0] = rhs[0] / H(0, 0);
    } else {
        x[0] = (H(1, 1) * rhs[0] - H(0, 1) * rhs[1]) / det;
        x[1] = (H(0, 0) * rhs[1] - H(1, 0) * rhs[0]) / det;
    }
    return x;
}

/// V* with div(h)_a + htilde_{a cbar} V_c = 0.
inline Vec10 optimal_vector(const HermMatrix& htilde, const CVec& div) {
    CVec rhs{};
    for (int a = 0; a < htilde.dim(); ++a) rhs[a] = -div[a];
    Vec10 v;
    v.m = htilde.dim();
    v.v = hermitian_solve(htilde, rhs);
    return v;
}

struct VectorDerivatives {
    PointTensor dV, dbV;  // (s, a)
};

/// Derivatives of V* from the differentiated linear system, no numerical differentiation.
inline VectorDerivatives optimal_vector_derivatives(const HJet& j, const HermMatrix& htilde, const Vec10& V) {
    const int m = j.h.dim();
    VectorDerivatives out{PointTensor(m, {false, false}), PointTensor(m, {true, false})};
    for (int s = 0; s < m; ++s) {
        CVec r1{}, r2{};
        for (int a = 0; a < m; ++a)
            for (int c = 0; c < m; ++c) {
                r1[a] -= j.dd(s, c, a, c) + j.d(s, a, c) * V[c];
                r2[a] -= j.dbd(s, c, a, c) + j.db(s, a, c) * V[c];
            }
        const CVec x1 = hermitian_solve(htilde, r1), x2 = hermitian_solve(htilde, r2);
        for (int a = 0; a < m; ++a) {
            out.dV(s, a) = x1[a];
            out.dbV(s, a) = x2[a];
        }
    }
    return out;
}

struct HarnackInput {
    double t = 0.0;
    /// Regularization; empty selects 0, or 1e-6 when h has an eigenvalue below 1e-8.
    std::optional<double> eps;
    HJet h;
    CurvatureBundle bundle;
    /// Explicit V (frame components); empty selects V*.
    std::optional<Vec10> V;
    /// Derivatives of an explicit V, needed for Y2.
    std::optional<VectorDerivatives> dV;
};

struct HarnackReport {
    double eps = 0.0;
    double Z = 0.0, Zhat = 0.0;
    double I = 0.0, II = 0.0, III = 0.0, IV = 0.0, V = 0.0;
    Vec10 vector;
    bool optimal = false;
    double Y1 = std::numeric_limits<double>::quiet_NaN();
    double Y2 = std::numeric_limits<double>::quiet_NaN();
    Divergence div;
    double min_eig_h = 0.0;
    double identity_143_residual = std::numeric_limits<double>::quiet_NaN();
    bool Z_nonneg = false, Y1_nonneg = false, Y2_nonneg = false, identity_143_ok = false;
};

struct ZTerms {
    double I = 0, II = 0, III = 0, IV = 0, V = 0;
    double total() const { return I + II + III + IV + V; }
};

/// The five pieces of Zhat at a given V; eps = 0 gives Z itself.
inline ZTerms z_terms(const HJet& j, const CurvatureBundle& b, const Vec10& V, double t, double eps) {
    const int m = j.h.dim();
    const Divergence d = divergence(j);
    ZTerms z;
    cplx I = 0.0, II = 0.0, III = 0.0, IV = 0.0, H = 0.0;
    for (int a = 0; a < m; ++a) {
        H += j.h(a, a);
        III += d.div[a] * std::conj(V[a]) + d.divbar[a] * V[a];
        for (int c = 0; c < m; ++c) {
            I += 0.5 * (j.dbd(a, c, a, c) + j.ddb(c, a, a, c));
            II += b.Ric(a, c) * j.h(c, a);
            IV += (j.h(a, c) + (a == c ? eps : 0.0)) * std::conj(V[a]) * V[c];
        }
    }
    z.I = I.real();
    z.II = II.real() + eps * b.scalar;
    z.III = III.real();
    z.IV = IV.real();
    z.V = (H.real() + eps * m) / t;
    return z;
}

/// The Cao bracket M(s,t) of Y1, contracted with h.
inline double evaluate_Y1(const HJet& j, const CurvatureBundle& b, const Vec10& V, double t) {
    if (!(t > 0.0)) throw DomainError("Y1 requires t > 0");
    if (!b.has_second) throw ArgumentError("Y1 needs second derivatives of Ricci");
    const int m = j.h.dim();
    cplx y = 0.0;
    for (int s = 0; s < m; ++s)
        for (int u = 0; u < m; ++u) {
            cplx M = b.lapRic(s, u) + b.Ric(s, u) / t;
            for (int a = 0; a < m; ++a) {
                M += b.dRic(a, s, u) * std::conj(V[a]) + b.dbRic(a, s, u) * V[a];
                for (int c = 0; c < m; ++c) M += b.Rm(s, u, a, c) * (b.Ric(c, a) + std::conj(V[a]) * V[c]);
            }
            y += M * j.h(u, s);
        }
    return y.real();
}

/// Sum-of-squares term built from the derivatives of V.
inline double evaluate_Y2(const HermMatrix& htilde, const CurvatureBundle& b, const VectorDerivatives& dv, double t) {
    if (!(t > 0.0)) throw DomainError("Y2 requires t > 0");
    const int m = htilde.dim();
    cplx y = 0.0;
    for (int p = 0; p < m; ++p) {
        CVec x{};
        for (int c = 0; c < m; ++c) x[c] = std::conj(dv.dbV(p, c)) - b.Ric(p, c) - (p == c ? 1.0 / t : 0.0);
        for (int c = 0; c < m; ++c)
            for (int a = 0; a < m; ++a)
                y += htilde(c, a) * (x[c] * std::conj(x[a]) + std::conj(dv.dV(p, c)) * dv.dV(p, a));
    }
    return y.real();
}

/// Right side of the closed form of Zhat at V = V*.
inline double zhat_at_optimum(const HJet& j, const CurvatureBundle& b, const HermMatrix& htilde, const VectorDerivatives& dv,
                              double t, double eps) {
    const int m = j.h.dim();
    cplx s = 0.0, H = 0.0;
    for (int a = 0; a < m; ++a) {
        H += j.h(a, a);
        for (int c = 0; c < m; ++c)
            s += b.Ric(a, c) * j.h(c, a) - 0.5 * htilde(a, c) * dv.dbV(a, c) - 0.5 * htilde(c, a) * std::conj(dv.dbV(a, c));
    }
    return s.real() + (H.real() + eps * m) / t + eps * b.scalar;
}

/// Trace form obtained when h is the Ricci tensor.
inline double cao_trace_Z(const CurvatureBundle& b, const Vec10& V, double t) {
    if (!(t > 0.0)) throw DomainError("cao_trace_Z requires t > 0");
    if (!b.has_second) throw ArgumentError("cao_trace_Z needs second derivatives of Ricci");
    const int m = b.m;
    cplx z = b.scalar / t;
    for (int a = 0; a < m; ++a) {
        z += b.lapRic(a, a) + b.dScalar(a) * std::conj(V[a]) + b.dbScalar(a) * V[a];
        for (int c = 0; c < m; ++c) z += b.Ric(a, c) * (b.Ric(c, a) + std::conj(V[a]) * V[c]);
    }
    return z.real();
}

inline HermMatrix htilde_of(const HJet& j, double eps) {
    HermMatrix h = j.h.as_matrix();
    return h + HermMatrix::identity(h.dim()) * eps;
}

inline HarnackReport evaluate_Z(const HarnackInput& in) {
    if (!(in.t > 0.0)) throw DomainError("evaluate_Z requires t > 0");
    const int m = in.h.h.dim();
    HarnackReport r;
    r.min_eig_h = min_eigenvalue(in.h.h.as_matrix(), HermMatrix::identity(m));
    r.eps = in.eps ? *in.eps : (r.min_eig_h < 1e-8 ? 1e-6 : 0.0);
    r.div = divergence(in.h);
    const HermMatrix ht = htilde_of(in.h, r.eps);

    std::optional<VectorDerivatives> dv = in.dV;
    if (in.V) {
        r.vector = *in.V;
    } else {
        r.vector = optimal_vector(ht, r.div.div);
        r.optimal = true;
        if (in.h.dd.size() > 0) dv = optimal_vector_derivatives(in.h, ht, r.vector);
    }

    const ZTerms z0 = z_terms(in.h, in.bundle, r.vector, in.t, 0.0);
    const ZTerms ze = z_terms(in.h, in.bundle, r.vector, in.t, r.eps);
    r.Z = z0.total();
    r.I = ze.I;
    r.II = ze.II;
    r.III = ze.III;
    r.IV = ze.IV;
    r.V = ze.V;
    r.Zhat = ze.total();
    r.Z_nonneg = r.Z >= 0.0;

    if (in.bundle.has_second) {
        r.Y1 = evaluate_Y1(in.h, in.bundle, r.vector, in.t);
        r.Y1_nonneg = r.Y1 >= -1e-8;
    }
    if (dv) {
        r.Y2 = evaluate_Y2(ht, in.bundle, *dv, in.t);
        r.Y2_nonneg = r.Y2 >= -1e-10;
        if (r.optimal) {
            const double rhs = zhat_at_optimum(in.h, in.bundle, ht, *dv, in.t, r.eps);
            r.identity_143_residual = std::abs(r.Zhat - rhs) / std::max(1.0, std::abs(r.Zhat));
            r.identity_143_ok = r.identity_143_residual <= 1e-9;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Jet-level (chart) versions, used where space and time derivatives of these
// quantities are needed.

/// div(h)_a as a (1,0)-form jet.
inline TensorJet divergence_jet(const TensorJet& h, const Geometry& geo) {
    return contract(covariant(h, geo, false), 0, 2, geo);
}

/// div(h)_bbar as a (0,1)-form jet.
inline TensorJet divergence_bar_jet(const TensorJet& h, const Geometry& geo) {
    return contract(covariant(h, geo, true), 1, 0, geo);
}

/// V* as jets: the chart solution of div_a + g^{c dbar} htilde_{a dbar} V_c = 0.
inline TensorJet optimal_vector_jet(const TensorJet& htilde, const TensorJet& div, const Geometry& geo) {
    const int m = htilde.dim();
    const int K = std::min(htilde.order(), div.order());
    // W^dbar = g^{c dbar} V_c solves htilde_{a dbar} W^dbar = -div_a
    std::vector<Jet> W(m, Jet(m, K));
    if (m == 1) {
        W[0] = -(div(0) * reciprocal(htilde(0, 0)));
    } else {
        Jet inv = reciprocal(htilde(0, 0) * htilde(1, 1) - htilde(0, 1) * htilde(1, 0));
        W[0] = -((htilde(1, 1) * div(0) - htilde(0, 1) * div(1)) * inv);
        W[1] = -((htilde(0, 0) * div(1) - htilde(1, 0) * div(0)) * inv);
    }
    TensorJet V(m, {false}, K);
    for (int c = 0; c < m; ++c) {
        V(c) = Jet(m, K);
        for (int d = 0; d < m; ++d) V(c) += geo.metric()(c, d) * W[d];
    }
    return V;
}

/// (0,1)-form with components conj(V_a).
inline TensorJet conj_form(const TensorJet& V) { return V.conj(); }

struct ZJets {
    Jet I, II, III, IV, V;
    Jet total() const { return I + II + III + IV + V; }
};

/// Chart scalars I..V of Zhat for a (1,0)-form field V.
inline ZJets z_jets(const TensorJet& h, const Geometry& geo, const Curvature& cv, const TensorJet& V, double t, double eps) {
    const int m = h.dim();
    const auto& gi = geo.inverse();
    TensorJet div = divergence_jet(h, geo);
    TensorJet divb = divergence_bar_jet(h, geo);
    TensorJet Vb = conj_form(V);
    ZJets z;
    z.I = 0.5 * (contract(covariant(div, geo, true), 1, 0, geo).flat(0) + contract(covariant(divb, geo, false), 0, 1, geo).flat(0));
    const int K = z.I.order();
    z.II = Jet(m, K);
    z.III = Jet(m, K);
    z.IV = Jet(m, K);
    Jet H(m, K);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            H += gi(a, b) * h(a, b);
            z.III += gi(a, b) * (div(a) * Vb(b) + divb(b) * V(a));
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    const Jet gg = gi(a, b) * gi(c, d);
                    z.II += gg * cv.Ric(a, d) * h(c, b);
                    z.IV += gg * (h(a, d) + eps * geo.metric()(a, d)) * Vb(b) * V(c);
                }
        }
    z.II += eps * cv.scalar;
    z.V = (H + eps * m) * (1.0 / t);
    return z;
}

// ---------------------------------------------------------------------------
// Assembly from chart jets.

/// Frame values of a (1,0)-form field V and of nabla V, nablabar V.
struct VectorFieldValues {
    Vec10 V;
    VectorDerivatives dv;
};

inline VectorFieldValues vector_field_values(const TensorJet& V, const Geometry& geo, const Frame& fr) {
    const int m = V.dim();
    VectorFieldValues out;
    out.V.m = m;
    const PointTensor v = fr.apply(V.value());
    for (int a = 0; a < m; ++a) out.V[a] = v(a);
    out.dv.dV = fr.apply(covariant(V, geo, false).value());
    out.dv.dbV = fr.apply(covariant(V, geo, true).value());
    return out;
}

/// Pointwise Harnack input from a metric jet (order >= 4 for Y1) and an h jet (order >= 2).
inline HarnackInput make_harnack_input(const TensorJet& g, const TensorJet& h, double t, std::optional<double> eps = std::nullopt) {
    Geometry geo(g);
    Curvature cv = curvature(geo);
    HarnackInput in;
    in.t = t;
    in.eps = eps;
    in.h = covariant_derivatives(h, geo, geo.frame());
    in.bundle = curvature_bundle(geo, cv, std::clamp(geo.order() - 2, 0, 2));
    return in;
}

}  // namespace kahler
