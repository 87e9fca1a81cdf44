#pragma once

/**
 * @file geometry.hpp
 * @brief Kähler curvature calculus on jets.
 *
 * Every quantity is a TensorJet: a dense array of Jets indexed by lower
 * holomorphic/antiholomorphic slots.  Covariant derivatives prepend a slot, so
 * nabla_d nabla_c h_{a bbar} is stored with slots (d, c, a, bbar).
 *
 * Conventions:
 *   Gamma^p_{a c} = g^{p qbar} d_a g_{c qbar}
 *   R_{a bbar c dbar} = -d_c d_dbar g_{a bbar} + g^{p qbar} d_c g_{a qbar} d_dbar g_{p bbar}
 *   R_{a bbar} = g^{c dbar} R_{a bbar c dbar},  scalar = g^{a bbar} R_{a bbar}
 *   Delta = 1/2 g^{s sbar} (nabla_s nabla_sbar + nabla_sbar nabla_s)
 * With these, Fubini-Study in g = dd̄ log(1+|z|^2) has Ric = (m+1) g.
 */

#include <functional>
#include <vector>

#include "kahler/jet.hpp"
#include "kahler/tensor_point.hpp"

namespace kahler {

class TensorJet {
  public:
    TensorJet() = default;
    TensorJet(int m, std::vector<bool> barred, int order) : m_(m), barred_(std::move(barred)) {
        int n = 1;
        for (size_t k = 0; k < barred_.size(); ++k) n *= m_;
        comp_.assign(n, Jet(m_, order));
    }

    int dim() const { return m_; }
    int rank() const { return static_cast<int>(barred_.size()); }
    int size() const { return static_cast<int>(comp_.size()); }
    const std::vector<bool>& barred() const { return barred_; }
    int order() const {
        int o = kMaxJetOrder;
        for (auto& c : comp_) o = std::min(o, c.order());
        return o;
    }

    Jet& flat(int i) { return comp_[i]; }
    const Jet& flat(int i) const { return comp_[i]; }
    template <class... I>
    Jet& operator()(I... idx) { return comp_[offset({static_cast<int>(idx)...})]; }
    template <class... I>
    const Jet& operator()(I... idx) const { return comp_[offset({static_cast<int>(idx)...})]; }

    int offset(std::initializer_list<int> idx) const {
        int o = 0;
        for (int i : idx) o = o * m_ + i;
        return o;
    }
    /// Multi-index of flat position i.
    std::vector<int> unflatten(int i) const {
        std::vector<int> idx(rank());
        for (int k = rank() - 1; k >= 0; --k) {
            idx[k] = i % m_;
            i /= m_;
        }
        return idx;
    }
    int flatten(const std::vector<int>& idx) const {
        int o = 0;
        for (int i : idx) o = o * m_ + i;
        return o;
    }

    PointTensor value() const {
        PointTensor p(m_, barred_);
        for (int i = 0; i < size(); ++i) p.flat(i) = comp_[i].value();
        return p;
    }

    TensorJet truncated(int order) const {
        TensorJet r = *this;
        for (auto& c : r.comp_)
            if (c.order() > order) c = c.truncated(order);
        return r;
    }

    TensorJet& operator+=(const TensorJet& o) {
        check_same(o);
        for (int i = 0; i < size(); ++i) comp_[i] += o.comp_[i];
        return *this;
    }
    TensorJet& operator-=(const TensorJet& o) {
        check_same(o);
        for (int i = 0; i < size(); ++i) comp_[i] -= o.comp_[i];
        return *this;
    }
    TensorJet& operator*=(cplx s) {
        for (auto& c : comp_) c *= s;
        return *this;
    }
    friend TensorJet operator+(TensorJet a, const TensorJet& b) { return a += b; }
    friend TensorJet operator-(TensorJet a, const TensorJet& b) { return a -= b; }
    friend TensorJet operator*(TensorJet a, cplx s) { return a *= s; }
    friend TensorJet operator*(cplx s, TensorJet a) { return a *= s; }
    friend TensorJet operator*(double s, TensorJet a) { return a *= cplx(s); }

    /// Scalar-jet multiple.
    friend TensorJet operator*(const Jet& f, const TensorJet& a) {
        TensorJet r = a;
        for (auto& c : r.comp_) c = f * c;
        return r;
    }

    /// Componentwise complex conjugate with slot types swapped (e.g. h_{a bbar} -> conj).
    TensorJet conj() const {
        std::vector<bool> b = barred_;
        for (size_t k = 0; k < b.size(); ++k) b[k] = !b[k];
        TensorJet r(m_, b, 0);
        for (int i = 0; i < size(); ++i) r.comp_[i] = comp_[i].conj();
        return r;
    }

  private:
    void check_same(const TensorJet& o) const {
        if (o.m_ != m_ || o.barred_ != barred_) throw ArgumentError("TensorJet: signature mismatch");
    }

    int m_ = 0;
    std::vector<bool> barred_;
    std::vector<Jet> comp_;
};

/// Scalar (rank-0) tensor jet wrapper.
inline TensorJet scalar_tensor(const Jet& f) {
    TensorJet t(f.dim(), {}, f.order());
    t.flat(0) = f;
    return t;
}

/// Levi-Civita data of a Kähler metric given by its jets.
class Geometry {
  public:
    Geometry() = default;

    /// g must have signature (unbarred, barred) and be Hermitian and Kähler.
    explicit Geometry(TensorJet g) : m_(g.dim()), g_(std::move(g)) {
        if (g_.rank() != 2 || g_.barred()[0] || !g_.barred()[1]) throw ArgumentError("Geometry: metric must be a (1,1) tensor");
        const int K = g_.order();
        ginv_ = TensorJet(m_, {false, true}, K);
        if (m_ == 1) {
            if (std::abs(g_(0, 0).value()) < 1e-300) throw SingularMetricError("Geometry: singular metric");
            ginv_(0, 0) = reciprocal(g_(0, 0));
        } else {
            Jet det = g_(0, 0) * g_(1, 1) - g_(0, 1) * g_(1, 0);
            if (std::abs(det.value()) < 1e-300) throw SingularMetricError("Geometry: singular metric");
            Jet inv = reciprocal(det);
            ginv_(0, 0) = g_(1, 1) * inv;
            ginv_(1, 1) = g_(0, 0) * inv;
            ginv_(0, 1) = -(g_(1, 0) * inv);
            ginv_(1, 0) = -(g_(0, 1) * inv);
        }
        if (K >= 1) {
            gamma_.assign(m_ * m_ * m_, Jet(m_, K - 1));
            for (int p = 0; p < m_; ++p)
                for (int a = 0; a < m_; ++a)
                    for (int c = 0; c < m_; ++c) {
                        Jet s(m_, K - 1);
                        for (int q = 0; q < m_; ++q) s += ginv_(p, q) * g_(c, q).dz(a);
                        gamma_[(p * m_ + a) * m_ + c] = s;
                    }
            gamma_bar_.resize(gamma_.size());
            for (size_t i = 0; i < gamma_.size(); ++i) gamma_bar_[i] = gamma_[i].conj();
        }
    }

    int dim() const { return m_; }
    int order() const { return g_.order(); }
    const TensorJet& metric() const { return g_; }
    const TensorJet& inverse() const { return ginv_; }
    /// Gamma^p_{a c}.
    const Jet& gamma(int p, int a, int c) const { return gamma_.at((p * m_ + a) * m_ + c); }
    /// conj(Gamma^p_{a c}), the connection on antiholomorphic slots.
    const Jet& gamma_bar(int p, int a, int c) const { return gamma_bar_.at((p * m_ + a) * m_ + c); }

    HermMatrix metric_value() const { return g_.value().as_matrix(); }
    Frame frame() const { return Frame(metric_value()); }

  private:
    int m_ = 0;
    TensorJet g_, ginv_;
    std::vector<Jet> gamma_, gamma_bar_;
};

/// nabla_c T (barred=false) or nabla_cbar T (barred=true); the new slot is first.
inline TensorJet covariant(const TensorJet& T, const Geometry& geo, bool barred) {
    const int m = T.dim();
    std::vector<bool> sig{barred};
    sig.insert(sig.end(), T.barred().begin(), T.barred().end());
    const int K = std::min(T.order() - 1, geo.order() - 1);
    if (K < 0) throw ArgumentError("covariant: jet order exhausted");
    TensorJet R(m, sig, K);
    for (int c = 0; c < m; ++c)
        for (int i = 0; i < T.size(); ++i) {
            Jet v = barred ? T.flat(i).dzbar(c) : T.flat(i).dz(c);
            if (v.order() > K) v = v.truncated(K);
            std::vector<int> idx = T.unflatten(i);
            for (int k = 0; k < T.rank(); ++k) {
                if (T.barred()[k] != barred) continue;
                const int ik = idx[k];
                for (int p = 0; p < m; ++p) {
                    idx[k] = p;
                    const Jet& G = barred ? geo.gamma_bar(p, c, ik) : geo.gamma(p, c, ik);
                    v -= G * T.flat(T.flatten(idx));
                }
                idx[k] = ik;
            }
            R.flat(c * T.size() + i) = std::move(v);
        }
    return R;
}

/// Contract an unbarred slot with a barred slot through g^{a bbar}.
inline TensorJet contract(const TensorJet& T, int slot_u, int slot_b, const Geometry& geo) {
    if (T.barred()[slot_u] || !T.barred()[slot_b]) throw ArgumentError("contract: need one unbarred and one barred slot");
    const int m = T.dim();
    std::vector<bool> sig;
    for (int k = 0; k < T.rank(); ++k)
        if (k != slot_u && k != slot_b) sig.push_back(T.barred()[k]);
    const int K = std::min(T.order(), geo.order());
    TensorJet R(m, sig, K);
    for (int i = 0; i < T.size(); ++i) {
        const auto idx = T.unflatten(i);
        std::vector<int> out;
        for (int k = 0; k < T.rank(); ++k)
            if (k != slot_u && k != slot_b) out.push_back(idx[k]);
        R.flat(R.flatten(out)) += geo.inverse()(idx[slot_u], idx[slot_b]) * T.flat(i);
    }
    return R;
}

/// Tensor product A (x) B.
inline TensorJet outer(const TensorJet& A, const TensorJet& B) {
    std::vector<bool> sig = A.barred();
    sig.insert(sig.end(), B.barred().begin(), B.barred().end());
    TensorJet R(A.dim(), sig, std::min(A.order(), B.order()));
    for (int i = 0; i < A.size(); ++i)
        for (int j = 0; j < B.size(); ++j) R.flat(i * B.size() + j) = A.flat(i) * B.flat(j);
    return R;
}

/// Symmetrized complex Laplacian 1/2 g^{s sbar}(nabla_s nabla_sbar + nabla_sbar nabla_s).
inline TensorJet laplacian(const TensorJet& T, const Geometry& geo) {
    TensorJet a = covariant(covariant(T, geo, true), geo, false);   // (s, sbar', ...)
    TensorJet b = covariant(covariant(T, geo, false), geo, true);   // (sbar', s, ...)
    TensorJet r = contract(a, 0, 1, geo) + contract(b, 1, 0, geo);
    return 0.5 * r;
}

/// Christoffel symbols as a point value Gamma^p_{a c}, stored [p][a][c].
inline std::vector<cplx> christoffel(const Geometry& geo) {
    const int m = geo.dim();
    std::vector<cplx> r(m * m * m);
    for (int p = 0; p < m; ++p)
        for (int a = 0; a < m; ++a)
            for (int c = 0; c < m; ++c) r[(p * m + a) * m + c] = geo.gamma(p, a, c).value();
    return r;
}

/// Curvature jets of a Kähler metric.
struct Curvature {
    TensorJet Rm;      // R_{a bbar c dbar}
    TensorJet Ric;     // R_{a bbar}
    Jet scalar;        // g^{a bbar} R_{a bbar}
};

inline Curvature curvature(const Geometry& geo) {
    const int m = geo.dim();
    const auto& g = geo.metric();
    const auto& gi = geo.inverse();
    const int K = geo.order() - 2;
    if (K < 0) throw ArgumentError("curvature: metric jet order must be >= 2");
    Curvature cv;
    cv.Rm = TensorJet(m, {false, true, false, true}, K);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int c = 0; c < m; ++c)
                for (int d = 0; d < m; ++d) {
                    Jet v = -g(a, b).dz(c).dzbar(d);
                    for (int p = 0; p < m; ++p)
                        for (int q = 0; q < m; ++q) v += gi(p, q) * g(a, q).dz(c) * g(p, b).dzbar(d);
                    cv.Rm(a, b, c, d) = std::move(v);
                }
    cv.Ric = contract(cv.Rm, 2, 3, geo);
    cv.scalar = contract(cv.Ric, 0, 1, geo).flat(0);
    return cv;
}

/// Right side of the complex Lichnerowicz heat equation:
/// Delta h_{c dbar} + R_{b abar c dbar} h_{a bbar} - 1/2 (R_{c pbar} h_{p dbar} + R_{p dbar} h_{c pbar}).
inline TensorJet lichnerowicz_rhs(const TensorJet& h, const Geometry& geo, const Curvature& cv) {
    if (h.rank() != 2 || h.dim() != geo.dim()) throw ArgumentError("lichnerowicz_rhs: shape mismatch");
    const int m = h.dim();
    const auto& gi = geo.inverse();
    TensorJet out = laplacian(h, geo);
    const int K = out.order();
    for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
            Jet v(m, K);
            for (int b = 0; b < m; ++b)
                for (int bp = 0; bp < m; ++bp)
                    for (int a = 0; a < m; ++a)
                        for (int ap = 0; ap < m; ++ap)
                            v += gi(b, bp) * gi(a, ap) * cv.Rm(b, ap, c, d) * h(a, bp);
            for (int p = 0; p < m; ++p)
                for (int pp = 0; pp < m; ++pp)
                    v -= 0.5 * (gi(p, pp) * (cv.Ric(c, pp) * h(p, d) + cv.Ric(p, d) * h(c, pp)));
            out(c, d) += v;
        }
    return out;
}

/// Frame values of h and its first two covariant derivatives.
inline HJet covariant_derivatives(const TensorJet& h, const Geometry& geo, const Frame& fr) {
    HJet j;
    TensorJet d = covariant(h, geo, false);
    TensorJet db = covariant(h, geo, true);
    j.h = fr.apply(h.value());
    j.d = fr.apply(d.value());
    j.db = fr.apply(db.value());
    if (std::min(h.order(), geo.order()) >= 2) {
        j.dd = fr.apply(covariant(d, geo, false).value());
        j.ddb = fr.apply(covariant(db, geo, false).value());
        j.dbd = fr.apply(covariant(d, geo, true).value());
        j.dbdb = fr.apply(covariant(db, geo, true).value());
    }
    return j;
}

/// Pointwise curvature package in frame components.
///
/// dRic(c,a,b) = nabla_c R_{a bbar}; dbRic(c,a,b) = nabla_cbar R_{a bbar};
/// dbdRic(d,c,a,b) = nabla_dbar nabla_c R; ddbRic(d,c,a,b) = nabla_d nabla_cbar R.
struct CurvatureBundle {
    int m = 0;
    HermMatrix g, ginv;           // chart components
    std::vector<cplx> gamma;      // chart components [p][a][c]
    PointTensor Rm, Ric;
    double scalar = 0.0;
    bool has_first = false, has_second = false;
    PointTensor dRic, dbRic, dScalar, dbScalar;
    PointTensor lapRic, dbdRic, ddbRic;
};

/// Evaluate the bundle; derivative_order 0, 1 or 2 selects how many Ricci
/// derivatives to include (the metric jet must have order 2 + derivative_order).
inline CurvatureBundle curvature_bundle(const Geometry& geo, const Curvature& cv, int derivative_order) {
    CurvatureBundle b;
    b.m = geo.dim();
    b.g = geo.metric_value();
    b.ginv = geo.inverse().value().as_matrix();
    b.gamma = christoffel(geo);
    const Frame fr(b.g);
    b.Rm = fr.apply(cv.Rm.value());
    b.Ric = fr.apply(cv.Ric.value());
    b.scalar = cv.scalar.value().real();
    if (derivative_order >= 1) {
        TensorJet dR = covariant(cv.Ric, geo, false);
        TensorJet dbR = covariant(cv.Ric, geo, true);
        b.dRic = fr.apply(dR.value());
        b.dbRic = fr.apply(dbR.value());
        b.dScalar = fr.apply(covariant(scalar_tensor(cv.scalar), geo, false).value());
        b.dbScalar = fr.apply(covariant(scalar_tensor(cv.scalar), geo, true).value());
        b.has_first = true;
        if (derivative_order >= 2) {
            TensorJet dbd = covariant(dR, geo, true);
            TensorJet ddb = covariant(dbR, geo, false);
            b.dbdRic = fr.apply(dbd.value());
            b.ddbRic = fr.apply(ddb.value());
            b.lapRic = fr.apply((0.5 * (contract(ddb, 0, 1, geo) + contract(dbd, 1, 0, geo))).value());
            b.has_second = true;
        }
    }
    return b;
}

}  // namespace kahler
