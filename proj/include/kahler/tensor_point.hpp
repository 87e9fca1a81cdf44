#pragma once

/**
 * @file tensor_point.hpp
 * @brief Pointwise Hermitian tensor algebra for complex dimension m <= 2.
 *
 * Index convention: a matrix entry A(a, b) is the component A_{a bbar}; the
 * row index is holomorphic and the column index antiholomorphic.  The inverse
 * metric ginv(a, b) = g^{a bbar} satisfies sum_b ginv(a, b) g(c, b) = delta_ac.
 */

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/jet.hpp"

namespace kahler {

namespace detail {
inline std::atomic<long>& hermitian_warning_count() {
    static std::atomic<long> count{0};
    return count;
}
}  // namespace detail

/// Number of times a HermMatrix had to be symmetrized by more than 1e-10.
inline long hermitian_warnings() { return detail::hermitian_warning_count().load(); }

class HermMatrix {
  public:
    HermMatrix() = default;
    explicit HermMatrix(int m) : m_(m) { check_dim(m); }

    /// Row-major entries A_{a bbar}; symmetrized as (A + A^*)/2.
    HermMatrix(int m, std::initializer_list<cplx> entries) : m_(m) {
        check_dim(m);
        if (static_cast<int>(entries.size()) != m * m) throw ArgumentError("HermMatrix: wrong entry count");
        int k = 0;
        for (cplx e : entries) a_[(k / m) * 2 + k % m] = e, ++k;
        symmetrize();
    }

    static HermMatrix identity(int m) {
        HermMatrix r(m);
        for (int a = 0; a < m; ++a) r(a, a) = 1.0;
        return r;
    }
    static HermMatrix diag(std::initializer_list<double> d) {
        HermMatrix r(static_cast<int>(d.size()));
        int k = 0;
        for (double v : d) r(k, k) = v, ++k;
        return r;
    }
    template <class F>
    static HermMatrix from(int m, F&& entry) {
        HermMatrix r(m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) r(a, b) = entry(a, b);
        r.symmetrize();
        return r;
    }

    int dim() const { return m_; }
    cplx& operator()(int a, int b) { return a_[a * 2 + b]; }
    cplx operator()(int a, int b) const { return a_[a * 2 + b]; }

    /// Replace by the Hermitian part; returns the size of the correction.
    double symmetrize() {
        double corr = 0.0, scale = 0.0;
        for (int a = 0; a < m_; ++a)
            for (int b = a; b < m_; ++b) {
                const cplx avg = 0.5 * ((*this)(a, b) + std::conj((*this)(b, a)));
                corr = std::max(corr, std::abs(avg - (*this)(a, b)));
                scale = std::max(scale, std::abs(avg));
                (*this)(a, b) = avg;
                (*this)(b, a) = std::conj(avg);
            }
        if (corr > 1e-10 * std::max(1.0, scale)) {
            const long n = ++detail::hermitian_warning_count();
            if (n <= 3)
                std::clog << "kahler: warning: Hermitian symmetrization corrected " << corr << "\n";
        }
        return corr;
    }

    cplx det() const { return m_ == 1 ? a_[0] : a_[0] * a_[3] - a_[1] * a_[2]; }

    HermMatrix operator+(const HermMatrix& o) const { return combine(o, 1.0); }
    HermMatrix operator-(const HermMatrix& o) const { return combine(o, -1.0); }
    HermMatrix operator*(double s) const {
        HermMatrix r = *this;
        for (auto& v : r.a_) v *= s;
        return r;
    }

  private:
    static void check_dim(int m) {
        if (m < 1 || m > kMaxDim) throw ArgumentError("HermMatrix: dimension must be 1 or 2");
    }
    HermMatrix combine(const HermMatrix& o, double s) const {
        if (o.m_ != m_) throw ArgumentError("HermMatrix: dimension mismatch");
        HermMatrix r = *this;
        for (int i = 0; i < 4; ++i) r.a_[i] += s * o.a_[i];
        return r;
    }

    int m_ = 0;
    std::array<cplx, 4> a_{};
};

/// Components V_a of a (1,0) covector; V_abar is always conj(V_a).
struct Vec10 {
    int m = 0;
    std::array<cplx, kMaxDim> v{};

    cplx& operator[](int a) { return v[a]; }
    cplx operator[](int a) const { return v[a]; }
};

/// Components R_{a bbar c dbar}.
struct Tensor4 {
    int m = 0;
    std::array<cplx, 16> r{};

    cplx& operator()(int a, int b, int c, int d) { return r[((a * 2 + b) * 2 + c) * 2 + d]; }
    cplx operator()(int a, int b, int c, int d) const { return r[((a * 2 + b) * 2 + c) * 2 + d]; }
};

/// Inverse metric in the g^{a bbar} convention.
inline HermMatrix inverse_metric(const HermMatrix& g) {
    const cplx det = g.det();
    if (std::abs(det) < 1e-300) throw SingularMetricError("inverse_metric: singular metric");
    HermMatrix r(g.dim());
    if (g.dim() == 1) {
        r(0, 0) = 1.0 / g(0, 0);
    } else {
        // ginv = (G^T)^{-1}
        r(0, 0) = g(1, 1) / det;
        r(1, 1) = g(0, 0) / det;
        r(0, 1) = -g(1, 0) / det;
        r(1, 0) = -g(0, 1) / det;
    }
    return r;
}

/// sum g^{a bbar} A_{a bbar}.
inline double trace(const HermMatrix& A, const HermMatrix& ginv) {
    if (A.dim() != ginv.dim()) throw ArgumentError("trace: dimension mismatch");
    cplx s = 0.0;
    for (int a = 0; a < A.dim(); ++a)
        for (int b = 0; b < A.dim(); ++b) s += ginv(a, b) * A(a, b);
    return s.real();
}

/// Smallest lambda with det(A - lambda g) = 0, i.e. the g-relative floor of A.
inline double min_eigenvalue(const HermMatrix& A, const HermMatrix& g) {
    if (A.dim() != g.dim()) throw ArgumentError("min_eigenvalue: dimension mismatch");
    const double dg = g.det().real();
    if (!(std::abs(dg) > 1e-300) || g(0, 0).real() <= 0.0) throw SingularMetricError("min_eigenvalue: metric not positive definite");
    if (A.dim() == 1) return A(0, 0).real() / g(0, 0).real();
    const double qa = dg;
    const double qb = -(A(0, 0) * g(1, 1) + A(1, 1) * g(0, 0) - A(0, 1) * g(1, 0) - A(1, 0) * g(0, 1)).real();
    const double qc = A.det().real();
    const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
    const double sq = std::sqrt(disc);
    // numerically stable pair of roots
    const double q = -0.5 * (qb + std::copysign(sq, qb));
    double r1, r2;
    if (q == 0.0) {
        r1 = r2 = 0.0;
    } else {
        r1 = q / qa;
        r2 = qc / q;
    }
    return std::min(r1, r2);
}

/// Dense pointwise tensor with a barred/unbarred flag per lower index.
class PointTensor {
  public:
    PointTensor() = default;
    PointTensor(int m, std::vector<bool> barred) : m_(m), barred_(std::move(barred)) {
        int n = 1;
        for (size_t k = 0; k < barred_.size(); ++k) n *= m_;
        v_.assign(n, cplx{});
    }

    int dim() const { return m_; }
    int rank() const { return static_cast<int>(barred_.size()); }
    const std::vector<bool>& barred() const { return barred_; }
    int size() const { return static_cast<int>(v_.size()); }

    cplx& flat(int i) { return v_[i]; }
    cplx flat(int i) const { return v_[i]; }

    template <class... I>
    cplx& operator()(I... idx) { return v_[offset({static_cast<int>(idx)...})]; }
    template <class... I>
    cplx operator()(I... idx) const { return v_[offset({static_cast<int>(idx)...})]; }

    int offset(std::initializer_list<int> idx) const {
        int o = 0;
        for (int i : idx) o = o * m_ + i;
        return o;
    }

    double norm2() const {
        double s = 0.0;
        for (auto& x : v_) s += std::norm(x);
        return s;
    }

    HermMatrix as_matrix() const {
        if (rank() != 2) throw ArgumentError("PointTensor::as_matrix: rank must be 2");
        return HermMatrix::from(m_, [&](int a, int b) { return (*this)(a, b); });
    }

  private:
    int m_ = 0;
    std::vector<bool> barred_;
    std::vector<cplx> v_;
};

/// Unitary frame at a point: components in it see g = identity.
class Frame {
  public:
    Frame() = default;
    explicit Frame(const HermMatrix& g) : m_(g.dim()) {
        // g = L L^*, E = L^{-1}
        const double l00 = std::sqrt(g(0, 0).real());
        if (!(l00 > 0.0)) throw SingularMetricError("Frame: metric not positive definite");
        if (m_ == 1) {
            e_[0] = 1.0 / l00;
            return;
        }
        const cplx l10 = g(1, 0) / l00;
        const double s = g(1, 1).real() - std::norm(l10);
        if (!(s > 0.0)) throw SingularMetricError("Frame: metric not positive definite");
        const double l11 = std::sqrt(s);
        e_[0] = 1.0 / l00;
        e_[1] = 0.0;
        e_[3] = 1.0 / l11;
        e_[2] = -l10 / (l00 * l11);
    }

    int dim() const { return m_; }
    /// E(a, i): components of frame vector a.
    cplx E(int a, int i) const { return e_[a * 2 + i]; }

    PointTensor apply(const PointTensor& t) const {
        if (t.dim() != m_) throw ArgumentError("Frame::apply: dimension mismatch");
        PointTensor cur = t;
        const int rank = t.rank();
        for (int slot = 0; slot < rank; ++slot) {
            PointTensor next(m_, t.barred());
            int stride = 1;
            for (int k = slot + 1; k < rank; ++k) stride *= m_;
            for (int i = 0; i < cur.size(); ++i) {
                const int idx = (i / stride) % m_;
                const int base = i - idx * stride;
                for (int a = 0; a < m_; ++a) {
                    const cplx c = t.barred()[slot] ? std::conj(E(a, idx)) : E(a, idx);
                    next.flat(base + a * stride) += c * cur.flat(i);
                }
            }
            cur = std::move(next);
        }
        return cur;
    }

  private:
    int m_ = 0;
    std::array<cplx, 4> e_{};
};

/// Frame-component values of an h-jet at a point.
///
/// d(c,a,b) = nabla_c h_{a bbar}, db(c,a,b) = nabla_cbar h_{a bbar};
/// the second-order arrays put the outer derivative first: dd(d,c,a,b) =
/// nabla_d nabla_c h, ddb(d,c,a,b) = nabla_d nabla_cbar h, dbd(d,c,a,b) =
/// nabla_dbar nabla_c h, dbdb(d,c,a,b) = nabla_dbar nabla_cbar h.
struct HJet {
    PointTensor h, d, db, dd, ddb, dbd, dbdb;
};

struct Norms {
    double Phi = 0.0, Psi = 0.0, Lambda = 0.0;
};

/// Phi = |h|^2, Psi = |nabla h|^2, Lambda = |nabla nabla h|^2 from frame values.
inline Norms tensor_norms(const HJet& j) {
    Norms n;
    n.Phi = j.h.norm2();
    n.Psi = j.d.norm2() + j.db.norm2();
    n.Lambda = j.dd.norm2() + j.ddb.norm2();
    return n;
}

struct GradientNorms {
    double grad_Phi = 0.0;  // sum_a |d_a Phi|^2
    double grad_Psi = 0.0;  // sum_a |d_a Psi|^2
};

/// |grad Phi|^2 and |grad Psi|^2 from frame values (needs all four second-derivative arrays).
inline GradientNorms gradient_norms(const HJet& j) {
    const int m = j.h.dim();
    GradientNorms g;
    for (int a = 0; a < m; ++a) {
        cplx phi_a = 0.0, psi_a = 0.0;
        for (int x = 0; x < m; ++x)
            for (int y = 0; y < m; ++y) {
                phi_a += j.d(a, x, y) * std::conj(j.h(x, y)) + j.h(x, y) * std::conj(j.db(a, x, y));
                for (int c = 0; c < m; ++c)
                    psi_a += j.dd(a, c, x, y) * std::conj(j.d(c, x, y)) + j.d(c, x, y) * std::conj(j.dbd(a, c, x, y)) +
                             j.ddb(a, c, x, y) * std::conj(j.db(c, x, y)) + j.db(c, x, y) * std::conj(j.dbdb(a, c, x, y));
            }
        g.grad_Phi += std::norm(phi_a);
        g.grad_Psi += std::norm(psi_a);
    }
    return g;
}

}  // namespace kahler
