#pragma once

/**
 * @file jet.hpp
 * @brief Truncated multivariate Taylor series in Wirtinger variables.
 *
 * A Jet holds the Taylor coefficients of a smooth complex function around a
 * base point of a chart on C^m, written in the independent variables
 * (w_1..w_m, wbar_1..wbar_m) with w = z - z0.  Differentiation in w_a is
 * the Wirtinger derivative d/dz_a and in wbar_a it is d/dzbar_a, so every
 * covariant expression built from jets carries exact derivatives up to the
 * truncation order.
 */

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "kahler/errors.hpp"

namespace kahler {

using cplx = std::complex<double>;

inline constexpr int kMaxJetOrder = 8;
inline constexpr int kMaxDim = 2;

/// Graded monomial layout shared by every jet with the same number of variables.
///
/// Monomials are sorted by total degree, so the order-k truncation of a jet is
/// a prefix of its coefficient array.
class MonomialTable {
  public:
    static const MonomialTable& get(int nvars) {
        static std::once_flag flags[2 * kMaxDim + 1];
        static std::unique_ptr<MonomialTable> tables[2 * kMaxDim + 1];
        if (nvars < 1 || nvars > 2 * kMaxDim)
            throw ArgumentError("MonomialTable: unsupported variable count");
        std::call_once(flags[nvars], [nvars] { tables[nvars].reset(new MonomialTable(nvars)); });
        return *tables[nvars];
    }

    int nvars() const { return nvars_; }
    int size() const { return static_cast<int>(exps_.size()); }
    /// Number of monomials of total degree <= k.
    int count(int k) const { return k < 0 ? 0 : count_[k]; }
    int degree(int i) const { return degree_[i]; }
    const std::array<int, 2 * kMaxDim>& exponents(int i) const { return exps_[i]; }
    int product(int i, int j) const { return product_[static_cast<size_t>(i) * size() + j]; }
    /// Index of d/dvar of monomial i, or -1 if the exponent of var is zero.
    int deriv_target(int var, int i) const { return deriv_[var][i]; }
    /// Index of the monomial with holomorphic and antiholomorphic exponents swapped.
    int conj_index(int i) const { return conj_[i]; }

    int index_of(const std::array<int, 2 * kMaxDim>& e) const {
        int key = 0;
        for (int v = 0; v < 2 * kMaxDim; ++v) {
            if (e[v] < 0 || e[v] > kMaxJetOrder) return -1;
            key = key * (kMaxJetOrder + 1) + e[v];
        }
        return lookup_[key];
    }

  private:
    explicit MonomialTable(int nvars) : nvars_(nvars) {
        int keys = 1;
        for (int v = 0; v < 2 * kMaxDim; ++v) keys *= kMaxJetOrder + 1;
        lookup_.assign(keys, -1);
        for (int d = 0; d <= kMaxJetOrder; ++d) {
            std::array<int, 2 * kMaxDim> e{};
            enumerate(d, 0, e);
            count_.push_back(static_cast<int>(exps_.size()));
        }
        const int n = size();
        product_.assign(static_cast<size_t>(n) * n, -1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (degree_[i] + degree_[j] > kMaxJetOrder) continue;
                std::array<int, 2 * kMaxDim> e{};
                for (int v = 0; v < nvars_; ++v) e[v] = exps_[i][v] + exps_[j][v];
                product_[static_cast<size_t>(i) * n + j] = index_of(e);
            }
        deriv_.assign(nvars_, std::vector<int>(n, -1));
        for (int v = 0; v < nvars_; ++v)
            for (int i = 0; i < n; ++i) {
                if (exps_[i][v] == 0) continue;
                auto e = exps_[i];
                --e[v];
                deriv_[v][i] = index_of(e);
            }
        conj_.resize(n);
        const int m = nvars_ / 2;
        for (int i = 0; i < n; ++i) {
            auto e = exps_[i];
            for (int a = 0; a < m; ++a) std::swap(e[a], e[m + a]);
            conj_[i] = index_of(e);
        }
    }

    void enumerate(int remaining, int var, std::array<int, 2 * kMaxDim>& e) {
        if (var == nvars_ - 1) {
            e[var] = remaining;
            int key = 0;
            for (int v = 0; v < 2 * kMaxDim; ++v) key = key * (kMaxJetOrder + 1) + e[v];
            lookup_[key] = static_cast<int>(exps_.size());
            exps_.push_back(e);
            int d = 0;
            for (int v = 0; v < nvars_; ++v) d += e[v];
            degree_.push_back(d);
            e[var] = 0;
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            e[var] = k;
            enumerate(remaining - k, var + 1, e);
        }
        e[var] = 0;
    }

    int nvars_;
    std::vector<std::array<int, 2 * kMaxDim>> exps_;
    std::vector<int> degree_;
    std::vector<int> count_;
    std::vector<int> product_;
    std::vector<std::vector<int>> deriv_;
    std::vector<int> conj_;
    std::vector<int> lookup_;
};

class Jet {
  public:
    Jet() = default;

    /// Constant jet for a chart of complex dimension m.
    Jet(int m, int order, cplx value = 0.0) : m_(m), order_(order) {
        check_order(order);
        c_.assign(table().count(order), cplx{});
        c_[0] = value;
    }

    /// The coordinate z_a (conjugate=false) or zbar_a around base value z0_a.
    static Jet coordinate(int m, int order, int a, cplx z0_a, bool conjugate) {
        Jet j(m, order, conjugate ? std::conj(z0_a) : z0_a);
        if (order >= 1) {
            std::array<int, 2 * kMaxDim> e{};
            e[conjugate ? m + a : a] = 1;
            j.c_[j.table().index_of(e)] = 1.0;
        }
        return j;
    }

    int dim() const { return m_; }
    int order() const { return order_; }
    int nvars() const { return 2 * m_; }
    bool empty() const { return c_.empty(); }
    const MonomialTable& table() const { return MonomialTable::get(2 * m_); }

    cplx value() const { return c_.at(0); }
    const std::vector<cplx>& coefficients() const { return c_; }
    cplx& coeff(int i) { return c_[i]; }
    cplx coeff(int i) const { return c_[i]; }

    /// Taylor coefficient of w^a wbar^b for the exponent vector e.
    cplx coeff(const std::array<int, 2 * kMaxDim>& e) const {
        const int i = table().index_of(e);
        return (i < 0 || i >= static_cast<int>(c_.size())) ? cplx{} : c_[i];
    }

    /// Mixed Wirtinger partial derivative at the base point.
    cplx partial(const std::array<int, 2 * kMaxDim>& e) const {
        double fact = 1.0;
        for (int v = 0; v < nvars(); ++v)
            for (int k = 2; k <= e[v]; ++k) fact *= k;
        return coeff(e) * fact;
    }

    Jet truncated(int order) const {
        if (order > order_) throw ArgumentError("Jet::truncated: cannot raise order");
        Jet r;
        r.m_ = m_;
        r.order_ = order;
        r.c_.assign(c_.begin(), c_.begin() + table().count(order));
        return r;
    }

    /// d/dw_var (var < m) or d/dwbar_{var-m}; the result has order one less.
    Jet d(int var) const {
        if (order_ < 1) throw ArgumentError("Jet::d: order-zero jet has no derivative");
        const auto& t = table();
        Jet r(m_, order_ - 1);
        const int n = t.count(order_);
        for (int i = 0; i < n; ++i) {
            const int target = t.deriv_target(var, i);
            if (target < 0) continue;
            r.c_[target] += c_[i] * static_cast<double>(t.exponents(i)[var]);
        }
        return r;
    }
    Jet dz(int a) const { return d(a); }
    Jet dzbar(int a) const { return d(m_ + a); }

    /// Jet of the complex-conjugate function.
    Jet conj() const {
        const auto& t = table();
        Jet r(m_, order_);
        for (size_t i = 0; i < c_.size(); ++i) r.c_[t.conj_index(static_cast<int>(i))] = std::conj(c_[i]);
        return r;
    }

    Jet& operator+=(const Jet& o) {
        align(o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        align(o);
        for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator*=(cplx s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    Jet& operator+=(cplx s) {
        c_[0] += s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(Jet a, cplx s) { return a *= s; }
    friend Jet operator*(cplx s, Jet a) { return a *= s; }
    friend Jet operator*(Jet a, double s) { return a *= cplx(s); }
    friend Jet operator*(double s, Jet a) { return a *= cplx(s); }
    friend Jet operator+(Jet a, cplx s) { return a += s; }
    friend Jet operator-(Jet a, cplx s) { return a += -s; }
    friend Jet operator+(Jet a, double s) { return a += cplx(s); }
    friend Jet operator-(Jet a, double s) { return a += cplx(-s); }
    friend Jet operator-(const Jet& a) { return a * -1.0; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        if (a.m_ != b.m_) throw ArgumentError("Jet product: dimension mismatch");
        const int K = std::min(a.order_, b.order_);
        const auto& t = a.table();
        Jet r(a.m_, K);
        const int n = t.count(K);
        for (int i = 0; i < n; ++i) {
            const cplx ai = a.c_[i];
            if (ai == cplx{}) continue;
            const int nj = t.count(K - t.degree(i));
            for (int j = 0; j < nj; ++j) r.c_[t.product(i, j)] += ai * b.c_[j];
        }
        return r;
    }
    Jet& operator*=(const Jet& o) { return *this = *this * o; }

    /// f(jet) for f given by its Taylor coefficients around value().
    Jet compose(const std::vector<cplx>& taylor) const {
        Jet delta = *this;
        delta.c_[0] = 0.0;
        Jet r(m_, order_, taylor.at(order_));
        for (int k = order_ - 1; k >= 0; --k) {
            r = r * delta;
            r.c_[0] += taylor.at(k);
        }
        return r;
    }

  private:
    static void check_order(int order) {
        if (order < 0 || order > kMaxJetOrder) throw ArgumentError("Jet: order out of range");
    }
    void align(const Jet& o) {
        if (c_.empty()) {
            *this = Jet(o.m_, o.order_);
        }
        if (o.m_ != m_) throw ArgumentError("Jet: dimension mismatch");
        // a higher-order operand is read through its prefix
        if (o.order_ < order_) *this = truncated(o.order_);
    }

    int m_ = 0;
    int order_ = 0;
    std::vector<cplx> c_;
};

// Elementary functions by univariate Taylor composition.

inline Jet reciprocal(const Jet& x) {
    const cplx a = x.value();
    if (a == cplx{}) throw SingularMetricError("reciprocal of a jet with zero value");
    std::vector<cplx> t(x.order() + 1);
    cplx p = 1.0 / a;
    for (int k = 0; k <= x.order(); ++k) {
        t[k] = p;
        p *= -1.0 / a;
    }
    return x.compose(t);
}

inline Jet log(const Jet& x) {
    const cplx a = x.value();
    std::vector<cplx> t(x.order() + 1);
    t[0] = std::log(a);
    cplx p = 1.0;
    for (int k = 1; k <= x.order(); ++k) {
        p /= a;
        t[k] = ((k % 2) ? 1.0 : -1.0) * p / static_cast<double>(k);
    }
    return x.compose(t);
}

inline Jet exp(const Jet& x) {
    const cplx e = std::exp(x.value());
    std::vector<cplx> t(x.order() + 1);
    double fact = 1.0;
    for (int k = 0; k <= x.order(); ++k) {
        if (k > 0) fact *= k;
        t[k] = e / fact;
    }
    return x.compose(t);
}

/// x^p for real p (principal branch).
inline Jet pow(const Jet& x, double p) {
    const cplx a = x.value();
    std::vector<cplx> t(x.order() + 1);
    cplx binom = 1.0;
    for (int k = 0; k <= x.order(); ++k) {
        t[k] = binom * std::pow(a, p - k);
        binom *= (p - k) / static_cast<double>(k + 1);
    }
    return x.compose(t);
}

inline Jet sqrt(const Jet& x) { return pow(x, 0.5); }

/// Real part of a complex function: (f + conj f) / 2.
inline Jet real_part(const Jet& x) { return 0.5 * (x + x.conj()); }

/// d/dx and d/dy of the a-th complex coordinate z_a = x_a + i y_a.
inline Jet d_real_x(const Jet& f, int a) { return f.dz(a) + f.dzbar(a); }
inline Jet d_real_y(const Jet& f, int a) { return cplx(0, 1) * (f.dz(a) - f.dzbar(a)); }

}  // namespace kahler
