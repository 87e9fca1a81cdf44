#pragma once

/**
 * @file models.hpp
 * @brief Closed-form Kähler geometries and their exact Kähler-Ricci flows.
 *
 *   flat           g = identity on C^m
 *   fubini-study   g = (1 - (m+1) t) dd̄ log(1 + |z|^2) on an affine chart of CP^m
 *   cigar          g_{11̄} = 1 / (e^t + |z|^2)
 *   radial-profile g_{11̄} = exp(u0(|z|)), spline in s = |z|^2, time 0 only
 */

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/geometry.hpp"
#include "kahler/jet.hpp"
#include "kahler/tensor_point.hpp"

namespace kahler {

using Point = std::vector<cplx>;

/// Conformal factor sampled as (r, u0(r)) and interpolated as a natural cubic spline in s = r^2.
class RadialProfile {
  public:
    RadialProfile(std::vector<double> r, std::vector<double> u0) : r_(std::move(r)), u_(std::move(u0)) {
        if (r_.size() != u_.size() || r_.size() < 3) throw ParseError("radial profile: need at least 3 samples");
        if (r_[0] != 0.0) throw ParseError("radial profile: first radius must be 0");
        for (size_t i = 1; i < r_.size(); ++i)
            if (!(r_[i] > r_[i - 1])) throw ParseError("radial profile: radii must be strictly increasing");
        for (double r : r_) s_.push_back(r * r);
        gsl_set_error_handler_off();
        spline_.reset(gsl_spline_alloc(gsl_interp_cspline, s_.size()));
        if (gsl_spline_init(spline_.get(), s_.data(), u_.data(), s_.size()) != GSL_SUCCESS)
            throw ParseError("radial profile: spline construction failed");
        acc_.reset(gsl_interp_accel_alloc());
    }

    /// Plain text, two whitespace-separated columns per line; '#' starts a comment.
    static std::shared_ptr<const RadialProfile> load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ParseError("radial profile: cannot open " + path);
        std::vector<double> r, u;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto p = line.find('#'); p != std::string::npos) line.resize(p);
            std::istringstream ls(line);
            double a, b;
            if (!(ls >> a)) continue;
            std::string rest;
            if (!(ls >> b) || (ls >> rest)) throw ParseError("radial profile: bad line " + std::to_string(lineno));
            r.push_back(a);
            u.push_back(b);
        }
        return std::make_shared<const RadialProfile>(std::move(r), std::move(u));
    }

    double max_radius() const { return r_.back(); }
    const std::vector<double>& radii() const { return r_; }
    const std::vector<double>& values() const { return u_; }

    /// Taylor coefficients of U(s) around s0 (cubic, exact on each spline piece).
    std::vector<cplx> taylor(double s0, int order) const {
        if (s0 < 0.0 || s0 > s_.back()) throw OutOfDomainError("radial profile: radius outside sampled range");
        std::vector<cplx> t(order + 1, 0.0);
        t[0] = gsl_spline_eval(spline_.get(), s0, acc_.get());
        if (order >= 1) t[1] = gsl_spline_eval_deriv(spline_.get(), s0, acc_.get());
        if (order >= 2) t[2] = 0.5 * gsl_spline_eval_deriv2(spline_.get(), s0, acc_.get());
        if (order >= 3) {
            size_t i = gsl_interp_bsearch(s_.data(), s0, 0, s_.size() - 1);
            if (i + 1 >= s_.size()) i = s_.size() - 2;
            const double d2a = gsl_spline_eval_deriv2(spline_.get(), s_[i], acc_.get());
            const double d2b = gsl_spline_eval_deriv2(spline_.get(), s_[i + 1], acc_.get());
            t[3] = (d2b - d2a) / (s_[i + 1] - s_[i]) / 6.0;
        }
        return t;
    }

  private:
    struct SplineFree {
        void operator()(gsl_spline* p) const { gsl_spline_free(p); }
    };
    struct AccelFree {
        void operator()(gsl_interp_accel* p) const { gsl_interp_accel_free(p); }
    };
    std::vector<double> r_, u_, s_;
    std::unique_ptr<gsl_spline, SplineFree> spline_;
    std::unique_ptr<gsl_interp_accel, AccelFree> acc_;
};

enum class ModelKind { flat, fubini_study, cigar, radial_profile };

struct ModelSpec {
    ModelKind kind = ModelKind::flat;
    int m = 1;
    std::shared_ptr<const RadialProfile> profile;

    static ModelSpec flat(int m = 1) { return {ModelKind::flat, m, nullptr}; }
    static ModelSpec fubini_study(int m = 1) { return {ModelKind::fubini_study, m, nullptr}; }
    static ModelSpec cigar() { return {ModelKind::cigar, 1, nullptr}; }
    static ModelSpec radial(std::shared_ptr<const RadialProfile> p) { return {ModelKind::radial_profile, 1, std::move(p)}; }

    std::string name() const {
        switch (kind) {
            case ModelKind::flat: return "flat";
            case ModelKind::fubini_study: return "fubini-study";
            case ModelKind::cigar: return "cigar";
            case ModelKind::radial_profile: return "radial-profile";
        }
        return "?";
    }
};

inline ModelSpec parse_model(const std::string& name, int m) {
    if (m < 1 || m > kMaxDim) throw ParseError("model dimension must be 1 or 2");
    if (name == "flat") return ModelSpec::flat(m);
    if (name == "fubini-study" || name == "cp1" || name == "cp2") return ModelSpec::fubini_study(m);
    if (name == "cigar") {
        if (m != 1) throw ParseError("cigar is a surface (m = 1)");
        return ModelSpec::cigar();
    }
    throw ParseError("unknown model '" + name + "'");
}

/// Supremum of the model's time window (exclusive for fubini-study).
inline double time_window(const ModelSpec& s) {
    switch (s.kind) {
        case ModelKind::fubini_study: return 1.0 / (s.m + 1.0);
        case ModelKind::radial_profile: return 0.0;
        default: return std::numeric_limits<double>::infinity();
    }
}

inline void check_time(const ModelSpec& s, double t) {
    if (!(t >= 0.0)) throw DomainError("model time must be >= 0");
    if (s.kind == ModelKind::radial_profile && t != 0.0)
        throw DomainError("radial-profile has no closed-form flow; only t = 0 is available");
    if (s.kind == ModelKind::fubini_study && !(t < time_window(s)))
        throw DomainError("fubini-study flow is only defined for t < 1/(m+1)");
}

inline void check_point(const ModelSpec& s, const Point& z) {
    if (static_cast<int>(z.size()) != s.m) throw ArgumentError("point dimension does not match model");
}

namespace detail {
inline Jet modulus2_jet(int m, int order, const Point& z) {
    Jet s(m, order);
    for (int a = 0; a < m; ++a)
        s += Jet::coordinate(m, order, a, z[a], false) * Jet::coordinate(m, order, a, z[a], true);
    return s;
}
}  // namespace detail

/// Jet of g_{a bbar}(., t) at z, of the requested order.
inline TensorJet metric_jet(const ModelSpec& s, const Point& z, double t, int order) {
    check_point(s, z);
    check_time(s, t);
    const int m = s.m;
    TensorJet g(m, {false, true}, order);
    switch (s.kind) {
        case ModelKind::flat:
            for (int a = 0; a < m; ++a) g(a, a) = Jet(m, order, 1.0);
            break;
        case ModelKind::fubini_study: {
            if (order + 2 > kMaxJetOrder) throw ArgumentError("metric_jet: order too high");
            Jet phi = (1.0 - (m + 1.0) * t) * log(detail::modulus2_jet(m, order + 2, z) + 1.0);
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) g(a, b) = phi.dz(a).dzbar(b);
            break;
        }
        case ModelKind::cigar:
            g(0, 0) = reciprocal(detail::modulus2_jet(1, order, z) + std::exp(t));
            break;
        case ModelKind::radial_profile: {
            Jet r2 = detail::modulus2_jet(1, order, z);
            g(0, 0) = exp(r2.compose(s.profile->taylor(r2.value().real(), order)));
            break;
        }
    }
    return g;
}

inline HermMatrix exact_flow_metric(const ModelSpec& s, const Point& z, double t) {
    return metric_jet(s, z, t, 0).value().as_matrix();
}

/// g_{11̄}(r^2, t) for the m = 1 models, without jets.
inline double conformal_factor(const ModelSpec& s, double r2, double t) {
    if (s.m != 1) throw ArgumentError("conformal_factor: m = 1 models only");
    check_time(s, t);
    switch (s.kind) {
        case ModelKind::flat: return 1.0;
        case ModelKind::fubini_study: return (1.0 - 2.0 * t) / ((1.0 + r2) * (1.0 + r2));
        case ModelKind::cigar: return 1.0 / (std::exp(t) + r2);
        case ModelKind::radial_profile: return std::exp(s.profile->taylor(r2, 0)[0].real());
    }
    return 1.0;
}

/// Exact R_{11̄}(r^2, t) for flat, fubini-study and cigar (m = 1).
inline double exact_ricci(const ModelSpec& s, double r2, double t) {
    if (s.m != 1) throw ArgumentError("exact_ricci: m = 1 models only");
    switch (s.kind) {
        case ModelKind::flat: return 0.0;
        case ModelKind::fubini_study: return 2.0 / ((1.0 + r2) * (1.0 + r2));
        case ModelKind::cigar: {
            const double b = std::exp(t);
            return b / ((b + r2) * (b + r2));
        }
        default: throw ArgumentError("exact_ricci: no closed form for this model");
    }
}

/// u = (pi t)^{-m} exp(-|z|^2 / t), the flat heat kernel under the complex Laplacian.
inline double heat_kernel_value(int m, double r2, double t) {
    if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0");
    return std::pow(std::numbers::pi * t, -m) * std::exp(-r2 / t);
}

/// Jet of h = u g on flat C^m.
inline TensorJet heat_kernel_jet(int m, const Point& z, double t, int order) {
    if (!(t > 0.0)) throw DomainError("heat kernel requires t > 0");
    if (static_cast<int>(z.size()) != m) throw ArgumentError("heat_kernel_jet: point dimension mismatch");
    Jet u = std::pow(std::numbers::pi * t, -m) * exp(detail::modulus2_jet(m, order, z) * (-1.0 / t));
    TensorJet h(m, {false, true}, order);
    for (int a = 0; a < m; ++a) h(a, a) = u;
    return h;
}

inline HermMatrix heat_kernel_h(const Point& z, double t) {
    return heat_kernel_jet(static_cast<int>(z.size()), z, t, 0).value().as_matrix();
}

/// g(0)-distance from the origin as a function of r = |z|, with its first two r-derivatives.
struct RadialDistance {
    double r0 = 0.0, d1 = 0.0, d2 = 0.0;
};

inline RadialDistance radial_distance(const ModelSpec& s, double r) {
    switch (s.kind) {
        case ModelKind::flat: return {r, 1.0, 0.0};
        case ModelKind::cigar: {
            const double q = std::sqrt(1.0 + r * r);
            return {std::asinh(r), 1.0 / q, -r / (q * q * q)};
        }
        case ModelKind::fubini_study: {
            const double q = 1.0 + r * r;
            return {std::atan(r), 1.0 / q, -2.0 * r / (q * q)};
        }
        default: throw ArgumentError("radial_distance: no closed form for this model");
    }
}

/// f = sqrt(1 + r0^2) and the pieces of its complex Laplacian on an m = 1 radial model.
struct BarrierProfile {
    double f = 1.0;
    double lap_flat = 0.0;   // dd̄ f = (f'' + f'/r) / 4
    double grad_flat = 0.0;  // |d f|^2 = f'^2 / 4
};

inline BarrierProfile barrier_profile(const ModelSpec& s, double r) {
    const RadialDistance d = radial_distance(s, r);
    BarrierProfile b;
    b.f = std::sqrt(1.0 + d.r0 * d.r0);
    const double f1 = d.r0 * d.d1 / b.f;
    const double f2 = (d.d1 * d.d1 + d.r0 * d.d2) / b.f - d.r0 * d.r0 * d.d1 * d.d1 / (b.f * b.f * b.f);
    // f'(r)/r -> f''(0) at the origin
    const double f1_over_r = r > 1e-8 ? f1 / r : f2;
    b.lap_flat = 0.25 * (f2 + f1_over_r);
    b.grad_flat = 0.25 * f1 * f1;
    return b;
}

/// phi = exp(A t + alpha f(x)).
inline double barrier_phi(const ModelSpec& s, const Point& z, double t, double A, double alpha) {
    check_point(s, z);
    double r2 = 0.0;
    for (auto c : z) r2 += std::norm(c);
    return std::exp(A * t + alpha * barrier_profile(s, std::sqrt(r2)).f);
}

/// Minimum of the scalar curvature of a radial profile over its sampled disk.
inline double profile_min_curvature(const ModelSpec& s, int samples = 64) {
    double lo = std::numeric_limits<double>::infinity();
    const double R = s.profile->max_radius();
    for (int i = 0; i <= samples; ++i) {
        const double r = R * i / samples * 0.999;
        Geometry geo(metric_jet(s, {cplx(r, 0.0)}, 0.0, 2));
        lo = std::min(lo, curvature(geo).scalar.value().real());
    }
    return lo;
}

}  // namespace kahler
