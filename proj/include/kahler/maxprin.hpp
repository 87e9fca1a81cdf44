#pragma once

/**
 * @file maxprin.hpp
 * @brief Sign propagation for the scalar heat equation on an evolving m = 1
 * metric, and the exp(At + alpha f) barrier.
 *
 * Truncated disks stand in for complete manifolds: boundary values are pinned
 * (to f0 or to a supplied exact solution), so the growth hypothesis is vacuous
 * and what is checked is interior sign propagation.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/flow.hpp"
#include "kahler/models.hpp"

namespace kahler {

enum class InitialProfile { zero, negative_gaussian, clipped_cosine };

inline std::string initial_profile_name(InitialProfile p) {
    switch (p) {
        case InitialProfile::zero: return "zero";
        case InitialProfile::negative_gaussian: return "neg-gaussian";
        case InitialProfile::clipped_cosine: return "clipped-cosine";
    }
    return "?";
}

inline InitialProfile parse_initial_profile(const std::string& s) {
    for (auto p : {InitialProfile::zero, InitialProfile::negative_gaussian, InitialProfile::clipped_cosine})
        if (initial_profile_name(p) == s) return p;
    throw ParseError("unknown initial profile '" + s + "'");
}

struct HeatTestCase {
    ModelSpec model = ModelSpec::flat(1);
    double radius = 4.0;
    int N = 64;
    double T = 0.5;
    InitialProfile profile = InitialProfile::negative_gaussian;
    double rho = 0.0;   // subsolution source -rho ReLU(-f)
    double a = 1.0;     // weight e^{-a r0^2} of the growth certificate
    double kappa = 0.2;
    /// Overrides the profile; must be <= 0.
    std::function<double(cplx)> f0;
    /// Exact solution used for boundary data and error reporting.
    std::function<double(cplx, double)> exact;
};

struct MaxPrincipleVerdict {
    bool pass = false;
    double sup_f = 0.0;           // over all nodes and recorded times
    double sup_abs_f0 = 0.0;
    double tol = 0.0;
    double growth_integral = 0.0; // int int e^{-a r0^2} f_+^2 dV dt
    double max_error = std::numeric_limits<double>::quiet_NaN();  // against `exact`, interior
    long steps = 0;
};

namespace detail {

inline double initial_value(const HeatTestCase& c, cplx z) {
    if (c.f0) return c.f0(z);
    switch (c.profile) {
        case InitialProfile::zero: return 0.0;
        case InitialProfile::negative_gaussian: return -std::exp(-std::norm(z));
        case InitialProfile::clipped_cosine: return std::min(0.0, -1.0 + 0.5 * std::cos(z.real()));
    }
    return 0.0;
}

}  // namespace detail

/// The flat solution from -exp(-|z|^2): -(1+t)^{-1} exp(-|z|^2 / (1+t)).
inline double negative_gaussian_solution(cplx z, double t) { return -std::exp(-std::norm(z) / (1.0 + t)) / (1.0 + t); }

/// Evolves (d/dt - Delta_{g(t)}) f = -rho ReLU(-f) on the exact background by RK4.
inline MaxPrincipleVerdict run_max_principle(const HeatTestCase& c) {
    if (c.model.m != 1) throw ArgumentError("run_max_principle: m = 1 models only");
    if (!(c.rho >= 0.0)) throw ArgumentError("run_max_principle: rho must be >= 0");
    if (!(c.a > 0.0)) throw ArgumentError("run_max_principle: a must be positive");
    if (!(c.T >= 0.0) || !(c.T < time_window(c.model))) throw DomainError("run_max_principle: T outside the model's time window");
    if (!(c.kappa > 0.0) || c.kappa > 0.25) throw StepSizeError("run_max_principle: kappa must lie in (0, 1/4]");
    const Grid G(c.radius, c.N);
    const int n = G.n();
    const double dx = G.dx();
    const double cc = 0.25 / (dx * dx);

    std::vector<double> f(G.size(), 0.0), weight(G.size(), 0.0);
    MaxPrincipleVerdict v;
    for (int k = 0; k < G.size(); ++k) {
        f[k] = detail::initial_value(c, G.z(k));
        if (f[k] > 0.0) throw ArgumentError("run_max_principle: f0 must be <= 0");
        v.sup_abs_f0 = std::max(v.sup_abs_f0, std::abs(f[k]));
        const double r0 = radial_distance(c.model, std::sqrt(G.r2(k))).r0;
        weight[k] = std::exp(-c.a * r0 * r0);
    }
    v.sup_f = -std::numeric_limits<double>::infinity();
    for (int k : G.active_nodes()) v.sup_f = std::max(v.sup_f, f[k]);

    std::vector<double> F(G.size()), K(G.size(), 0.0), acc(G.size());
    auto boundary = [&](std::vector<double>& x, double t) {
        if (!c.exact) return;
        for (int k : G.ring()) x[k] = c.exact(G.z(k), t);
    };
    boundary(f, 0.0);
    F = f;
    auto growth_at = [&](double t) {
        const ExactFactor g(c.model, t);
        double s = 0.0;
        for (int k : G.active_nodes())
            if (f[k] > 0.0) s += weight[k] * f[k] * f[k] * g.value(G.r2(k)) * dx * dx;
        return s;
    };

    double t = 0.0;
    double last_growth = growth_at(0.0);
    static constexpr double ra[4] = {0.0, 0.5, 0.5, 1.0};
    static constexpr double rb[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
    while (t < c.T - 1e-13) {
        double inf_g = std::numeric_limits<double>::infinity();
        {
            const ExactFactor g(c.model, t);
            for (int k : G.active_nodes()) inf_g = std::min(inf_g, g.value(G.r2(k)));
        }
        const double dt = std::min(c.kappa * dx * dx * inf_g, c.T - t);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int st = 0; st < 4; ++st) {
            const double ts = t + ra[st] * dt;
            for (int k : G.active_nodes()) F[k] = f[k] + ra[st] * dt * K[k];
            boundary(F, ts);
            const ExactFactor g(c.model, ts);
            for (int k : G.active_nodes()) {
                const double lap = F[k - 1] + F[k + 1] + F[k - n] + F[k + n] - 4.0 * F[k];
                K[k] = cc * g.inverse(G.r2(k)) * lap + c.rho * std::min(F[k], 0.0);
                acc[k] += rb[st] * K[k];
            }
        }
        for (int k : G.active_nodes()) f[k] += dt * acc[k];
        t += dt;
        boundary(f, t);
        ++v.steps;
        for (int k : G.active_nodes()) {
            if (!std::isfinite(f[k])) throw DegenerateMetricError("run_max_principle: non-finite values");
            v.sup_f = std::max(v.sup_f, f[k]);
        }
        const double gr = growth_at(t);
        v.growth_integral += 0.5 * (gr + last_growth) * dt;
        last_growth = gr;
    }
    if (c.exact) {
        v.max_error = 0.0;
        for (int k : G.interior(3.0 * dx)) v.max_error = std::max(v.max_error, std::abs(f[k] - c.exact(G.z(k), t)));
    }
    v.tol = 1e-10 * (1.0 + v.sup_abs_f0);
    v.pass = v.sup_f <= v.tol;
    return v;
}

struct BarrierResult {
    bool found = false;
    double A = 0.0, alpha = 1.0, C = 0.0;
    double margin = -std::numeric_limits<double>::infinity();  // min [(d/dt - Delta) phi - C phi] / phi
    double a_lower = 0.0, b_upper = 0.0;
    bool sandwich = false;
    double sup_grad_f = 0.0, sup_hess_f = 0.0;  // |nabla f|, |dd̄ f| in g(t)
    int tried = 0;
    std::string diagnostic;
};

/// Searches A in {A0 2^k} for phi = exp(A t + alpha f), f = sqrt(1 + r0^2),
/// over the nodes of an N-grid of radius R and `time_samples` times in [0, T].
inline BarrierResult build_and_check_barrier(const ModelSpec& model, double C, double T, double alpha = 1.0, double radius = 4.0,
                                             int N = 64, int time_samples = 11) {
    if (model.m != 1) throw ArgumentError("build_and_check_barrier: m = 1 models only");
    if (!(alpha > 0.0) || !(C >= 0.0)) throw ArgumentError("build_and_check_barrier: need alpha > 0 and C >= 0");
    if (!(T > 0.0) || !(T < time_window(model))) throw DomainError("build_and_check_barrier: T outside the model's time window");
    if (time_samples < 2) throw ArgumentError("build_and_check_barrier: need at least two time samples");
    const Grid G(radius, N);
    BarrierResult res;
    res.alpha = alpha;
    res.C = C;
    // worst value of E (alpha dd̄ f + alpha^2 |d f|^2) over the samples; then margin = A - C - worst
    double worst = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, fmax_over = 0.0;
    for (int q = 0; q < time_samples; ++q) {
        const double t = T * q / (time_samples - 1);
        const ExactFactor g(model, t);
        for (int k : G.active_nodes()) {
            const double r = std::sqrt(G.r2(k));
            const BarrierProfile b = barrier_profile(model, r);
            const double E = g.inverse(G.r2(k));
            worst = std::max(worst, E * (alpha * b.lap_flat + alpha * alpha * b.grad_flat));
            res.sup_grad_f = std::max(res.sup_grad_f, std::sqrt(E * b.grad_flat));
            res.sup_hess_f = std::max(res.sup_hess_f, std::abs(E * b.lap_flat));
            if (q == 0) {
                const double r0 = radial_distance(model, r).r0;
                const double ratio = b.f / (1.0 + r0);
                lo = std::min(lo, ratio);
                hi = std::max(hi, ratio);
                fmax_over = std::max(fmax_over, b.f);
            }
        }
    }
    double A = 0.125;
    for (int k = 0; k < 40; ++k, A *= 2.0) {
        ++res.tried;
        if (A - C - worst >= 0.0) {
            res.found = true;
            res.A = A;
            res.margin = A - C - worst;
            break;
        }
    }
    if (!res.found) {
        res.margin = A / 2.0 - C - worst;
        res.diagnostic = "schedule exhausted at A = " + std::to_string(A / 2.0) + "; worst drift " + std::to_string(worst);
        return res;
    }
    // exp(a (r0 + 1)) <= phi <= exp(b (r0 + 1)) on [0, T]
    res.a_lower = alpha * lo;
    res.b_upper = alpha * hi + res.A * T;
    res.sandwich = true;
    for (int q = 0; q < time_samples && res.sandwich; ++q) {
        const double t = T * q / (time_samples - 1);
        for (int k : G.active_nodes()) {
            const double r = std::sqrt(G.r2(k));
            const double r0 = radial_distance(model, r).r0;
            const double lphi = res.A * t + alpha * barrier_profile(model, r).f;
            if (lphi < res.a_lower * (r0 + 1.0) - 1e-12 || lphi > res.b_upper * (r0 + 1.0) + 1e-12) {
                res.sandwich = false;
                res.diagnostic = "sandwich bound violated";
                break;
            }
        }
    }
    return res;
}

struct EpsilonBarrierReport {
    std::vector<double> eps;
    std::vector<double> min_value;  // min over the run of the g-eigenvalue of h + eps phi g
    bool pass = false;
};

/// Runs the flow and tracks min (h + eps phi g) for each eps; phi from the barrier for C.
inline EpsilonBarrierReport epsilon_barrier_check(const FlowConfig& cfg, const std::vector<double>& eps, double C = 1.0) {
    if (cfg.h_init == HInit::none) throw ArgumentError("epsilon_barrier_check: the run needs an h field");
    const BarrierResult b = build_and_check_barrier(cfg.model, C, cfg.T, 1.0, cfg.radius, std::min(cfg.N, 64));
    if (!b.found) throw DomainError("epsilon_barrier_check: no barrier found (" + b.diagnostic + ")");
    EpsilonBarrierReport rep;
    rep.eps = eps;
    rep.min_value.assign(eps.size(), std::numeric_limits<double>::infinity());
    run_flow(cfg, {}, [&](const FlowState& s) {
        for (int k : s.grid->interior(interior_margin(*s.grid))) {
            const double phi = std::exp(b.A * s.t + barrier_profile(s.model, std::sqrt(s.grid->r2(k))).f);
            const double eig = s.h[k] * s.E[k];
            for (std::size_t i = 0; i < eps.size(); ++i) rep.min_value[i] = std::min(rep.min_value[i], eig + eps[i] * phi);
        }
    });
    rep.pass = std::all_of(rep.min_value.begin(), rep.min_value.end(), [](double x) { return x > 0.0; });
    return rep;
}

struct ComparisonReport {
    double C1 = 0.0;        // max of (d/dt - Delta) S / S with S = (1 + Phi)^{1/2}, clamped at 0
    double fd_tol = 0.0;    // max |fine - coarse| stencil difference of the same ratio
    int samples = 0;
};

/// Measured (d/dt - Delta) (1 + Phi)^{1/2} from three time-ordered states.
inline ComparisonReport measure_barrier_comparison(const FlowState& before, const FlowState& mid, const FlowState& after) {
    const Grid& G = *mid.grid;
    const double dt = after.t - before.t;
    if (!(dt > 0.0)) throw ArgumentError("measure_barrier_comparison: states must be time-ordered");
    auto field = [&](const FlowState& s, int w) {
        std::vector<double> S(G.size(), 0.0);
        for (int k : (w == 1 ? G.active_nodes() : G.interior(3.0 * G.dx()))) S[k] = std::sqrt(1.0 + node_values(s, k, w).Phi);
        return S;
    };
    const auto samples = G.interior(6.0 * G.dx());
    std::vector<double> ratio[2];
    for (int w : {1, 2}) {
        const auto S0 = field(before, w), S1 = field(mid, w), S2 = field(after, w);
        for (int k : samples) ratio[w - 1].push_back(((S2[k] - S0[k]) / dt - laplacian(mid, S1, k, w)) / S1[k]);
    }
    ComparisonReport r;
    for (std::size_t q = 0; q < samples.size(); ++q) {
        const double R = (4.0 * ratio[0][q] - ratio[1][q]) / 3.0;
        r.C1 = std::max(r.C1, R);
        r.fd_tol = std::max(r.fd_tol, std::abs(ratio[0][q] - ratio[1][q]));
        ++r.samples;
    }
    return r;
}

}  // namespace kahler
