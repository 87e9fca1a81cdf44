#pragma once

/**
 * @file flow.hpp
 * @brief Kähler-Ricci flow of m = 1 conformal metrics g = e^u and the heat
 * equation for h on a disk grid (method of lines, explicit RK4).
 *
 * For m = 1 the flow is d/dt e^u = dd̄ u, and the Lichnerowicz heat equation
 * collapses to d/dt h = dd̄ (h / g) since the curvature terms cancel.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/fd_backend.hpp"
#include "kahler/geometry.hpp"
#include "kahler/harnack.hpp"
#include "kahler/models.hpp"

namespace kahler {

/// Cell-centred square grid of (N + 4)^2 nodes; active nodes are those with |z| < R.
class Grid {
  public:
    struct Span {
        int j, i0, i1;  // active nodes (i0..i1-1, j)
    };

    Grid(double radius, int N) : R_(radius), N_(N) {
        if (!(radius > 0.0)) throw ArgumentError("Grid: radius must be positive");
        if (N < 8 || N % 2) throw ArgumentError("Grid: N must be even and >= 8");
        n_ = N + 4;
        dx_ = 2.0 * radius / N;
        r2_.resize(size());
        active_.assign(size(), 0);
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i) {
                const double x = coord(i), y = coord(j);
                r2_[idx(i, j)] = x * x + y * y;
                active_[idx(i, j)] = (x * x + y * y < R_ * R_) ? 1 : 0;
            }
        std::vector<char> ring(size(), 0);
        for (int j = 0; j < n_; ++j) {
            int i0 = -1, i1 = -1;
            for (int i = 0; i < n_; ++i) {
                if (!active_[idx(i, j)]) continue;
                if (i0 < 0) i0 = i;
                i1 = i + 1;
                active_list_.push_back(idx(i, j));
                for (int dj = -1; dj <= 1; ++dj)
                    for (int di = -1; di <= 1; ++di)
                        if (!active_[idx(i + di, j + dj)]) ring[idx(i + di, j + dj)] = 1;
            }
            if (i0 >= 0) spans_.push_back({j, i0, i1});
        }
        for (int k = 0; k < size(); ++k)
            if (ring[k]) ring_.push_back(k);
    }

    double radius() const { return R_; }
    int resolution() const { return N_; }
    int n() const { return n_; }
    int size() const { return n_ * n_; }
    double dx() const { return dx_; }
    double coord(int i) const { return (i - 0.5 * (n_ - 1)) * dx_; }
    int idx(int i, int j) const { return j * n_ + i; }
    int col(int k) const { return k % n_; }
    int row(int k) const { return k / n_; }
    cplx z(int k) const { return {coord(col(k)), coord(row(k))}; }
    double r2(int k) const { return r2_[k]; }
    bool active(int k) const { return active_[k] != 0; }
    const std::vector<Span>& spans() const { return spans_; }
    const std::vector<int>& active_nodes() const { return active_list_; }
    /// Inactive nodes in the 3x3 neighbourhood of an active node; they carry boundary data.
    const std::vector<int>& ring() const { return ring_; }
    /// Active nodes with |z| <= R - margin.
    std::vector<int> interior(double margin) const {
        std::vector<int> out;
        const double rr = std::max(0.0, R_ - margin);
        for (int k : active_list_)
            if (r2_[k] <= rr * rr) out.push_back(k);
        return out;
    }

  private:
    double R_;
    int N_, n_;
    double dx_;
    std::vector<double> r2_;
    std::vector<char> active_;
    std::vector<Span> spans_;
    std::vector<int> active_list_, ring_;
};

enum class Background { numerical, exact };
enum class Boundary { exact, frozen };
enum class HInit { none, zero, ricci, heat_kernel, random_psd };

inline std::string hinit_name(HInit h) {
    switch (h) {
        case HInit::none: return "none";
        case HInit::zero: return "zero";
        case HInit::ricci: return "ric";
        case HInit::heat_kernel: return "heat-kernel";
        case HInit::random_psd: return "random-psd";
    }
    return "?";
}

inline HInit parse_hinit(const std::string& s) {
    for (HInit h : {HInit::none, HInit::zero, HInit::ricci, HInit::heat_kernel, HInit::random_psd})
        if (hinit_name(h) == s) return h;
    throw ParseError("unknown h initialisation '" + s + "'");
}

struct FlowConfig {
    ModelSpec model = ModelSpec::cigar();
    double radius = 4.0;
    int N = 128;
    double t0 = 0.0;
    double T = 0.5;
    double kappa = 0.2;  // dt <= kappa dx^2 inf e^u
    Background background = Background::numerical;
    Boundary boundary = Boundary::exact;
    HInit h_init = HInit::none;
    std::uint64_t seed = 0;      // random-psd fields
    double weight_a = 1.0;       // e^{-a r0^2} in the weighted integrals
    double monitor_every = 0.05;
};

/// Exact g_{11̄}(r^2, t) and its reciprocal, with per-time constants hoisted.
class ExactFactor {
  public:
    ExactFactor(const ModelSpec& s, double t) : s_(s), t_(t) {
        if (s.m != 1) throw ArgumentError("flow: m = 1 models only");
        check_time(s, t);
        if (s.kind == ModelKind::cigar) c_ = std::exp(t);
        if (s.kind == ModelKind::fubini_study) c_ = 1.0 / (1.0 - 2.0 * t);
    }
    double inverse(double r2) const {
        switch (s_.kind) {
            case ModelKind::flat: return 1.0;
            case ModelKind::cigar: return c_ + r2;
            case ModelKind::fubini_study: return (1.0 + r2) * (1.0 + r2) * c_;
            default: return 1.0 / conformal_factor(s_, r2, t_);
        }
    }
    double value(double r2) const { return 1.0 / inverse(r2); }

  private:
    ModelSpec s_;
    double t_;
    double c_ = 1.0;
};

struct FlowState {
    std::shared_ptr<const Grid> grid;
    ModelSpec model;
    double t = 0.0;
    Background background = Background::numerical;
    Boundary boundary = Boundary::exact;
    HInit h_init = HInit::none;
    std::vector<double> u, E, h;  // log g_{11̄}, e^{-u}, h_{11̄}
    std::vector<double> u_initial, u_last_monitor;
    std::vector<double> weight;   // e^{-a r0^2}
    long steps = 0;
    int steps_since_sync = 0;

    bool has_h() const { return h_init != HInit::none; }
    double g(int k) const { return std::exp(u[k]); }
};

namespace detail {

/// Exact h at time t where a closed form exists, for boundary data.
inline bool exact_h_available(const FlowState& s) {
    if (s.h_init == HInit::zero) return true;
    if (s.h_init == HInit::ricci) return s.model.kind != ModelKind::radial_profile;
    if (s.h_init == HInit::heat_kernel) return s.model.kind == ModelKind::flat;
    return false;
}

inline double exact_h(const FlowState& s, double r2, double t) {
    switch (s.h_init) {
        case HInit::zero: return 0.0;
        case HInit::ricci: return exact_ricci(s.model, r2, t);
        case HInit::heat_kernel: return heat_kernel_value(1, r2, t);
        default: return 0.0;
    }
}

/// (|p(z)|^2 + 1/4) g(0) with p a random quadratic, coefficients in the unit disk.
inline std::vector<double> random_psd_field(const Grid& grid, const std::vector<double>& u0, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    auto disk = [&] { return std::polar(std::sqrt(un(rng)), 2.0 * std::numbers::pi * un(rng)); };
    const cplx c0 = disk(), c1 = disk(), c2 = disk(), c3 = disk();
    std::vector<double> h(grid.size(), 0.0);
    for (int k = 0; k < grid.size(); ++k) {
        const cplx z = grid.z(k);
        const cplx p = 0.5 * (c0 + c1 * z + c2 * std::conj(z) + 0.5 * c3 * z * z);
        h[k] = (std::norm(p) + 0.25) * std::exp(u0[k]);
    }
    return h;
}

}  // namespace detail

inline FlowState initial_state(const FlowConfig& c) {
    if (c.model.m != 1) throw ArgumentError("flow: m = 1 models only");
    if (c.model.kind == ModelKind::radial_profile) throw DomainError("flow: the radial profile has no exact evolution for boundary data");
    if (!(c.kappa > 0.0)) throw ArgumentError("flow: kappa must be positive");
    if (!(c.T >= c.t0) || !(c.t0 >= 0.0)) throw ArgumentError("flow: need 0 <= t0 <= T");
    if (!(c.monitor_every > 0.0)) throw ArgumentError("flow: monitor cadence must be positive");
    check_time(c.model, c.T);
    if (c.T >= time_window(c.model)) throw DomainError("flow: T reaches the model's singular time");
    if (c.h_init == HInit::heat_kernel && (c.model.kind != ModelKind::flat || !(c.t0 > 0.0)))
        throw ArgumentError("flow: heat-kernel h needs the flat model and t0 > 0");
    FlowState s;
    s.grid = std::make_shared<const Grid>(c.radius, c.N);
    const Grid& G = *s.grid;
    s.model = c.model;
    s.t = c.t0;
    s.background = c.background;
    s.boundary = c.boundary;
    s.h_init = c.h_init;
    s.u.resize(G.size());
    s.E.resize(G.size());
    s.weight.resize(G.size());
    const ExactFactor f(c.model, c.t0);
    for (int k = 0; k < G.size(); ++k) {
        s.E[k] = f.inverse(G.r2(k));
        s.u[k] = -std::log(s.E[k]);
        const double r0 = radial_distance(c.model, std::sqrt(G.r2(k))).r0;
        s.weight[k] = std::exp(-c.weight_a * r0 * r0);
    }
    if (s.has_h()) {
        if (c.h_init == HInit::random_psd) {
            s.h = detail::random_psd_field(G, s.u, c.seed);
        } else {
            s.h.resize(G.size());
            for (int k = 0; k < G.size(); ++k) s.h[k] = detail::exact_h(s, G.r2(k), c.t0);
        }
    }
    s.u_initial = s.u;
    s.u_last_monitor = s.u;
    return s;
}

/// inf e^u over active and boundary nodes.
inline double inf_metric(const FlowState& s) {
    double lo = std::numeric_limits<double>::infinity();
    for (int k : s.grid->active_nodes()) lo = std::min(lo, 1.0 / s.E[k]);
    for (int k : s.grid->ring()) lo = std::min(lo, 1.0 / s.E[k]);
    return lo;
}

/// Largest step allowed by dt <= kappa dx^2 inf e^u.
inline double stable_dt(const FlowState& s, double kappa) {
    const double dx = s.grid->dx();
    return kappa * dx * dx * inf_metric(s);
}

namespace detail {

/// e^{-d} to fourth order; the stage offsets d are O(dt).
inline double exp_neg_small(double d) { return 1.0 - d * (1.0 - 0.5 * d * (1.0 - d / 3.0 * (1.0 - 0.25 * d))); }

class Stepper {
  public:
    explicit Stepper(const FlowState& s) : G_(*s.grid), size_(G_.size()) {
        for (auto* v : {&U_, &H_, &Es_, &P_, &kU_, &kH_, &accU_, &accH_}) v->assign(size_, 0.0);
        if (s.boundary == Boundary::frozen) {
            for (int k : G_.ring()) {
                ring_u_.push_back(s.u[k]);
                ring_E_.push_back(s.E[k]);
                ring_h_.push_back(s.has_h() ? s.h[k] : 0.0);
            }
        }
    }

    void step(FlowState& s, double dt) {
        const bool evolve_u = s.background == Background::numerical;
        const bool evolve_h = s.has_h();
        const double t = s.t;
        static constexpr double a[4] = {0.0, 0.5, 0.5, 1.0};
        static constexpr double b[4] = {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};
        std::fill(accU_.begin(), accU_.end(), 0.0);
        std::fill(accH_.begin(), accH_.end(), 0.0);
        std::fill(kU_.begin(), kU_.end(), 0.0);
        std::fill(kH_.begin(), kH_.end(), 0.0);
        for (int st = 0; st < 4; ++st) {
            const double ts = t + a[st] * dt;
            const double ad = a[st] * dt;
            for (const auto& sp : G_.spans()) {
                const int o = sp.j * G_.n();
                const double* u = s.u.data() + o;
                const double* ku = kU_.data() + o;
                double* U = U_.data() + o;
                for (int i = sp.i0; i < sp.i1; ++i) U[i] = u[i] + ad * ku[i];
                if (evolve_h) {
                    const double* h = s.h.data() + o;
                    const double* kh = kH_.data() + o;
                    double* H = H_.data() + o;
                    for (int i = sp.i0; i < sp.i1; ++i) H[i] = h[i] + ad * kh[i];
                }
            }
            stage_metric(s, ts, evolve_u);
            if (evolve_h) stage_boundary_h(s, ts);
            rhs(evolve_u, evolve_h, b[st]);
        }
        const double t1 = t + dt;
        for (const auto& sp : G_.spans()) {
            const int o = sp.j * G_.n();
            if (evolve_u) {
                double* u = s.u.data() + o;
                double* E = s.E.data() + o;
                const double* au = accU_.data() + o;
                for (int i = sp.i0; i < sp.i1; ++i) {
                    const double du = dt * au[i];
                    u[i] += du;
                    E[i] *= exp_neg_small(du);
                }
            }
            if (evolve_h) {
                double* h = s.h.data() + o;
                const double* ah = accH_.data() + o;
                for (int i = sp.i0; i < sp.i1; ++i) h[i] += dt * ah[i];
            }
        }
        s.t = t1;
        ++s.steps;
        if (evolve_u && ++s.steps_since_sync >= 64) {
            for (int k : G_.active_nodes()) s.E[k] = std::exp(-s.u[k]);
            s.steps_since_sync = 0;
        }
        if (!evolve_u) {
            const ExactFactor f(s.model, t1);
            for (int k : G_.active_nodes()) {
                s.E[k] = f.inverse(G_.r2(k));
                s.u[k] = -std::log(s.E[k]);
            }
        }
        set_ring(s, t1);
        for (int k : G_.active_nodes())
            if (!std::isfinite(s.u[k]) || !(s.E[k] > 0.0) || !std::isfinite(s.E[k]) || (evolve_h && !std::isfinite(s.h[k])))
                throw DegenerateMetricError("flow: metric or h became non-finite at t = " + std::to_string(t1));
    }

    /// Writes boundary data for time t into the state's ring nodes.
    void set_ring(FlowState& s, double t) const {
        const auto& ring = G_.ring();
        const ExactFactor f(s.model, t);
        for (std::size_t q = 0; q < ring.size(); ++q) {
            const int k = ring[q];
            if (frozen_metric(s)) {
                s.u[k] = ring_u_[q];
                s.E[k] = ring_E_[q];
            } else {
                s.E[k] = f.inverse(G_.r2(k));
                s.u[k] = -std::log(s.E[k]);
            }
            if (!s.has_h()) continue;
            if (s.boundary == Boundary::frozen) s.h[k] = ring_h_[q];
            else if (exact_h_available(s)) s.h[k] = exact_h(s, G_.r2(k), t);
        }
    }

  private:
    static bool frozen_metric(const FlowState& s) {
        return s.boundary == Boundary::frozen && s.background == Background::numerical;
    }

    void stage_metric(const FlowState& s, double ts, bool evolve_u) {
        const auto& ring = G_.ring();
        if (evolve_u) {
            for (const auto& sp : G_.spans()) {
                const int o = sp.j * G_.n();
                const double* E = s.E.data() + o;
                const double* u = s.u.data() + o;
                const double* U = U_.data() + o;
                double* Es = Es_.data() + o;
                for (int i = sp.i0; i < sp.i1; ++i) Es[i] = E[i] * exp_neg_small(U[i] - u[i]);
            }
        } else {
            const ExactFactor f(s.model, ts);
            for (int k : G_.active_nodes()) Es_[k] = f.inverse(G_.r2(k));
        }
        if (frozen_metric(s)) {
            for (std::size_t q = 0; q < ring.size(); ++q) {
                U_[ring[q]] = ring_u_[q];
                Es_[ring[q]] = ring_E_[q];
            }
        } else {
            const ExactFactor f(s.model, ts);
            for (int k : ring) {
                Es_[k] = f.inverse(G_.r2(k));
                U_[k] = -std::log(Es_[k]);
            }
        }
    }

    void stage_boundary_h(const FlowState& s, double ts) {
        const auto& ring = G_.ring();
        if (s.boundary == Boundary::frozen || !exact_h_available(s)) {
            for (std::size_t q = 0; q < ring.size(); ++q) H_[ring[q]] = s.boundary == Boundary::frozen ? ring_h_[q] : s.h[ring[q]];
        } else {
            for (int k : ring) H_[k] = exact_h(s, G_.r2(k), ts);
        }
    }

    // du/dt = e^{-u} lap u / 4,  dh/dt = lap(h e^{-u}) / 4
    void rhs(bool evolve_u, bool evolve_h, double weight) {
        const int n = G_.n();
        const double c = 0.25 / (G_.dx() * G_.dx());
        if (evolve_h) {
            for (const auto& sp : G_.spans())
                for (int i = sp.i0; i < sp.i1; ++i) P_[sp.j * n + i] = H_[sp.j * n + i] * Es_[sp.j * n + i];
            for (int k : G_.ring()) P_[k] = H_[k] * Es_[k];
        }
        for (const auto& sp : G_.spans()) {
            const int base = sp.j * n;
            const double* u = U_.data() + base;
            const double* un = U_.data() + base + n;
            const double* us = U_.data() + base - n;
            const double* e = Es_.data() + base;
            double* ku = kU_.data() + base;
            double* au = accU_.data() + base;
            if (evolve_u) {
                for (int i = sp.i0; i < sp.i1; ++i) {
                    ku[i] = c * e[i] * (u[i - 1] + u[i + 1] + un[i] + us[i] - 4.0 * u[i]);
                    au[i] += weight * ku[i];
                }
            }
            if (evolve_h) {
                const double* p = P_.data() + base;
                const double* pn = P_.data() + base + n;
                const double* ps = P_.data() + base - n;
                double* kh = kH_.data() + base;
                double* ah = accH_.data() + base;
                for (int i = sp.i0; i < sp.i1; ++i) {
                    kh[i] = c * (p[i - 1] + p[i + 1] + pn[i] + ps[i] - 4.0 * p[i]);
                    ah[i] += weight * kh[i];
                }
            }
        }
    }

    const Grid& G_;
    int size_;
    std::vector<double> U_, H_, Es_, P_, kU_, kH_, accU_, accH_;
    std::vector<double> ring_u_, ring_E_, ring_h_;
};

}  // namespace detail

/// Pointwise m = 1 quantities at a node from centred differences; f = h e^{-u}.
struct NodeValues {
    double curv = 0.0;       // scalar curvature, = |Rm| up to sign
    double Phi = 0.0, Psi = 0.0, Lambda = 0.0;
    double eig = 0.0;        // g-eigenvalue of h
};

/// Stencil of half-width w nodes (spacing w dx); w = 2 gives the coarse estimate for Richardson checks.
inline NodeValues node_values(const FlowState& s, int k, int w = 1) {
    const Grid& G = *s.grid;
    const int n = w * G.n();
    const int k1 = w;
    const double dx = w * G.dx();
    const auto& u = s.u;
    NodeValues v;
    const double E = s.E[k];
    v.curv = -E * 0.25 * (u[k - k1] + u[k + k1] + u[k - n] + u[k + n] - 4.0 * u[k]) / (dx * dx);
    if (!s.has_h()) return v;
    auto f = [&](int q) { return s.h[q] * s.E[q]; };
    const double f0 = f(k);
    const double fx = (f(k + k1) - f(k - k1)) / (2 * dx), fy = (f(k + n) - f(k - n)) / (2 * dx);
    const double fxx = (f(k + k1) - 2 * f0 + f(k - k1)) / (dx * dx), fyy = (f(k + n) - 2 * f0 + f(k - n)) / (dx * dx);
    const double fxy = (f(k + n + k1) - f(k + n - k1) - f(k - n + k1) + f(k - n - k1)) / (4 * dx * dx);
    const double ux = (u[k + k1] - u[k - k1]) / (2 * dx), uy = (u[k + n] - u[k - n]) / (2 * dx);
    const cplx df(0.5 * fx, -0.5 * fy), du(0.5 * ux, -0.5 * uy);
    const cplx d2f(0.25 * (fxx - fyy), -0.5 * fxy);
    const double ddbf = 0.25 * (fxx + fyy);
    v.eig = f0;
    v.Phi = f0 * f0;
    v.Psi = 2.0 * std::norm(df) * E;
    v.Lambda = (std::norm(d2f - du * df) + ddbf * ddbf) * E * E;
    return v;
}

/// Complex Laplacian g^{11̄} dd̄ F at an active node.
inline double laplacian(const FlowState& s, const std::vector<double>& F, int k, int w = 1) {
    const int n = w * s.grid->n();
    const double dx = w * s.grid->dx();
    return s.E[k] * 0.25 * (F[k - w] + F[k + w] + F[k - n] + F[k + n] - 4.0 * F[k]) / (dx * dx);
}

struct MonitorRecord {
    double t = 0.0;
    long steps = 0;
    double sup_Rm = 0.0;
    double sup_grad_Rm_sqrt_t = 0.0;
    bool monotone = true;        // e^u nonincreasing since the previous record
    double equiv_min = 1.0, equiv_max = 1.0;  // e^{u(t)} / e^{u(0)}
    double min_eig_h = 0.0;      // NaN when the run carries no h
    double Phi_sup = 0.0, Psi_sup = 0.0, Lambda_sup = 0.0;
    double Psi_int = 0.0, Lambda_int = 0.0, Psi2_int = 0.0;
    double inf_metric = 0.0;
};

/// Interior margin used for sups and assertions: three stencil widths.
inline double interior_margin(const Grid& G) { return 3.0 * G.dx(); }

inline MonitorRecord run_monitors(FlowState& s) {
    const Grid& G = *s.grid;
    const int n = G.n();
    const double dx = G.dx();
    MonitorRecord r;
    r.t = s.t;
    r.steps = s.steps;
    r.inf_metric = inf_metric(s);
    r.min_eig_h = std::numeric_limits<double>::infinity();
    r.equiv_min = std::numeric_limits<double>::infinity();
    r.equiv_max = 0.0;
    std::vector<double> curv(G.size(), 0.0);
    for (int k : G.active_nodes()) curv[k] = node_values(s, k).curv;
    const double dA = dx * dx;
    for (int k : G.interior(interior_margin(G))) {
        const NodeValues v = node_values(s, k);
        r.sup_Rm = std::max(r.sup_Rm, std::abs(v.curv));
        // |nabla Rm|^2 = 2 g^{11̄} |d R|^2 for Rm = R g (x) g
        const double cx = (curv[k + 1] - curv[k - 1]) / (2 * dx), cy = (curv[k + n] - curv[k - n]) / (2 * dx);
        r.sup_grad_Rm_sqrt_t = std::max(r.sup_grad_Rm_sqrt_t, std::sqrt(0.5 * s.E[k] * (cx * cx + cy * cy) * s.t));
        const double gnow = std::exp(s.u[k]);
        if (gnow > std::exp(s.u_last_monitor[k]) + 1e-10) r.monotone = false;
        const double ratio = std::exp(s.u[k] - s.u_initial[k]);
        r.equiv_min = std::min(r.equiv_min, ratio);
        r.equiv_max = std::max(r.equiv_max, ratio);
        if (!s.has_h()) continue;
        r.min_eig_h = std::min(r.min_eig_h, v.eig);
        r.Phi_sup = std::max(r.Phi_sup, v.Phi);
        r.Psi_sup = std::max(r.Psi_sup, v.Psi);
        r.Lambda_sup = std::max(r.Lambda_sup, v.Lambda);
        const double w = s.weight[k] * gnow * dA;
        r.Psi_int += w * v.Psi;
        r.Lambda_int += s.t * w * v.Lambda;
        r.Psi2_int += s.t * w * v.Psi * v.Psi;
    }
    if (!s.has_h()) r.min_eig_h = std::numeric_limits<double>::quiet_NaN();
    s.u_last_monitor = s.u;
    return r;
}

inline const std::vector<std::string>& monitor_columns() {
    static const std::vector<std::string> cols{"t", "steps", "sup_Rm", "sup_grad_Rm_sqrt_t", "monotone", "equiv_min", "equiv_max",
                                               "min_eig_h", "Phi_sup", "Psi_sup", "Lambda_sup", "Psi_int", "Lambda_int", "Psi2_int",
                                               "inf_metric"};
    return cols;
}

inline void write_monitor_csv(std::ostream& os, const std::vector<MonitorRecord>& rs) {
    const auto& cols = monitor_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << "\n";
    os.precision(12);
    for (const auto& r : rs)
        os << r.t << "," << r.steps << "," << r.sup_Rm << "," << r.sup_grad_Rm_sqrt_t << "," << (r.monotone ? 1 : 0) << ","
           << r.equiv_min << "," << r.equiv_max << "," << r.min_eig_h << "," << r.Phi_sup << "," << r.Psi_sup << "," << r.Lambda_sup
           << "," << r.Psi_int << "," << r.Lambda_int << "," << r.Psi2_int << "," << r.inf_metric << "\n";
}

struct FlowRun {
    FlowState state;
    std::vector<MonitorRecord> records;
    double seconds = 0.0;
};

/// Integrates from t0 to T; records monitors every monitor_every and calls
/// on_stop at each record time and each extra stop time.
inline FlowRun run_flow(const FlowConfig& c, const std::vector<double>& stops = {},
                        const std::function<void(const FlowState&)>& on_stop = {}) {
    const auto start = std::chrono::steady_clock::now();
    FlowRun run{initial_state(c), {}, 0.0};
    FlowState& s = run.state;
    detail::Stepper stepper(s);
    stepper.set_ring(s, s.t);

    std::vector<double> times;
    const int nrec = static_cast<int>(std::floor((c.T - c.t0) / c.monitor_every + 1e-9));
    std::vector<char> is_record;
    for (int i = 0; i <= nrec; ++i) times.push_back(c.t0 + i * c.monitor_every);
    if (times.back() < c.T - 1e-12) times.push_back(c.T);
    is_record.assign(times.size(), 1);
    for (double x : stops) {
        if (x < c.t0 || x > c.T) throw ArgumentError("run_flow: stop time outside [t0, T]");
        times.push_back(x);
        is_record.push_back(0);
    }
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });

    for (std::size_t q : order) {
        const double target = times[q];
        while (s.t < target - 1e-13) {
            const double dt = std::min(stable_dt(s, c.kappa), target - s.t);
            stepper.step(s, dt);
        }
        if (is_record[q]) run.records.push_back(run_monitors(s));
        if (on_stop) on_stop(s);
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return run;
}

/// A single explicit step of size dt, enforcing the step-size bound.
inline void step(FlowState& s, double dt, double kappa = 0.2) {
    if (!(dt > 0.0)) throw StepSizeError("flow: step must be positive");
    if (dt > stable_dt(s, kappa) * (1.0 + 1e-12)) throw StepSizeError("flow: step violates dt <= kappa dx^2 inf e^u");
    detail::Stepper st(s);
    st.step(s, dt);
}

/// Max relative error of e^u against the exact flow over the interior.
inline double metric_error(const FlowState& s) {
    const ExactFactor f(s.model, s.t);
    double err = 0.0;
    for (int k : s.grid->interior(interior_margin(*s.grid))) {
        const double ex = f.value(s.grid->r2(k));
        err = std::max(err, std::abs(std::exp(s.u[k]) - ex) / ex);
    }
    return err;
}

/// Max |h - h_exact| / max |h_exact| over the interior.
inline double h_error(const FlowState& s) {
    if (!detail::exact_h_available(s)) throw ArgumentError("h_error: no closed form for this initial h");
    double err = 0.0, scale = 0.0;
    for (int k : s.grid->interior(interior_margin(*s.grid))) {
        const double ex = detail::exact_h(s, s.grid->r2(k), s.t);
        err = std::max(err, std::abs(s.h[k] - ex));
        scale = std::max(scale, std::abs(ex));
    }
    return scale > 0.0 ? err / scale : err;
}

struct NonnegativityVerdict {
    bool pass = false;
    double min_eig = 0.0;
    double tol = 0.0;
};

/// min g-eigenvalue of h over a run against tol = 1e-6 (1 + sup Phi^{1/2}).
inline NonnegativityVerdict check_nonnegativity_preservation(const std::vector<MonitorRecord>& rs) {
    NonnegativityVerdict v;
    v.min_eig = std::numeric_limits<double>::infinity();
    double phi = 0.0;
    for (const auto& r : rs) {
        v.min_eig = std::min(v.min_eig, r.min_eig_h);
        phi = std::max(phi, r.Phi_sup);
    }
    if (rs.empty()) v.min_eig = 0.0;
    v.tol = 1e-6 * (1.0 + std::sqrt(phi));
    v.pass = v.min_eig >= -v.tol;
    return v;
}

/// Semi-discrete right sides (du/dt, dh/dt) at an active node.
inline std::pair<double, double> discrete_rhs(const FlowState& s, int k) {
    const int n = s.grid->n();
    const double c = 0.25 / (s.grid->dx() * s.grid->dx());
    const auto& u = s.u;
    const double du = c * s.E[k] * (u[k - 1] + u[k + 1] + u[k - n] + u[k + n] - 4.0 * u[k]);
    if (!s.has_h()) return {du, 0.0};
    auto p = [&](int q) { return s.h[q] * s.E[q]; };
    return {du, c * (p(k - 1) + p(k + 1) + p(k - n) + p(k + n) - 4.0 * p(k))};
}

/// Measured constants in (d/dt - Delta) Phi = -Psi + A and (d/dt - Delta) Psi = -Lambda + B.
struct NormEvolution {
    double C_A = 0.0;     // max |A| / Phi
    double C_B = 0.0;     // max t |B| / (Phi + Psi)
    double C_B2 = 0.0;    // the same for B2 = B + Lambda, i.e. (d/dt - Delta) Psi = -2 Lambda + B2
    double sup_Rm = 0.0;
    int samples = 0;
};

/// Centred time differences from states at t - d, t, t + d on the same grid.
/// Space differences are Richardson-combined from dx and 2 dx stencils, and
/// only nodes with Phi >= phi_floor * sup Phi are measured (the relative
/// error of the differences grows without bound in decaying tails).
inline NormEvolution measure_norm_evolution(const FlowState& before, const FlowState& mid, const FlowState& after,
                                            double phi_floor = 1e-6) {
    const Grid& G = *mid.grid;
    const double dt = after.t - before.t;
    if (!(dt > 0.0)) throw ArgumentError("measure_norm_evolution: states must be time-ordered");
    const std::vector<int> fine = G.active_nodes(), coarse = G.interior(3.0 * G.dx());
    auto fields = [&](const FlowState& s, int w) {
        std::vector<double> phi(G.size(), 0.0), psi(G.size(), 0.0);
        for (int k : (w == 1 ? fine : coarse)) {
            const NodeValues v = node_values(s, k, w);
            phi[k] = v.Phi;
            psi[k] = v.Psi;
        }
        return std::pair{phi, psi};
    };
    struct Side {
        double A, B, L;
    };
    const auto samples = G.interior(6.0 * G.dx());
    std::vector<Side> est[2];
    for (int w : {1, 2}) {
        const auto [phi0, psi0] = fields(before, w);
        const auto [phi1, psi1] = fields(mid, w);
        const auto [phi2, psi2] = fields(after, w);
        for (int k : samples) {
            const NodeValues v = node_values(mid, k, w);
            est[w - 1].push_back({(phi2[k] - phi0[k]) / dt - laplacian(mid, phi1, k, w) + v.Psi,
                                  (psi2[k] - psi0[k]) / dt - laplacian(mid, psi1, k, w) + v.Lambda, v.Lambda});
        }
    }
    double phi_sup = 0.0;
    for (int k : samples) phi_sup = std::max(phi_sup, node_values(mid, k).Phi);
    NormEvolution out;
    for (std::size_t q = 0; q < samples.size(); ++q) {
        const NodeValues v = node_values(mid, samples[q]);
        out.sup_Rm = std::max(out.sup_Rm, std::abs(v.curv));
        if (v.Phi < phi_floor * phi_sup || v.Phi <= 0.0) continue;
        const double A = (4.0 * est[0][q].A - est[1][q].A) / 3.0;
        const double B = (4.0 * est[0][q].B - est[1][q].B) / 3.0;
        out.C_A = std::max(out.C_A, std::abs(A) / v.Phi);
        const double L = (4.0 * est[0][q].L - est[1][q].L) / 3.0;
        out.C_B = std::max(out.C_B, mid.t * std::abs(B) / (v.Phi + v.Psi));
        out.C_B2 = std::max(out.C_B2, mid.t * std::abs(B + L) / (v.Phi + v.Psi));
        ++out.samples;
    }
    return out;
}

/// Metric and h jets at a grid node; the metric is analytic on an exact background.
inline std::pair<TensorJet, TensorJet> node_jets(const FlowState& s, int k, int order = 4) {
    const Grid& G = *s.grid;
    const int n = G.n();
    const double dx = G.dx();
    TensorJet g(1, {false, true}, order);
    if (s.background == Background::exact) {
        g = metric_jet(s.model, Point{G.z(k)}, s.t, order);
    } else {
        g(0, 0) = exp(fd_jet([&](int di, int dj) { return cplx(s.u[k + di + dj * n]); }, dx, order));
    }
    TensorJet h(1, {false, true}, order);
    if (s.has_h()) h(0, 0) = fd_jet([&](int di, int dj) { return cplx(s.h[k + di + dj * n]); }, dx, order);
    return {std::move(g), std::move(h)};
}

/// Harnack input at a grid node (order-4 jets, so Y1 and Y2 are available).
inline HarnackInput node_harnack_input(const FlowState& s, int k, std::optional<double> eps = std::nullopt) {
    if (!(s.t > 0.0)) throw DomainError("node_harnack_input: t must be positive");
    auto [g, h] = node_jets(s, k, 4);
    return make_harnack_input(g, h, s.t, eps);
}

}  // namespace kahler
