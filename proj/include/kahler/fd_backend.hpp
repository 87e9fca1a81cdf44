#pragma once

/**
 * @file fd_backend.hpp
 * @brief Taylor jets estimated from samples on a uniform grid (m = 1).
 *
 * Real partials d_x^i d_y^j f are tensor products of centered 1D operators:
 * delta^n / dx^n for even n and mu delta^n / dx^n for odd n, each second-order
 * accurate.  The real Taylor polynomial is then re-expanded in (w, wbar).
 */

#include <array>
#include <cmath>
#include <vector>

#include "kahler/errors.hpp"
#include "kahler/jet.hpp"

namespace kahler {

inline constexpr int kMaxFdOrder = 6;

/// Half-width of the stencil needed for jets of the given order.
inline int stencil_radius(int order) { return (order + 1) / 2; }

/// Weights w[k + r] for the centered n-th derivative (times dx^n), r = stencil_radius(n).
inline std::vector<double> central_weights(int n) {
    const int r = stencil_radius(n);
    std::vector<double> w(2 * r + 1, 0.0);
    auto binom = [](int a, int b) {
        double c = 1.0;
        for (int i = 1; i <= b; ++i) c = c * (a - b + i) / i;
        return c;
    };
    if (n % 2 == 0) {
        for (int k = 0; k <= n; ++k) w[n / 2 - k + r] += ((k % 2) ? -1.0 : 1.0) * binom(n, k);
    } else {
        // average of delta^n at x +- dx/2
        for (int k = 0; k <= n; ++k) {
            const double c = 0.5 * ((k % 2) ? -1.0 : 1.0) * binom(n, k);
            w[(n + 1) / 2 - k + r] += c;
            w[(n - 1) / 2 - k + r] += c;
        }
    }
    return w;
}

/// Jet of order `order` at a grid node from f(di, dj) = f(x0 + di dx, y0 + dj dx).
template <class Sampler>
Jet fd_jet(Sampler&& f, double dx, int order) {
    if (order < 0 || order > kMaxFdOrder) throw ArgumentError("fd_jet: order must be in [0, 6]");
    if (!(dx > 0.0)) throw ArgumentError("fd_jet: spacing must be positive");
    const int r = stencil_radius(order);
    const int w = 2 * r + 1;
    std::vector<cplx> s(w * w);
    for (int i = -r; i <= r; ++i)
        for (int j = -r; j <= r; ++j) s[(i + r) * w + (j + r)] = f(i, j);

    std::vector<std::vector<double>> W(order + 1);
    for (int n = 0; n <= order; ++n) {
        auto c = central_weights(n);
        const int rn = stencil_radius(n);
        W[n].assign(w, 0.0);
        for (int k = -rn; k <= rn; ++k) W[n][k + r] = c[k + rn] / std::pow(dx, n);
    }

    const Jet wz = Jet::coordinate(1, order, 0, 0.0, false);
    const Jet wb = Jet::coordinate(1, order, 0, 0.0, true);
    const Jet X = 0.5 * (wz + wb);
    const Jet Y = cplx(0.0, -0.5) * (wz - wb);
    std::vector<Jet> Xp{Jet(1, order, 1.0)}, Yp{Jet(1, order, 1.0)};
    for (int n = 1; n <= order; ++n) {
        Xp.push_back(Xp.back() * X);
        Yp.push_back(Yp.back() * Y);
    }

    Jet out(1, order);
    double fi = 1.0;
    for (int i = 0; i <= order; ++i) {
        if (i > 0) fi *= i;
        double fj = 1.0;
        for (int j = 0; i + j <= order; ++j) {
            if (j > 0) fj *= j;
            cplx d = 0.0;
            for (int a = 0; a < w; ++a) {
                if (W[i][a] == 0.0) continue;
                for (int b = 0; b < w; ++b)
                    if (W[j][b] != 0.0) d += W[i][a] * W[j][b] * s[a * w + b];
            }
            out += (d / (fi * fj)) * (Xp[i] * Yp[j]);
        }
    }
    return out;
}

}  // namespace kahler
