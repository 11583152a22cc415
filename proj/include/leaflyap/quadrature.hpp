// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_QUADRATURE_HPP
#define LEAFLYAP_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "leaflyap/errors.hpp"

namespace leaflyap {

// Adaptive Simpson on [a,b], relative tolerance on the whole integral.
// Depth-limited; throws NumericError carrying the last bracket on failure.
namespace detail {

template <typename F>
double simpson(const F& f, double a, double fa, double b, double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                  double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0) {
        throw NumericError("quadrature.adaptive_simpson",
                           "no convergence after max refinement; last bracket [" +
                               std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adapt_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adapt_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double rel_tol, double abs_floor = 1e-300,
                        int max_depth = 48) {
    const double fa = f(a), fb = f(b);
    const double m = 0.5 * (a + b), fm = f(m);
    const double whole = detail::simpson(f, a, fa, b, fb, m, fm);
    const double tol = std::max(std::fabs(whole) * rel_tol, abs_floor);
    return detail::adapt_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// 64-point Gauss-Legendre nodes/weights on [-1,1], generated once by Newton
// iteration on the Legendre recurrence.
struct GaussLegendre64 {
    std::array<double, 64> x{};
    std::array<double, 64> w{};

    GaussLegendre64() {
        const int n = 64;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double z1 = z;
                z = z1 - p0 / pp;
                if (std::fabs(z - z1) < 1e-15) break;
            }
            x[static_cast<std::size_t>(i)] = -z;
            x[static_cast<std::size_t>(n - 1 - i)] = z;
            w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
            w[static_cast<std::size_t>(n - 1 - i)] = w[static_cast<std::size_t>(i)];
        }
    }
};

inline const GaussLegendre64& gauss_legendre_64() {
    static const GaussLegendre64 table;
    return table;
}

template <typename F>
double gauss_legendre(const F& f, double a, double b) {
    const auto& t = gauss_legendre_64();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < 64; ++i) s += t.w[i] * f(c + h * t.x[i]);
    return s * h;
}

// Gauss-Hermite style integral of f against the standard normal density,
// evaluated as Gauss-Legendre on [-8,8] of f(z) phi(z) (double precision
// exhausts the normal tail well before |z|=8).
template <typename F>
double normal_expectation(const F& f) {
    const auto g = [&](double z) {
        return f(z) * std::exp(-0.5 * z * z) * 0.3989422804014326779;
    };
    double s = 0.0;
    // panels keep Gauss-Legendre happy against the peaked weight
    for (double a = -8.0; a < 8.0 - 1e-12; a += 2.0) s += gauss_legendre(g, a, a + 2.0);
    return s;
}

} // namespace leaflyap

#endif
