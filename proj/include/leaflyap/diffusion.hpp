// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_DIFFUSION_HPP
#define LEAFLYAP_DIFFUSION_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "leaflyap/errors.hpp"
#include "leaflyap/geometry.hpp"
#include "leaflyap/path.hpp"
#include "leaflyap/quadrature.hpp"
#include "leaflyap/stats.hpp"

namespace leaflyap {

// Uniform 1-D grid of diffusion values on a flat leaf (EuclideanSpace(1) or
// LineLeaf). Read-only after construction.
struct DiffusionGrid {
    LeafModel leaf;
    double lo = 0.0;
    double hi = 0.0;
    int n = 0; // nodes = n + 1
    std::vector<double> values;

    double h() const { return (hi - lo) / n; }
    double node(int i) const { return lo + i * h(); }
};

inline DiffusionGrid make_diffusion_grid(const LeafModel& leaf, double lo, double hi, int n,
                                         const ScalarField& f) {
    if (leaf.dim() != 1)
        throw DomainError("wiener.diffusion_apply", "grids are one-dimensional");
    if (!(hi > lo) || n < 2) throw DomainError("wiener.diffusion_apply", "bad grid spec");
    DiffusionGrid g;
    g.leaf = leaf;
    g.lo = lo;
    g.hi = hi;
    g.n = n;
    g.values.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) g.values[static_cast<std::size_t>(i)] = f.eval(LeafPoint(g.node(i)));
    return g;
}

namespace detail {

// Simpson weights over grid values restricted to index window [i0, i1]
inline double simpson_window(const std::vector<double>& vals, int i0, int i1, double h,
                             const std::function<double(int)>& f) {
    // composite Simpson; if the window has an odd number of intervals the last
    // one is done by trapezoid
    (void)vals;
    double s = 0.0;
    int i = i0;
    for (; i + 2 <= i1; i += 2) s += (h / 3.0) * (f(i) + 4.0 * f(i + 1) + f(i + 2));
    if (i + 1 <= i1) s += 0.5 * h * (f(i) + f(i + 1));
    return s;
}

} // namespace detail

struct DiffusionOptions {
    double tail_bound = 1e-4;   // allowed kernel mass outside the data
    double window_sigmas = 8.0; // integration window around each target
};

// D_t on grid data: values are diffused on the same spacing, but the output
// keeps only targets whose integration window fits inside the data (the
// truncation-tail contract). D_0 is the identity.
inline DiffusionGrid diffusion_apply(const DiffusionGrid& g, double t,
                                     const DiffusionOptions& opts = {}) {
    if (t < 0.0) throw DomainError("wiener.diffusion_apply", "negative time");
    if (t == 0.0) return g;
    const double R = opts.window_sigmas * std::sqrt(2.0 * t);
    const int kw = static_cast<int>(std::ceil(R / g.h()));
    // kernel mass beyond the window
    const double tail = std::erfc(kw * g.h() / std::sqrt(4.0 * t));
    if (tail > opts.tail_bound)
        throw DomainError("wiener.diffusion_apply", "truncation tail exceeds bound; use a larger grid");
    if (2 * kw >= g.n)
        throw DomainError("wiener.diffusion_apply", "grid too small for requested time; use a larger grid");
    DiffusionGrid out;
    out.leaf = g.leaf;
    out.lo = g.node(kw);
    out.hi = g.node(g.n - kw);
    out.n = g.n - 2 * kw;
    out.values.resize(static_cast<std::size_t>(out.n) + 1);
    const double h = g.h();
    for (int j = 0; j <= out.n; ++j) {
        const int c = j + kw;
        const double x = g.node(c);
        auto f = [&](int i) {
            const double y = g.node(i);
            return std::pow(4.0 * M_PI * t, -0.5) * std::exp(-(x - y) * (x - y) / (4.0 * t)) *
                   g.values[static_cast<std::size_t>(i)];
        };
        out.values[static_cast<std::size_t>(j)] =
            detail::simpson_window(g.values, c - kw, c + kw, h, f);
    }
    return out;
}

// Pointwise D_t f with f evaluable anywhere on the leaf. Supports the flat
// leaves (windowed Simpson against the Gaussian kernel) and the hyperbolic
// plane (geodesic polar quadrature against the radial kernel table).
inline double diffusion_value(const LeafModel& leaf, const ScalarField& f, const LeafPoint& x,
                              double t, const DiffusionOptions& opts = {}) {
    if (t < 0.0) throw DomainError("wiener.diffusion_apply", "negative time");
    if (t == 0.0) return f.eval(x);
    switch (leaf.kind()) {
    case LeafKind::LineLeaf:
    case LeafKind::EuclideanSpace: {
        // product structure: iterate Gauss-Legendre per coordinate via the
        // standard-normal expectation with variance 2t
        const int n = leaf.dim();
        const double s = std::sqrt(2.0 * t);
        std::vector<double> z(static_cast<std::size_t>(n), 0.0);
        std::function<double(int)> rec = [&](int i) -> double {
            if (i == n) {
                LeafPoint p = x;
                for (int j = 0; j < n; ++j) p.c[static_cast<std::size_t>(j)] += s * z[static_cast<std::size_t>(j)];
                return f.eval(p);
            }
            return normal_expectation([&](double zz) {
                z[static_cast<std::size_t>(i)] = zz;
                return rec(i + 1);
            });
        };
        return rec(0);
    }
    case LeafKind::HyperbolicPlane: {
        const double rho_max = 12.0 + 6.0 * t;
        static thread_local std::vector<std::pair<double, detail::HyperbolicKernelTable>> cache;
        const detail::HyperbolicKernelTable* table = nullptr;
        for (const auto& e : cache)
            if (e.first == t && e.second.rho_max() >= rho_max) table = &e.second;
        if (!table) {
            cache.emplace_back(t, detail::HyperbolicKernelTable(t, rho_max, 2400));
            table = &cache.back().second;
        }
        // check the truncated mass
        const auto mass_int = [&](double r) { return (*table)(r)*2.0 * M_PI * std::sinh(r); };
        double mass = 0.0;
        const int mp = 24;
        for (int i = 0; i < mp; ++i)
            mass += gauss_legendre(mass_int, rho_max * i / mp, rho_max * (i + 1) / mp);
        if (1.0 - mass > opts.tail_bound)
            throw DomainError("wiener.diffusion_apply", "truncation tail exceeds bound; use a larger grid");
        const int n_theta = 64;
        const auto radial = [&](double rho) {
            double ring = 0.0;
            for (int j = 0; j < n_theta; ++j) {
                const double th = 2.0 * M_PI * j / n_theta;
                ring += f.eval(hyperbolic_exp(x, rho, th));
            }
            return (*table)(rho)*std::sinh(rho) * ring * (2.0 * M_PI / n_theta);
        };
        double acc = 0.0;
        for (int i = 0; i < mp; ++i)
            acc += gauss_legendre(radial, rho_max * i / mp, rho_max * (i + 1) / mp);
        return acc / mass; // renormalize away the truncation deficit
    }
    }
    return 0.0;
}

// One event of a cylinder specification: the path must sit inside `box`
// (per-coordinate intervals, +-inf allowed) at time t.
struct CylinderEvent {
    double t = 0.0;
    std::vector<std::pair<double, double>> box;
};

struct CylinderResult {
    bool has_quadrature = false;
    double quadrature = 0.0;
    double monte_carlo = 0.0;
    double mc_se = 0.0;
    int mc_paths = 0;
};

namespace detail {

// nested one-coordinate cylinder value: Q_j(z) with closed-form erf innermost
inline double cylinder_1d(const std::vector<double>& dts, const std::vector<std::pair<double, double>>& iv,
                          std::size_t j, double z) {
    const double s = std::sqrt(4.0 * dts[j]);
    const double a = iv[j].first, b = iv[j].second;
    if (j + 1 == iv.size()) {
        const double ua = std::isinf(a) ? -1.0 : std::erf((a - z) / s);
        const double ub = std::isinf(b) ? 1.0 : std::erf((b - z) / s);
        return 0.5 * (ub - ua);
    }
    // finite integration range for the current level
    const double reach = 8.0 * std::sqrt(2.0 * dts[j]);
    const double lo = std::isinf(a) ? z - reach : std::max(a, z - reach);
    const double hi = std::isinf(b) ? z + reach : std::min(b, z + reach);
    if (!(hi > lo)) return 0.0;
    const auto f = [&](double y) {
        return std::pow(4.0 * M_PI * dts[j], -0.5) * std::exp(-(y - z) * (y - z) / (4.0 * dts[j])) *
               cylinder_1d(dts, iv, j + 1, y);
    };
    // panelled Gauss-Legendre
    const int panels = 4;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p)
        acc += gauss_legendre(f, lo + (hi - lo) * p / panels, lo + (hi - lo) * (p + 1) / panels);
    return acc;
}

} // namespace detail

// W_x of a cylinder set by two routes: nested diffusion quadrature (the
// reference; flat leaves, m <= 4) and Monte Carlo over sampled paths.
inline CylinderResult cylinder_probability(const LeafModel& leaf, const LeafPoint& x,
                                           const std::vector<CylinderEvent>& spec, double dt,
                                           int mc_paths, std::uint64_t seed) {
    if (spec.empty()) throw DomainError("wiener.cylinder_probability", "empty specification");
    for (std::size_t i = 0; i < spec.size(); ++i) {
        if (spec[i].t <= 0.0) throw DomainError("wiener.cylinder_probability", "times must be positive");
        if (i > 0 && spec[i].t <= spec[i - 1].t)
            throw DomainError("wiener.cylinder_probability", "times must increase");
        if (static_cast<int>(spec[i].box.size()) != leaf.dim())
            throw DomainError("wiener.cylinder_probability", "box dimension mismatch");
    }
    CylinderResult r;

    // quadrature route: flat leaves (the Gaussian kernel factorizes over
    // coordinates, so box cylinders reduce to one-dimensional nestings),
    // at most 4 times
    if (leaf.kind() != LeafKind::HyperbolicPlane && spec.size() <= 4) {
        std::vector<double> dts(spec.size());
        for (std::size_t i = 0; i < spec.size(); ++i)
            dts[i] = spec[i].t - (i == 0 ? 0.0 : spec[i - 1].t);
        double prod = 1.0;
        for (int c = 0; c < leaf.dim(); ++c) {
            std::vector<std::pair<double, double>> iv(spec.size());
            for (std::size_t i = 0; i < spec.size(); ++i)
                iv[i] = spec[i].box[static_cast<std::size_t>(c)];
            prod *= detail::cylinder_1d(dts, iv, 0, x[c]);
        }
        r.quadrature = prod;
        r.has_quadrature = true;
    }

    // Monte Carlo route
    const double T = spec.back().t;
    int hit = 0;
    for (int p = 0; p < mc_paths; ++p) {
        DiscretePath path = sample_path(leaf, x, T, dt, seed, static_cast<std::uint64_t>(p));
        bool ok = true;
        for (const auto& ev : spec) {
            const int k = path.grid_index(ev.t, "wiener.cylinder_probability");
            const LeafPoint pt = path.point(k);
            for (int c = 0; c < leaf.dim() && ok; ++c)
                ok = pt[c] >= ev.box[static_cast<std::size_t>(c)].first &&
                     pt[c] <= ev.box[static_cast<std::size_t>(c)].second;
            if (!ok) break;
        }
        if (ok) ++hit;
    }
    r.mc_paths = mc_paths;
    r.monte_carlo = static_cast<double>(hit) / mc_paths;
    r.mc_se = std::sqrt(std::max(r.monte_carlo * (1.0 - r.monte_carlo), 1.0 / mc_paths) /
                        static_cast<double>(mc_paths));
    return r;
}

} // namespace leaflyap

#endif
