// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_GEOMETRY_HPP
#define LEAFLYAP_GEOMETRY_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "leaflyap/errors.hpp"
#include "leaflyap/quadrature.hpp"

namespace leaflyap {

enum class LeafKind { EuclideanSpace, HyperbolicPlane, LineLeaf };

// Point of a model leaf in chart coordinates. HyperbolicPlane uses half-plane
// coordinates (x, y), y > 0.
struct LeafPoint {
    std::vector<double> c;

    LeafPoint() = default;
    explicit LeafPoint(std::vector<double> coords) : c(std::move(coords)) {}
    LeafPoint(double a, double b) : c{a, b} {}
    explicit LeafPoint(double a) : c{a} {}

    double operator[](std::size_t i) const { return c[i]; }
    std::size_t dim() const { return c.size(); }
};

// Geometry of a model leaf. All shipped leaves are complete with constant
// curvature; the (a, b) pair and the injectivity radius certify the
// bounded-geometry data each model carries.
class LeafModel {
public:
    static LeafModel euclidean(int n) {
        if (n < 1) throw DomainError("leaf-geometry.LeafModel", "dimension must be positive");
        LeafModel m;
        m.kind_ = LeafKind::EuclideanSpace;
        m.dim_ = n;
        m.curv_lo_ = 0.0;
        m.curv_hi_ = 0.0;
        return m;
    }

    static LeafModel hyperbolic_plane() {
        LeafModel m;
        m.kind_ = LeafKind::HyperbolicPlane;
        m.dim_ = 2;
        m.curv_lo_ = -1.0;
        m.curv_hi_ = -1.0;
        return m;
    }

    // Real line embedded as a lamination leaf. angle_rates gives the speed at
    // which each ambient angle coordinate advances per unit of leaf length;
    // the path sampler uses it for the winding record.
    static LeafModel line_leaf(std::vector<double> angle_rates = {}) {
        LeafModel m;
        m.kind_ = LeafKind::LineLeaf;
        m.dim_ = 1;
        m.curv_lo_ = 0.0;
        m.curv_hi_ = 0.0;
        m.angle_rates_ = std::move(angle_rates);
        return m;
    }

    LeafKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double curvature_lower() const { return curv_lo_; }
    double curvature_upper() const { return curv_hi_; }
    double injectivity_radius() const { return std::numeric_limits<double>::infinity(); }
    const std::vector<double>& angle_rates() const { return angle_rates_; }

    void validate_point(const LeafPoint& p, const std::string& where) const {
        if (static_cast<int>(p.dim()) != dim_)
            throw DomainError(where, "point dimension mismatch");
        for (double v : p.c)
            if (!std::isfinite(v)) throw DomainError(where, "non-finite coordinate");
        if (kind_ == LeafKind::HyperbolicPlane && p.c[1] <= 0.0)
            throw DomainError(where, "half-plane coordinate y must be positive");
    }

private:
    LeafKind kind_ = LeafKind::EuclideanSpace;
    int dim_ = 1;
    double curv_lo_ = 0.0;
    double curv_hi_ = 0.0;
    std::vector<double> angle_rates_;
};

// Leafwise scalar test function. known_laplacian, when set, is used directly
// and the finite-difference stencil becomes a cross-check.
struct ScalarField {
    std::function<double(const LeafPoint&)> eval;
    std::function<double(const LeafPoint&)> known_laplacian; // optional
    double support_radius = std::numeric_limits<double>::infinity();
};

inline double leaf_distance(const LeafModel& model, const LeafPoint& a, const LeafPoint& b) {
    switch (model.kind()) {
    case LeafKind::EuclideanSpace:
    case LeafKind::LineLeaf: {
        double s = 0.0;
        for (std::size_t i = 0; i < a.dim(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(s);
    }
    case LeafKind::HyperbolicPlane: {
        const double dx = a[0] - b[0], dy = a[1] - b[1];
        const double arg = 1.0 + (dx * dx + dy * dy) / (2.0 * a[1] * b[1]);
        // acosh(1+eps) loses digits for tiny eps; the sqrt form does not
        const double e = arg - 1.0;
        return std::log1p(e + std::sqrt(e * (e + 2.0)));
    }
    }
    return 0.0;
}

namespace detail {

// McKean-type integral for the hyperbolic-plane kernel under the generator
// Laplacian (heat equation dp/dt = \Delta p):
//   p_t(rho) = sqrt(2) (4 pi t)^{-3/2} e^{-t/4}
//              \int_rho^\infty s e^{-s^2/(4t)} / sqrt(cosh s - cosh rho) ds.
// The substitution s = rho + u^2 removes the inverse-sqrt endpoint
// singularity; the tail is truncated where the integrand drops below 1e-16
// of scale.
inline double hyperbolic_kernel_radial(double rho, double t, double rel_tol = 1e-8) {
    if (t <= 0.0) throw DomainError("leaf-geometry.heat_kernel", "nonpositive t");
    const double cr = std::cosh(rho);
    const auto integrand = [&](double u) {
        const double s = rho + u * u;
        const double d = std::cosh(s) - cr;
        if (d <= 0.0) {
            // u -> 0 limit: d ~ u^2 sinh(rho) for rho > 0, ~ u^4/2 at rho = 0
            if (rho > 0.0) return 2.0 * rho * std::exp(-rho * rho / (4.0 * t)) / std::sqrt(std::sinh(rho));
            return 0.0;
        }
        return 2.0 * u * s * std::exp(-s * s / (4.0 * t)) / std::sqrt(d);
    };
    // choose the upper limit so that the Gaussian factor is below 1e-16 scale
    double umax = std::sqrt(std::max(1.0, 10.0 * std::sqrt(t) + 4.0 * t - rho));
    while (true) {
        const double s = rho + umax * umax;
        if (std::exp(-s * s / (4.0 * t)) < 1e-18 || umax > 60.0) break;
        umax *= 1.3;
    }
    double integral = 0.0;
    // panelled adaptive Simpson keeps the recursion shallow near the peak
    const int panels = 8;
    for (int i = 0; i < panels; ++i) {
        const double a = umax * i / panels, b = umax * (i + 1) / panels;
        integral += adaptive_simpson(integrand, a, b, rel_tol, 1e-300);
    }
    const double pref = std::sqrt(2.0) * std::exp(-t / 4.0) / std::pow(4.0 * M_PI * t, 1.5);
    return pref * integral;
}

// Radial kernel table with linear interpolation; used where the hyperbolic
// kernel appears inside another quadrature.
class HyperbolicKernelTable {
public:
    HyperbolicKernelTable(double t, double rho_max, int n)
        : t_(t), rho_max_(rho_max), h_(rho_max / n) {
        values_.resize(static_cast<std::size_t>(n) + 1);
        for (std::size_t i = 0; i < values_.size(); ++i)
            values_[i] = hyperbolic_kernel_radial(static_cast<double>(i) * h_, t, 1e-9);
    }

    double operator()(double rho) const {
        if (rho >= rho_max_) return 0.0;
        const double s = rho / h_;
        const std::size_t i = std::min(values_.size() - 2, static_cast<std::size_t>(s));
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * values_[i] + w * values_[i + 1];
    }

    double t() const { return t_; }
    double rho_max() const { return rho_max_; }

private:
    double t_, rho_max_, h_;
    std::vector<double> values_;
};

} // namespace detail

// Transition density of leafwise Brownian motion with respect to the
// Riemannian volume, generator-Delta normalization.
inline double heat_kernel(const LeafModel& model, const LeafPoint& x, const LeafPoint& y, double t) {
    if (t <= 0.0) throw DomainError("leaf-geometry.heat_kernel", "nonpositive t");
    model.validate_point(x, "leaf-geometry.heat_kernel");
    model.validate_point(y, "leaf-geometry.heat_kernel");
    switch (model.kind()) {
    case LeafKind::EuclideanSpace:
    case LeafKind::LineLeaf: {
        const double d = leaf_distance(model, x, y);
        const int n = model.dim();
        return std::pow(4.0 * M_PI * t, -0.5 * n) * std::exp(-d * d / (4.0 * t));
    }
    case LeafKind::HyperbolicPlane:
        return detail::hyperbolic_kernel_radial(leaf_distance(model, x, y), t);
    }
    return 0.0;
}

// Geodesic exponential map on the hyperbolic plane: the point at distance rho
// from base in direction theta (theta = 0 points up the y-axis).
inline LeafPoint hyperbolic_exp(const LeafPoint& base, double rho, double theta) {
    // frame at i: rotate the vertical geodesic i e^rho by the elliptic
    // isometry fixing i (tangent rotation by theta = 2 alpha)
    const double ca = std::cos(0.5 * theta), sa = std::sin(0.5 * theta);
    const double wr = 0.0, wi = std::exp(rho);
    // (w ca + sa) / (-w sa + ca), complex arithmetic
    const double nr = wr * ca + sa, ni = wi * ca;
    const double dr = -wr * sa + ca, di = -wi * sa;
    const double den = dr * dr + di * di;
    const double zr = (nr * dr + ni * di) / den;
    const double zi = (ni * dr - nr * di) / den;
    return LeafPoint(base[0] + base[1] * zr, base[1] * zi);
}

namespace detail {

inline double stencil_laplacian(const LeafModel& model, const ScalarField& f, const LeafPoint& x,
                                double h) {
    switch (model.kind()) {
    case LeafKind::EuclideanSpace:
    case LeafKind::LineLeaf: {
        double acc = 0.0;
        const double fx = f.eval(x);
        for (int i = 0; i < model.dim(); ++i) {
            LeafPoint p = x, q = x;
            p.c[static_cast<std::size_t>(i)] += h;
            q.c[static_cast<std::size_t>(i)] -= h;
            acc += f.eval(p) + f.eval(q) - 2.0 * fx;
        }
        return acc / (h * h);
    }
    case LeafKind::HyperbolicPlane: {
        const double fx = f.eval(x);
        const LeafPoint px(x[0] + h, x[1]), mx(x[0] - h, x[1]);
        const LeafPoint py(x[0], x[1] + h), my(x[0], x[1] - h);
        const double flat =
            (f.eval(px) + f.eval(mx) + f.eval(py) + f.eval(my) - 4.0 * fx) / (h * h);
        return x[1] * x[1] * flat;
    }
    }
    return 0.0;
}

} // namespace detail

// Second-order central Laplace-Beltrami stencil. If the field carries a known
// Laplacian rule that rule wins and the stencil is only a cross-check.
inline double laplace_beltrami(const LeafModel& model, const ScalarField& f, const LeafPoint& x,
                               double h = 1e-3) {
    if (h <= 0.0) throw DomainError("leaf-geometry.laplace_beltrami", "nonpositive step");
    model.validate_point(x, "leaf-geometry.laplace_beltrami");
    if (f.known_laplacian) return f.known_laplacian(x);
    if (model.kind() == LeafKind::HyperbolicPlane) {
        // keep the stencil inside the chart
        while (x[1] - 2.0 * h <= 0.0) h *= 0.25;
        if (h < 1e-10)
            throw NumericError("leaf-geometry.laplace_beltrami", "step shrank below minimum near chart boundary");
    }
    return detail::stencil_laplacian(model, f, x, h);
}

// Stencil value ignoring any known rule, for cross-checks and oracles.
inline double laplace_beltrami_stencil(const LeafModel& model, const ScalarField& f,
                                       const LeafPoint& x, double h = 1e-3) {
    if (model.kind() == LeafKind::HyperbolicPlane) {
        while (x[1] - 2.0 * h <= 0.0) h *= 0.25;
        if (h < 1e-10)
            throw NumericError("leaf-geometry.laplace_beltrami", "step shrank below minimum near chart boundary");
    }
    return detail::stencil_laplacian(model, f, x, h);
}

// Two-level Richardson value, h and h/2.
inline double laplace_beltrami_richardson(const LeafModel& model, const ScalarField& f,
                                          const LeafPoint& x, double h = 1e-3) {
    const double c = laplace_beltrami_stencil(model, f, x, h);
    const double fine = laplace_beltrami_stencil(model, f, x, 0.5 * h);
    return (4.0 * fine - c) / 3.0;
}

} // namespace leaflyap

#endif
