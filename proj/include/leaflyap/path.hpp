// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_PATH_HPP
#define LEAFLYAP_PATH_HPP

#include <cmath>
#include <cstdint>
#include <memory>
#include <vector>

#include "leaflyap/errors.hpp"
#include "leaflyap/geometry.hpp"
#include "leaflyap/rng.hpp"

namespace leaflyap {

struct SamplerOptions {
    // wild steps beyond this many standard deviations of leaf distance are
    // redrawn (and counted); the default makes rejections ~1e-20 per step
    double wild_step_threshold_sigmas = 10.0;
};

// One sampled leafwise Brownian path on a dyadic-style time grid.
//
// Chart storage conventions (flat array, one block of `dim` per grid point):
//   EuclideanSpace(n): the n chart coordinates.
//   HyperbolicPlane:   (x, log y). Storing the log-height keeps horizons of
//                      hundreds of time units inside double range.
//   LineLeaf:          the cover coordinate s.
//
// Shift views share storage through the shared_ptr.
class DiscretePath {
public:
    LeafModel leaf;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t path_index = 0;
    int rejected_steps = 0;

    DiscretePath() = default;

    int n_steps() const { return n_steps_; }
    int dim() const { return leaf.dim(); }

    double coord(int k, int i) const {
        return (*data_)[static_cast<std::size_t>((offset_ + k) * dim() + i)];
    }

    // public-chart point (HyperbolicPlane converts log-height back to y)
    LeafPoint point(int k) const {
        std::vector<double> c(static_cast<std::size_t>(dim()));
        for (int i = 0; i < dim(); ++i) c[static_cast<std::size_t>(i)] = coord(k, i);
        if (leaf.kind() == LeafKind::HyperbolicPlane) c[1] = std::exp(c[1]);
        return LeafPoint(std::move(c));
    }

    LeafPoint start() const { return point(0); }
    LeafPoint end() const { return point(n_steps_); }

    // log-height at grid index (HyperbolicPlane only)
    double log_height(int k) const { return coord(k, 1); }

    // accumulated integer wraps of each ambient angle after step k
    // (LineLeaf with angle rates; empty otherwise)
    std::int64_t winding_at(int k, int angle) const {
        if (!winding_ || winding_->empty()) return 0;
        const int na = static_cast<int>(leaf.angle_rates().size());
        return (*winding_)[static_cast<std::size_t>((offset_ + k) * na + angle)];
    }

    int grid_index(double t, const char* where) const {
        const double s = t / dt;
        const double r = std::round(s);
        if (std::fabs(s - r) > 1e-9 * std::max(1.0, std::fabs(s)) + 1e-12)
            throw DomainError(where, "time off the path grid");
        const int k = static_cast<int>(r);
        if (k < 0 || k > n_steps_) throw DomainError(where, "time outside the path horizon");
        return k;
    }

    static DiscretePath from_storage(LeafModel leaf, double dt,
                                     std::shared_ptr<std::vector<double>> data,
                                     std::shared_ptr<std::vector<std::int64_t>> winding, int n_steps,
                                     std::uint64_t master, std::uint64_t index, int rejected) {
        DiscretePath p;
        p.leaf = std::move(leaf);
        p.dt = dt;
        p.horizon = dt * n_steps;
        p.data_ = std::move(data);
        p.winding_ = std::move(winding);
        p.n_steps_ = n_steps;
        p.master_seed = master;
        p.path_index = index;
        p.rejected_steps = rejected;
        return p;
    }

    DiscretePath shifted(int k_steps) const {
        DiscretePath p(*this);
        p.offset_ += k_steps;
        p.n_steps_ -= k_steps;
        p.horizon = p.dt * p.n_steps_;
        return p;
    }

private:
    std::shared_ptr<const std::vector<double>> data_;
    std::shared_ptr<const std::vector<std::int64_t>> winding_;
    int n_steps_ = 0;
    int offset_ = 0;
};

namespace detail {

inline void check_grid(double T, double dt, const char* where) {
    if (dt <= 0.0 || dt > 1.0 / 16.0) throw DomainError(where, "step dt must lie in (0, 1/16]");
    if (T <= 0.0) throw DomainError(where, "horizon T must be positive");
    const double n = T / dt;
    if (std::fabs(n - std::round(n)) > 1e-9 * n)
        throw DomainError(where, "T/dt must be an integer");
}

inline double hyperbolic_step_distance(double dx, double u0, double u1) {
    const double sh = std::sinh(0.5 * (u1 - u0));
    const double e = 2.0 * sh * sh + 0.5 * dx * dx * std::exp(-u0 - u1);
    return std::log1p(e + std::sqrt(e * (e + 2.0)));
}

// Core sampler shared by the plain and the extended samplers; the stream is
// chosen by the caller.
inline DiscretePath sample_path_stream(const LeafModel& leaf, const LeafPoint& x, double T, double dt,
                                       PathRng rng, std::uint64_t master_seed, std::uint64_t path_index,
                                       const SamplerOptions& opts) {
    check_grid(T, dt, "wiener.sample_path");
    leaf.validate_point(x, "wiener.sample_path");
    const int n = static_cast<int>(std::round(T / dt));
    const int dim = leaf.dim();

    auto data = std::make_shared<std::vector<double>>(static_cast<std::size_t>((n + 1) * dim));
    auto winding = std::make_shared<std::vector<std::int64_t>>();
    const auto& rates = leaf.angle_rates();
    const bool track_winding = leaf.kind() == LeafKind::LineLeaf && !rates.empty();
    if (track_winding) winding->resize(static_cast<std::size_t>((n + 1) * rates.size()), 0);

    const double sigma = std::sqrt(2.0 * dt);
    const double max_dist = opts.wild_step_threshold_sigmas * std::sqrt(2.0 * dt * dim);
    int rejected = 0;

    auto at = [&](int k, int i) -> double& {
        return (*data)[static_cast<std::size_t>(k * dim + i)];
    };

    for (int i = 0; i < dim; ++i) at(0, i) = x[i];
    if (leaf.kind() == LeafKind::HyperbolicPlane) at(0, 1) = std::log(x[1]);

    for (int k = 0; k < n; ++k) {
        while (true) {
            double dist = 0.0;
            switch (leaf.kind()) {
            case LeafKind::EuclideanSpace:
            case LeafKind::LineLeaf: {
                double s2 = 0.0;
                for (int i = 0; i < dim; ++i) {
                    const double d = sigma * rng.gaussian();
                    at(k + 1, i) = at(k, i) + d;
                    s2 += d * d;
                }
                dist = std::sqrt(s2);
                break;
            }
            case LeafKind::HyperbolicPlane: {
                const double u0 = at(k, 1);
                const double u1 = u0 + sigma * rng.gaussian() - dt;
                const double y0 = std::exp(u0), y1 = std::exp(u1);
                const double ybar2 = 0.5 * (y0 * y0 + y1 * y1);
                const double dx = std::sqrt(2.0 * ybar2 * dt) * rng.gaussian();
                at(k + 1, 0) = at(k, 0) + dx;
                at(k + 1, 1) = u1;
                dist = hyperbolic_step_distance(dx, u0, u1);
                break;
            }
            }
            if (dist <= max_dist) break;
            ++rejected;
        }
        if (track_winding) {
            const int na = static_cast<int>(rates.size());
            for (int a = 0; a < na; ++a) {
                const double th0 = at(k, 0) * rates[static_cast<std::size_t>(a)];
                const double th1 = at(k + 1, 0) * rates[static_cast<std::size_t>(a)];
                (*winding)[static_cast<std::size_t>((k + 1) * na + a)] =
                    static_cast<std::int64_t>(std::floor(th1)) -
                    static_cast<std::int64_t>(std::floor(th0)) +
                    (*winding)[static_cast<std::size_t>(k * na + a)];
            }
        }
    }
    return DiscretePath::from_storage(leaf, dt, std::move(data), std::move(winding), n, master_seed,
                                      path_index, rejected);
}

} // namespace detail

// Leafwise Brownian sampler under the generator-Delta convention:
// Euclidean increments have variance 2*dt per coordinate; the hyperbolic
// log-height is exact, log Y_{k+1} = log Y_k + sqrt(2 dt) g - dt, and the
// x-increment is conditionally Gaussian with variance 2 * dt * avg(Y^2)
// (trapezoidal average over the step). Deterministic given
// (master seed, path index).
inline DiscretePath sample_path(const LeafModel& leaf, const LeafPoint& x, double T, double dt,
                                std::uint64_t master_seed, std::uint64_t path_index = 0,
                                const SamplerOptions& opts = {}) {
    return detail::sample_path_stream(leaf, x, T, dt, PathRng(master_seed, path_index, 0),
                                      master_seed, path_index, opts);
}

// Shift transformation (T^t omega)(s) = omega(s+t); shares storage with the
// input, T^0 is the identity.
inline DiscretePath shift(const DiscretePath& path, double t) {
    const int k = path.grid_index(t, "wiener.shift");
    return path.shifted(k);
}

// Two forward-sampled halves glued at the start point, independent streams
// (substream 0 forward, substream 1 backward). The backward half stands in
// for the paper's backward-time construction; cocycle evaluation at negative
// times inverts the forward evaluation along it.
struct ExtendedPath {
    DiscretePath forward;
    DiscretePath backward;

    double horizon() const { return forward.horizon; }
    double dt() const { return forward.dt; }
};

inline ExtendedPath sample_extended_path(const LeafModel& leaf, const LeafPoint& x, double T,
                                         double dt, std::uint64_t master_seed,
                                         std::uint64_t path_index = 0,
                                         const SamplerOptions& opts = {}) {
    ExtendedPath e;
    e.forward = detail::sample_path_stream(leaf, x, T, dt, PathRng(master_seed, path_index, 0),
                                           master_seed, path_index, opts);
    e.backward = detail::sample_path_stream(leaf, x, T, dt, PathRng(master_seed, path_index, 1),
                                            master_seed, path_index, opts);
    return e;
}

} // namespace leaflyap

#endif
