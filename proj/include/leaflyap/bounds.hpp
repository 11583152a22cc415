// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_BOUNDS_HPP
#define LEAFLYAP_BOUNDS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "leaflyap/cocycle.hpp"
#include "leaflyap/lyapunov.hpp"
#include "leaflyap/quadrature.hpp"
#include "leaflyap/stats.hpp"

namespace leaflyap {

namespace detail {

inline std::vector<double> potential_totals_between(const CompiledCocycle& cc, const LeafModel& leaf,
                                                    const LeafPoint& x, const LeafPoint& y) {
    std::vector<double> totals(cc.potentials().size());
    for (std::size_t j = 0; j < totals.size(); ++j)
        totals[j] = cc.potentials()[j].value_on_cover(leaf, y) -
                    cc.potentials()[j].value_on_cover(leaf, x);
    return totals;
}

} // namespace detail

// The specialization f_{u,x}: y -> log ||A(path x->y, 1) u|| / ||u|| on a
// simply connected patch of the leaf; closed form for every spec whose
// wrappers normalize onto commuting generators. f_{u,x}(x) = 0 by the
// identity law.
inline ScalarField specialization(const CocycleSpec& spec, const LeafModel& leaf, const LeafPoint& x,
                                  const Vector& u) {
    if (spec.kind() == CocycleSpec::Kind::PathOrdered)
        throw CapabilityError("bounds.specialization",
                              "path-ordered specs have no patch-local closed form");
    if (u.norm() == 0.0) throw DomainError("bounds.specialization", "direction must be nonzero");
    auto cc = std::make_shared<CompiledCocycle>(spec);
    const Vector un = u / u.norm();
    ScalarField f;
    f.eval = [cc, leaf, x, un](const LeafPoint& y) {
        const CocycleValue v = cc->materialize(detail::potential_totals_between(*cc, leaf, x, y));
        return v.log_norm_applied(un);
    };
    return f;
}

struct DeltaFunctionals {
    double sup = 0.0;
    double inf = 0.0;
    Vector arg_sup;
    Vector arg_inf;
    double error_estimate = 0.0; // stencil error + optimization-gap estimate
};

namespace detail {

inline std::vector<Vector> sphere_samples(int d, int n, std::uint64_t seed) {
    std::vector<Vector> out;
    if (d == 1) {
        out.push_back(Vector::Ones(1));
        return out;
    }
    if (d == 2) {
        for (int i = 0; i < n; ++i) {
            const double th = M_PI * i / n; // antipodal pairs carry equal norms
            Vector u(2);
            u << std::cos(th), std::sin(th);
            out.push_back(u);
        }
        return out;
    }
    if (d == 3) {
        // golden-spiral hemisphere
        const double ga = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double z = (i + 0.5) / n; // upper hemisphere
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vector u(3);
            u << r * std::cos(ga * i), r * std::sin(ga * i), z;
            out.push_back(u);
        }
        return out;
    }
    PathRng rng(seed, 0, 3);
    for (int i = 0; i < n; ++i) {
        Vector u(d);
        for (int j = 0; j < d; ++j) u(j) = rng.gaussian();
        if (u.norm() == 0.0) continue;
        out.push_back(u / u.norm());
    }
    return out;
}

} // namespace detail

// delta-bar / delta-underbar: sup / inf over the unit sphere of the leafwise
// Laplacian of the specialization at x, by quasi-random sphere sampling plus
// projected-gradient refinement. Rank is capped at 8 by the sampling budget.
inline DeltaFunctionals delta_functionals(const CocycleSpec& spec, const LeafModel& leaf,
                                          const LeafPoint& x, int sphere_samples = 2048,
                                          int refine_steps = 50, double stencil_h = 1e-3) {
    const int d = spec.rank();
    if (d > 8)
        throw CapabilityError("bounds.delta_functionals", "rank above the sphere sampling budget (8)");
    const auto F = [&](const Vector& u) {
        const ScalarField f = specialization(spec, leaf, x, u);
        return laplace_beltrami_stencil(leaf, f, x, stencil_h);
    };
    auto samples = detail::sphere_samples(d, sphere_samples, 2048);

    std::vector<std::pair<double, Vector>> scored;
    scored.reserve(samples.size());
    for (const auto& u : samples) scored.emplace_back(F(u), u);
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });

    const auto refine = [&](Vector u, double sign) {
        double val = sign * F(u);
        double eta = 0.1;
        const double eps = 1e-5;
        for (int it = 0; it < refine_steps && d > 1; ++it) {
            Vector g(d);
            for (int j = 0; j < d; ++j) {
                Vector up = u, um = u;
                up(j) += eps;
                um(j) -= eps;
                g(j) = sign * (F(up / up.norm()) - F(um / um.norm())) / (2.0 * eps);
            }
            g -= g.dot(u) * u;
            if (g.norm() < 1e-12) break;
            Vector cand = (u + eta * g).normalized();
            double cv = sign * F(cand);
            while (cv < val && eta > 1e-6) {
                eta *= 0.5;
                cand = (u + eta * g).normalized();
                cv = sign * F(cand);
            }
            if (cv <= val) break;
            u = cand;
            val = cv;
        }
        return std::make_pair(sign * val, u);
    };

    // refine the best few starts on each side
    const int starts = std::min<int>(8, static_cast<int>(scored.size()));
    std::vector<std::pair<double, Vector>> top, bot;
    for (int i = 0; i < starts; ++i) top.push_back(refine(scored[static_cast<std::size_t>(i)].second, +1.0));
    for (int i = 0; i < starts; ++i)
        bot.push_back(refine(scored[scored.size() - 1 - static_cast<std::size_t>(i)].second, -1.0));
    std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::sort(bot.begin(), bot.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    DeltaFunctionals out;
    out.sup = top.front().first;
    out.arg_sup = top.front().second;
    out.inf = bot.front().first;
    out.arg_inf = bot.front().second;

    // optimization gap: spread of the top-5 refined local optima
    double gap = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, top.size()); ++i)
        gap = std::max(gap, std::fabs(top.front().first - top[i].first));
    for (std::size_t i = 0; i < std::min<std::size_t>(5, bot.size()); ++i)
        gap = std::max(gap, std::fabs(bot.front().first - bot[i].first));
    // stencil error via the two-level Richardson difference at the argmax
    const ScalarField fs = specialization(spec, leaf, x, out.arg_sup);
    const double stencil_err = std::fabs(laplace_beltrami_richardson(leaf, fs, x, stencil_h) -
                                         laplace_beltrami_stencil(leaf, fs, x, stencil_h));
    out.error_estimate = gap + stencil_err;
    return out;
}

struct ChiBounds {
    double chi_max_upper = 0.0; // mean of delta-sup over mu
    double chi_max_lower = 0.0; // mean of delta-inf over mu
    double chi_min_upper = 0.0; // = -chi_max_lower of the dual
    double chi_min_lower = 0.0; // = -chi_max_upper of the dual
    double se_max_upper = 0.0, se_max_lower = 0.0, se_min_upper = 0.0, se_min_lower = 0.0;
};

// Integral bounds for the extreme exponents: Monte Carlo averages of the
// delta functionals over mu-samples; the min side is computed through the
// dual spec. In per-leaf mode (no finite mu) the single-point values stand in
// for the integrals, which is valid when delta is leafwise constant.
inline ChiBounds chi_bounds(const CocycleSpec& spec, const LaminationModel& model,
                            const HarmonicMeasureModel& mu, int n_mc = 64, std::uint64_t seed = 11,
                            int sphere_samples = 512, int refine_steps = 30) {
    const CocycleSpec dual_spec = dual(spec);
    const LeafModel leaf = model.leaf_model();
    std::vector<double> sup_v, inf_v, dsup_v, dinf_v;

    const auto eval_at = [&](const CocycleSpec& s, const LeafPoint& p) {
        return delta_functionals(s, leaf, p, sphere_samples, refine_steps);
    };

    if (mu.is_dirac() || model.kind() == LaminationKind::SingleHyperbolicLeaf) {
        const AmbientPoint a =
            mu.is_dirac() ? mu.dirac_point() : model.base_point();
        const LeafPoint p = model.kind() == LaminationKind::SingleHyperbolicLeaf
                                ? LeafPoint(a[0], a[1])
                                : LeafPoint(0.0);
        const DeltaFunctionals base = eval_at(spec, p);
        const DeltaFunctionals dl = eval_at(dual_spec, p);
        sup_v = {base.sup};
        inf_v = {base.inf};
        dsup_v = {dl.sup};
        dinf_v = {dl.inf};
    } else {
        for (int i = 0; i < n_mc; ++i) {
            PathRng rng(seed, static_cast<std::uint64_t>(i), 2);
            const AmbientPoint a = mu.sample(rng);
            const CocycleSpec sp = rebind_spec(spec, a);
            const CocycleSpec dsp = rebind_spec(dual_spec, a);
            const DeltaFunctionals b = eval_at(sp, LeafPoint(0.0));
            const DeltaFunctionals dd = eval_at(dsp, LeafPoint(0.0));
            sup_v.push_back(b.sup);
            inf_v.push_back(b.inf);
            dsup_v.push_back(dd.sup);
            dinf_v.push_back(dd.inf);
        }
    }
    const MeanSe ms = mean_se(sup_v), mi = mean_se(inf_v), ds = mean_se(dsup_v), di = mean_se(dinf_v);
    ChiBounds cb;
    cb.chi_max_upper = ms.mean;
    cb.se_max_upper = ms.se;
    cb.chi_max_lower = mi.mean;
    cb.se_max_lower = mi.se;
    cb.chi_min_lower = -ds.mean;
    cb.se_min_lower = ds.se;
    cb.chi_min_upper = -di.mean;
    cb.se_min_upper = di.se;
    return cb;
}

struct CandelEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Candel's integral: Re \int (delta alpha) dmu for a rank-1 spec, where
// delta alpha(x) is the leafwise Laplacian of the cover potential.
inline CandelEstimate candel_exponent(const CocycleSpec& spec, const LaminationModel& model,
                                      const HarmonicMeasureModel& mu, int n_mc = 256,
                                      std::uint64_t seed = 12, double stencil_h = 1e-3) {
    if (spec.rank() != 1)
        throw DomainError("bounds.candel_exponent", "Candel's formula applies to rank-1 specs");
    const LeafModel leaf = model.leaf_model();
    const Vector u1 = Vector::Ones(1);
    const auto delta_at = [&](const CocycleSpec& s, const LeafPoint& p) {
        const ScalarField f = specialization(s, leaf, p, u1);
        return laplace_beltrami_stencil(leaf, f, p, stencil_h);
    };
    CandelEstimate est;
    if (mu.is_dirac() || model.kind() == LaminationKind::SingleHyperbolicLeaf) {
        const AmbientPoint a = mu.is_dirac() ? mu.dirac_point() : model.base_point();
        const LeafPoint p = model.kind() == LaminationKind::SingleHyperbolicLeaf
                                ? LeafPoint(a[0], a[1])
                                : LeafPoint(0.0);
        est.value = delta_at(spec, p);
        return est;
    }
    std::vector<double> vals;
    for (int i = 0; i < n_mc; ++i) {
        PathRng rng(seed, static_cast<std::uint64_t>(i), 2);
        const AmbientPoint a = mu.sample(rng);
        vals.push_back(delta_at(rebind_spec(spec, a), LeafPoint(0.0)));
    }
    const MeanSe m = mean_se(vals);
    est.value = m.mean;
    est.se = m.se;
    return est;
}

struct PhiFunctional {
    int n = 1;
    double route_mc = 0.0;    // (1/n) E log ||A(omega, n) u|| by Monte Carlo
    double route_mc_se = 0.0;
    double route_quadrature = 0.0; // (1/n) sum_i D_i phi by nested quadrature
};

namespace detail {

// closed-form one-coordinate reduction of a compiled spec: all shipped
// potentials are driven by one scalar leaf coordinate whose unit-time
// transition is Gaussian with variance 2 (drift -1 for the Busemann
// coordinate, 0 on flat leaves)
struct ScalarDrive {
    bool busemann = false; // otherwise the flat cover coordinate
    double drift() const { return busemann ? -1.0 : 0.0; }

    LeafPoint point(double s) const {
        if (busemann) return LeafPoint(0.0, std::exp(s));
        return LeafPoint(s);
    }
};

inline ScalarDrive scalar_drive(const CompiledCocycle& cc, const char* where) {
    bool buse = false, flat = false;
    for (const auto& p : cc.potentials()) {
        if (p.kind == Potential::Kind::Busemann)
            buse = true;
        else
            flat = true;
    }
    if (buse && flat)
        throw CapabilityError(where, "mixed potential drives have no one-coordinate reduction");
    ScalarDrive d;
    d.busemann = buse;
    return d;
}

} // namespace detail

// phi(x,u) and phi_n(x,u) by two routes: Monte Carlo of
// (1/n) log||A(omega,n)u|| and the nested-diffusion average
// (1/n) sum_{i<n} D_i phi evaluated by one-coordinate Gaussian quadrature.
inline PhiFunctional phi_functional(const CocycleSpec& spec, const LeafModel& leaf, const LeafPoint& x,
                                    const Vector& u, int n, int mc_paths = 4000,
                                    std::uint64_t seed = 13, double dt = 1.0 / 32.0) {
    if (n < 1 || n > 4)
        throw DomainError("bounds.phi_functional", "the nested route supports 1 <= n <= 4");
    const CompiledCocycle cc(spec);
    const Vector un = u / u.norm();

    PhiFunctional out;
    out.n = n;

    // route A: Monte Carlo
    {
        std::vector<double> vals(static_cast<std::size_t>(mc_paths));
        for (int p = 0; p < mc_paths; ++p) {
            const DiscretePath path =
                sample_path(leaf, x, static_cast<double>(n), dt, seed, static_cast<std::uint64_t>(p));
            CocycleFold fold(cc, path);
            fold.advance_to(path.n_steps());
            vals[static_cast<std::size_t>(p)] = fold.value().log_norm_applied(un) / n;
        }
        const MeanSe m = mean_se(vals);
        out.route_mc = m.mean;
        out.route_mc_se = m.se;
    }

    // route B: one-coordinate reduction
    const detail::ScalarDrive drive = detail::scalar_drive(cc, "bounds.phi_functional");
    const double s0 = drive.busemann ? std::log(x[1]) : x[0];
    const LeafPoint origin = drive.point(s0);
    (void)origin;
    const auto transport = [&](double s) {
        // direction at leaf coordinate s, transported from (x, u)
        const CocycleValue v =
            cc.materialize(detail::potential_totals_between(cc, leaf, drive.point(s0), drive.point(s)));
        Vector w = v.matrix * un;
        return (w / w.norm()).eval();
    };
    const auto g = [&](double s) {
        const Vector vs = transport(s);
        return normal_expectation([&](double z) {
            const double s1 = s + std::sqrt(2.0) * z + drive.drift();
            const CocycleValue v = cc.materialize(
                detail::potential_totals_between(cc, leaf, drive.point(s), drive.point(s1)));
            return v.log_norm_applied(vs);
        });
    };
    double acc = g(s0); // i = 0 term
    for (int i = 1; i < n; ++i) {
        acc += normal_expectation([&](double w) {
            const double s = s0 + std::sqrt(2.0 * i) * w + drive.drift() * i;
            return g(s);
        });
    }
    out.route_quadrature = acc / n;
    return out;
}

struct ProjectiveState {
    std::vector<double> weights;
    int sweeps = 0;
    double last_tv_change = 0.0;
    bool converged = false;
};

struct LedrappierFixedPoint {
    ProjectiveState state;
    double value = 0.0;    // integral of phi against the fixed point
    double value_se = 0.0; // Monte Carlo error of the phi table
    int matched_index = -1;
};

struct LedrappierResult {
    std::vector<LedrappierFixedPoint> fixed_points;
    std::vector<ProjectiveState> non_converged;
    std::vector<Vector> grid; // node directions
};

// Ledrappier-type spectrum characterization at desk scale: iterate the
// MC-discretized projectivized transfer operator on a grid measure until the
// total-variation change drops below 1e-4, from several initial seeds;
// report the integral of phi against each distinct fixed point.
inline LedrappierResult ledrappier_check(const CocycleSpec& spec, const LeafModel& leaf,
                                         const LeafPoint& x, int grid_res = 720, int max_sweeps = 200,
                                         int mc_paths = 1024, std::uint64_t seed = 14,
                                         const SpectrumEstimate* match = nullptr,
                                         double dt = 1.0 / 16.0) {
    const int d = spec.rank();
    if (d > 3)
        throw CapabilityError("bounds.ledrappier_check", "projective grid budget supports rank <= 3");
    const CompiledCocycle cc(spec);

    LedrappierResult result;
    // grid directions
    if (d == 1) {
        result.grid.push_back(Vector::Ones(1));
    } else if (d == 2) {
        for (int b = 0; b < grid_res; ++b) {
            const double th = M_PI * (b + 0.5) / grid_res;
            Vector v(2);
            v << std::cos(th), std::sin(th);
            result.grid.push_back(v);
        }
    } else {
        // icosphere nodes with antipodal identification
        std::vector<Vector> verts;
        const double phi = 0.5 * (1.0 + std::sqrt(5.0));
        const double base[12][3] = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                                    {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                                    {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
        std::vector<std::array<int, 3>> faces = {{0, 11, 5},  {0, 5, 1},   {0, 1, 7},  {0, 7, 10},
                                                 {0, 10, 11}, {1, 5, 9},   {5, 11, 4}, {11, 10, 2},
                                                 {10, 7, 6},  {7, 1, 8},   {3, 9, 4},  {3, 4, 2},
                                                 {3, 2, 6},   {3, 6, 8},   {3, 8, 9},  {4, 9, 5},
                                                 {2, 4, 11},  {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
        for (auto& b : base) {
            Vector v(3);
            v << b[0], b[1], b[2];
            verts.push_back(v.normalized());
        }
        std::map<std::pair<int, int>, int> midcache;
        const auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midcache.find(key);
            if (it != midcache.end()) return it->second;
            const Vector m = (verts[static_cast<std::size_t>(a)] + verts[static_cast<std::size_t>(b)]).normalized();
            verts.push_back(m);
            const int idx = static_cast<int>(verts.size()) - 1;
            midcache.emplace(key, idx);
            return idx;
        };
        for (int level = 0; level < 4; ++level) {
            std::vector<std::array<int, 3>> next;
            for (const auto& f : faces) {
                const int a = midpoint(f[0], f[1]);
                const int b = midpoint(f[1], f[2]);
                const int c = midpoint(f[2], f[0]);
                next.push_back({f[0], a, c});
                next.push_back({f[1], b, a});
                next.push_back({f[2], c, b});
                next.push_back({a, b, c});
            }
            faces = std::move(next);
        }
        // antipodal identification: keep canonical representatives
        for (const auto& v : verts) {
            Vector c = v;
            for (int i = 0; i < 3; ++i) {
                if (std::fabs(c(i)) > 1e-12) {
                    if (c(i) < 0) c = -c;
                    break;
                }
            }
            bool dup = false;
            for (const auto& w : result.grid)
                if ((w - c).norm() < 1e-9) {
                    dup = true;
                    break;
                }
            if (!dup) result.grid.push_back(c);
        }
    }
    const int nb = static_cast<int>(result.grid.size());

    const auto bin_of = [&](const Vector& v) {
        if (d == 1) return 0;
        if (d == 2) {
            double th = std::atan2(v(1), v(0));
            if (th < 0) th += M_PI;
            if (th >= M_PI) th -= M_PI;
            int b = static_cast<int>(th / M_PI * grid_res);
            return std::min(b, grid_res - 1);
        }
        // nearest node up to sign
        int best = 0;
        double bestdot = -1.0;
        for (int i = 0; i < nb; ++i) {
            const double dd = std::fabs(result.grid[static_cast<std::size_t>(i)].dot(v));
            if (dd > bestdot) {
                bestdot = dd;
                best = i;
            }
        }
        return best;
    };

    // fixed ensemble of unit-time path moves (the MC discretization of the
    // one-step diffusion on X x P); reusing it across sweeps makes every
    // sweep the same Markov matrix
    std::vector<Matrix> moves;
    std::vector<double> move_log_scale;
    for (int p = 0; p < mc_paths; ++p) {
        const DiscretePath path = sample_path(leaf, x, 1.0, dt, seed, static_cast<std::uint64_t>(p));
        CocycleFold fold(cc, path);
        fold.advance_to(path.n_steps());
        const CocycleValue v = fold.value();
        moves.push_back(v.matrix);
        move_log_scale.push_back(v.log_scale);
    }

    // phi table on the grid (shared Monte Carlo ensemble)
    std::vector<double> phi_table(static_cast<std::size_t>(nb), 0.0);
    std::vector<double> phi_se(static_cast<std::size_t>(nb), 0.0);
    for (int b = 0; b < nb; ++b) {
        std::vector<double> vals(moves.size());
        for (std::size_t j = 0; j < moves.size(); ++j)
            vals[j] = std::log((moves[j] * result.grid[static_cast<std::size_t>(b)]).norm()) +
                      move_log_scale[j];
        const MeanSe m = mean_se(vals);
        phi_table[static_cast<std::size_t>(b)] = m.mean;
        phi_se[static_cast<std::size_t>(b)] = m.se;
    }

    // precompute the push map: node -> pushed bins per move
    std::vector<std::vector<int>> pushed(static_cast<std::size_t>(nb),
                                         std::vector<int>(moves.size()));
    for (int b = 0; b < nb; ++b)
        for (std::size_t j = 0; j < moves.size(); ++j) {
            Vector w = moves[j] * result.grid[static_cast<std::size_t>(b)];
            pushed[static_cast<std::size_t>(b)][j] = bin_of(w / w.norm());
        }

    // seeds: one Dirac per eigen-direction (the candidate invariant blocks)
    // plus a spread interior seed
    std::vector<std::vector<double>> seeds;
    {
        std::vector<int> axis_bins;
        // use the compiled basis columns when available; fall back to axes
        Eigen::EigenSolver<Matrix> es(moves.front());
        for (int i = 0; i < d; ++i) {
            Vector col;
            if (es.info() == Eigen::Success && es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-9) {
                col = es.eigenvectors().real().col(i);
            } else {
                col = Vector::Zero(d);
                col(i) = 1.0;
            }
            if (col.norm() == 0.0) continue;
            axis_bins.push_back(bin_of(col.normalized()));
        }
        for (int b : axis_bins) {
            std::vector<double> w(static_cast<std::size_t>(nb), 0.0);
            w[static_cast<std::size_t>(b)] = 1.0;
            seeds.push_back(std::move(w));
        }
        seeds.push_back(std::vector<double>(static_cast<std::size_t>(nb), 1.0 / nb));
    }

    for (auto w : seeds) {
        ProjectiveState st;
        st.weights = w;
        for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
            std::vector<double> nw(static_cast<std::size_t>(nb), 0.0);
            for (int b = 0; b < nb; ++b) {
                const double mass = st.weights[static_cast<std::size_t>(b)];
                if (mass == 0.0) continue;
                const double share = mass / static_cast<double>(moves.size());
                for (std::size_t j = 0; j < moves.size(); ++j)
                    nw[static_cast<std::size_t>(pushed[static_cast<std::size_t>(b)][j])] += share;
            }
            double tv = 0.0;
            for (int b = 0; b < nb; ++b)
                tv += std::fabs(nw[static_cast<std::size_t>(b)] - st.weights[static_cast<std::size_t>(b)]);
            tv *= 0.5;
            st.weights = std::move(nw);
            st.sweeps = sweep;
            st.last_tv_change = tv;
            if (tv < 1e-4) {
                st.converged = true;
                break;
            }
        }
        if (!st.converged) {
            result.non_converged.push_back(std::move(st));
            continue;
        }
        // integral of phi against the fixed point
        double value = 0.0, vse = 0.0;
        for (int b = 0; b < nb; ++b) {
            value += st.weights[static_cast<std::size_t>(b)] * phi_table[static_cast<std::size_t>(b)];
            vse = std::max(vse, st.weights[static_cast<std::size_t>(b)] > 1e-6
                                    ? phi_se[static_cast<std::size_t>(b)]
                                    : 0.0);
        }
        // dedupe against already-recorded fixed points
        bool dup = false;
        for (const auto& fp : result.fixed_points) {
            double tvd = 0.0;
            for (int b = 0; b < nb; ++b)
                tvd += std::fabs(fp.state.weights[static_cast<std::size_t>(b)] -
                                 st.weights[static_cast<std::size_t>(b)]);
            if (0.5 * tvd < 0.05) {
                dup = true;
                break;
            }
        }
        if (dup) continue;
        LedrappierFixedPoint fp;
        fp.state = std::move(st);
        fp.value = value;
        fp.value_se = vse;
        if (match) {
            for (std::size_t i = 0; i < match->exponents.size(); ++i)
                if (std::fabs(match->exponents[i] - value) < 0.1) fp.matched_index = static_cast<int>(i);
        }
        result.fixed_points.push_back(std::move(fp));
    }
    return result;
}

} // namespace leaflyap

#endif
