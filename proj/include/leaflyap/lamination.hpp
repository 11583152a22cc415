// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_LAMINATION_HPP
#define LEAFLYAP_LAMINATION_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "leaflyap/diffusion.hpp"
#include "leaflyap/errors.hpp"
#include "leaflyap/geometry.hpp"
#include "leaflyap/quadrature.hpp"
#include "leaflyap/rng.hpp"

namespace leaflyap {

struct AmbientPoint {
    std::vector<double> c;

    AmbientPoint() = default;
    AmbientPoint(double a, double b) : c{a, b} {}
    double operator[](std::size_t i) const { return c[i]; }
};

inline double frac(double x) { return x - std::floor(x); }

// Bounded measurable test function on the ambient space.
struct AmbientField {
    std::function<double(const AmbientPoint&)> eval;
    bool compactly_supported = true; // ambient spaces here are compact except the single leaf
};

enum class LaminationKind { KroneckerTorus, SingleHyperbolicLeaf, SuspensionLine };

// One chart of the lamination: plaque coordinate p along the leaf direction,
// transversal coordinate tau.
struct FlowBox {
    int id = 0;
    AmbientPoint center;
    double half_plaque = 0.0;
    double half_transversal = 0.0;
};

// Concrete laminations carrying the shipped harmonic measures.
//
//   KroneckerTorus(slope): the torus foliated by lines of irrational slope;
//     leaves are copies of R, Lebesgue is harmonic.
//   SingleHyperbolicLeaf: the hyperbolic plane as a single leaf; "per-path
//     mode" with a configured base point (no finite harmonic measure).
//   SuspensionLine(angle): suspension of a rigid circle rotation; leaves are
//     lines, the product Lebesgue measure is harmonic, the transverse
//     holonomy is isometric.
class LaminationModel {
public:
    static LaminationModel kronecker_torus(double slope) {
        if (slope == 0.0) throw DomainError("lamination-models.LaminationModel", "slope must be nonzero");
        LaminationModel m;
        m.kind_ = LaminationKind::KroneckerTorus;
        m.slope_ = slope;
        const double n = std::sqrt(1.0 + slope * slope);
        m.dir_ = {1.0 / n, slope / n};
        return m;
    }

    static LaminationModel single_hyperbolic_leaf(double base_x = 0.0, double base_y = 1.0) {
        LaminationModel m;
        m.kind_ = LaminationKind::SingleHyperbolicLeaf;
        m.base_ = AmbientPoint(base_x, base_y);
        return m;
    }

    static LaminationModel suspension_line(double rotation) {
        LaminationModel m;
        m.kind_ = LaminationKind::SuspensionLine;
        m.rotation_ = rotation;
        m.dir_ = {1.0, 0.0};
        return m;
    }

    LaminationKind kind() const { return kind_; }
    double slope() const { return slope_; }
    double rotation() const { return rotation_; }
    const AmbientPoint& base_point() const { return base_; }

    // leaf_factory: the model leaf through an ambient point (constant along
    // each leaf for all shipped models)
    LeafModel leaf_model() const {
        switch (kind_) {
        case LaminationKind::KroneckerTorus:
            return LeafModel::line_leaf({dir_[0], dir_[1]});
        case LaminationKind::SingleHyperbolicLeaf:
            return LeafModel::hyperbolic_plane();
        case LaminationKind::SuspensionLine:
            return LeafModel::line_leaf({1.0});
        }
        return LeafModel::euclidean(1);
    }

    // embedding of the leaf chart into ambient coordinates (line-leaf models)
    AmbientPoint embed(const AmbientPoint& base, double s) const {
        switch (kind_) {
        case LaminationKind::KroneckerTorus:
            return AmbientPoint(frac(base[0] + s * dir_[0]), frac(base[1] + s * dir_[1]));
        case LaminationKind::SuspensionLine: {
            const double t = base[0] + s;
            return AmbientPoint(frac(t), frac(base[1] + std::floor(t) * rotation_ -
                                              std::floor(base[0]) * rotation_));
        }
        case LaminationKind::SingleHyperbolicLeaf:
            throw DomainError("lamination-models.embed", "two-dimensional leaf has no line embedding");
        }
        return base;
    }

    std::vector<FlowBox> flow_box_atlas() const {
        std::vector<FlowBox> boxes;
        switch (kind_) {
        case LaminationKind::KroneckerTorus: {
            int id = 0;
            for (double cx : {0.25, 0.75})
                for (double cy : {0.25, 0.75})
                    boxes.push_back(FlowBox{id++, AmbientPoint(cx, cy), 0.45, 0.45});
            break;
        }
        case LaminationKind::SuspensionLine:
            boxes.push_back(FlowBox{0, AmbientPoint(0.5, 0.5), 0.48, 0.5});
            boxes.push_back(FlowBox{1, AmbientPoint(0.0, 0.5), 0.48, 0.5});
            break;
        case LaminationKind::SingleHyperbolicLeaf:
            boxes.push_back(FlowBox{0, base_, 0.0, 0.0}); // one chart, trivial transversal
            break;
        }
        return boxes;
    }

    // flow-box chart: ambient -> (plaque p, transversal tau); wraps to the
    // representative nearest the box center
    bool box_chart(const FlowBox& b, const AmbientPoint& q, double& p, double& tau) const {
        auto wrap = [](double v) { return v - std::round(v); };
        switch (kind_) {
        case LaminationKind::KroneckerTorus: {
            const double dx = wrap(q[0] - b.center[0]);
            const double dy = wrap(q[1] - b.center[1]);
            p = dx * dir_[0] + dy * dir_[1];
            tau = -dx * dir_[1] + dy * dir_[0];
            return std::fabs(p) < b.half_plaque && std::fabs(tau) < b.half_transversal;
        }
        case LaminationKind::SuspensionLine: {
            p = wrap(q[0] - b.center[0]);
            // transversal = fiber value where the plaque meets the box center
            // line; plaques of the seam box jump by the rotation at t = 0
            if (b.id == 0) {
                tau = q[1];
            } else {
                tau = p >= 0.0 ? q[1] : frac(q[1] + rotation_);
            }
            return std::fabs(p) < b.half_plaque;
        }
        case LaminationKind::SingleHyperbolicLeaf:
            p = 0.0;
            tau = 0.0;
            return true;
        }
        return false;
    }

    AmbientPoint box_point(const FlowBox& b, double p, double tau) const {
        switch (kind_) {
        case LaminationKind::KroneckerTorus:
            return AmbientPoint(frac(b.center[0] + p * dir_[0] - tau * dir_[1]),
                                frac(b.center[1] + p * dir_[1] + tau * dir_[0]));
        case LaminationKind::SuspensionLine: {
            if (b.id == 0) return AmbientPoint(frac(b.center[0] + p), tau);
            return AmbientPoint(frac(p), p >= 0.0 ? tau : frac(tau - rotation_));
        }
        case LaminationKind::SingleHyperbolicLeaf:
            return base_;
        }
        return b.center;
    }

    std::string id() const {
        switch (kind_) {
        case LaminationKind::KroneckerTorus: return "kronecker_torus";
        case LaminationKind::SingleHyperbolicLeaf: return "hyperbolic_leaf";
        case LaminationKind::SuspensionLine: return "suspension_line";
        }
        return "?";
    }

private:
    LaminationKind kind_ = LaminationKind::KroneckerTorus;
    double slope_ = 0.0;
    double rotation_ = 0.0;
    std::array<double, 2> dir_{1.0, 0.0};
    AmbientPoint base_{0.0, 1.0};
};

// Sampler plus decomposition data for the measure mu. All shipped measures
// have leafwise density h_t = 1 on their plaques; the decomposition fields
// stay in the type for the chi-square marginal test.
class HarmonicMeasureModel {
public:
    enum class Kind { LebesgueTorus, ProductSuspension, Dirac };

    static HarmonicMeasureModel lebesgue_torus() { return HarmonicMeasureModel(Kind::LebesgueTorus, {}); }
    static HarmonicMeasureModel product_suspension() {
        return HarmonicMeasureModel(Kind::ProductSuspension, {});
    }
    static HarmonicMeasureModel dirac(AmbientPoint p) { return HarmonicMeasureModel(Kind::Dirac, p); }

    Kind kind() const { return kind_; }
    bool is_dirac() const { return kind_ == Kind::Dirac; }
    const AmbientPoint& dirac_point() const { return point_; }

    AmbientPoint sample(PathRng& rng) const {
        switch (kind_) {
        case Kind::LebesgueTorus:
        case Kind::ProductSuspension:
            return AmbientPoint(rng.uniform(), rng.uniform());
        case Kind::Dirac:
            return point_;
        }
        return point_;
    }

    // constant leafwise density on every plaque
    double leafwise_density() const { return 1.0; }

    std::string id() const {
        switch (kind_) {
        case Kind::LebesgueTorus: return "lebesgue";
        case Kind::ProductSuspension: return "product_lebesgue";
        case Kind::Dirac: return "dirac";
        }
        return "?";
    }

private:
    HarmonicMeasureModel(Kind k, AmbientPoint p) : kind_(k), point_(std::move(p)) {}
    Kind kind_;
    AmbientPoint point_;
};

inline AmbientPoint sample_mu(const HarmonicMeasureModel& mu, PathRng& rng) { return mu.sample(rng); }

struct HarmonicityReport {
    double residual = 0.0;
    double standard_error = 0.0; // zero for quadrature estimates
    bool monte_carlo = false;
};

namespace detail {

// leafwise D_t f at an ambient point of a line-leaf lamination
inline double line_leaf_diffusion(const LaminationModel& model, const AmbientField& f,
                                  const AmbientPoint& p, double t) {
    const double s = std::sqrt(2.0 * t);
    return normal_expectation([&](double z) { return f.eval(model.embed(p, s * z)); });
}

// torus / suspension quadrature of an ambient function against Lebesgue
template <typename G>
double unit_square_quadrature(const G& g, int res) {
    double acc = 0.0;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j)
            acc += g(AmbientPoint((i + 0.5) / res, (j + 0.5) / res));
    return acc / (static_cast<double>(res) * res);
}

} // namespace detail

// |∫ D_t f dmu − ∫ f dmu|: quadrature for the flat models against their
// Lebesgue measures, Monte Carlo for Dirac measures (with standard error).
inline HarmonicityReport check_very_weak_harmonicity(const LaminationModel& model,
                                                     const HarmonicMeasureModel& mu,
                                                     const AmbientField& f, double t,
                                                     int resolution = 512,
                                                     int mc_paths = 20000,
                                                     std::uint64_t seed = 1) {
    if (t <= 0.0) throw DomainError("lamination-models.check_very_weak_harmonicity", "t must be positive");
    HarmonicityReport rep;
    switch (model.kind()) {
    case LaminationKind::KroneckerTorus:
    case LaminationKind::SuspensionLine: {
        if (mu.is_dirac()) {
            // Monte Carlo of D_t f at the atom
            const AmbientPoint p0 = mu.dirac_point();
            const double s = std::sqrt(2.0 * t);
            std::vector<double> vals(static_cast<std::size_t>(mc_paths));
            for (int i = 0; i < mc_paths; ++i) {
                PathRng rng(seed, static_cast<std::uint64_t>(i), 0);
                vals[static_cast<std::size_t>(i)] = f.eval(model.embed(p0, s * rng.gaussian()));
            }
            const MeanSe m = mean_se(vals);
            rep.residual = std::fabs(m.mean - f.eval(p0));
            rep.standard_error = m.se;
            rep.monte_carlo = true;
            return rep;
        }
        const double lhs = detail::unit_square_quadrature(
            [&](const AmbientPoint& p) { return detail::line_leaf_diffusion(model, f, p, t); },
            resolution);
        const double rhs = detail::unit_square_quadrature(
            [&](const AmbientPoint& p) { return f.eval(p); }, resolution);
        rep.residual = std::fabs(lhs - rhs);
        return rep;
    }
    case LaminationKind::SingleHyperbolicLeaf: {
        if (!mu.is_dirac())
            throw CapabilityError("lamination-models.check_very_weak_harmonicity",
                                  "the single-leaf model supports Dirac measures only (per-path mode)");
        const AmbientPoint p0 = mu.dirac_point();
        const LeafModel leaf = model.leaf_model();
        const LeafPoint x0(p0[0], p0[1]);
        ScalarField leaf_f;
        leaf_f.eval = [&](const LeafPoint& q) { return f.eval(AmbientPoint(q[0], q[1])); };
        const double dtv = diffusion_value(leaf, leaf_f, x0, t);
        rep.residual = std::fabs(dtv - f.eval(p0));
        return rep;
    }
    }
    return rep;
}

// |∫ Δf dmu| for a compactly supported leafwise-C2 ambient field.
inline HarmonicityReport check_harmonicity_laplacian(const LaminationModel& model,
                                                     const HarmonicMeasureModel& mu,
                                                     const AmbientField& f, int resolution = 512,
                                                     double h = 1e-3) {
    if (!f.compactly_supported)
        throw DomainError("lamination-models.check_harmonicity_laplacian",
                          "test field support leaves the atlas");
    HarmonicityReport rep;
    const auto leaf_laplacian = [&](const AmbientPoint& p) {
        switch (model.kind()) {
        case LaminationKind::KroneckerTorus:
        case LaminationKind::SuspensionLine: {
            const double fp = f.eval(p);
            return (f.eval(model.embed(p, h)) + f.eval(model.embed(p, -h)) - 2.0 * fp) / (h * h);
        }
        case LaminationKind::SingleHyperbolicLeaf: {
            ScalarField leaf_f;
            leaf_f.eval = [&](const LeafPoint& q) { return f.eval(AmbientPoint(q[0], q[1])); };
            return laplace_beltrami_stencil(model.leaf_model(), leaf_f, LeafPoint(p[0], p[1]), h);
        }
        }
        return 0.0;
    };
    if (mu.is_dirac()) {
        rep.residual = std::fabs(leaf_laplacian(mu.dirac_point()));
        return rep;
    }
    switch (model.kind()) {
    case LaminationKind::KroneckerTorus:
    case LaminationKind::SuspensionLine:
        rep.residual = std::fabs(detail::unit_square_quadrature(leaf_laplacian, resolution));
        return rep;
    case LaminationKind::SingleHyperbolicLeaf:
        throw CapabilityError("lamination-models.check_harmonicity_laplacian",
                              "the single-leaf model supports Dirac measures only (per-path mode)");
    }
    return rep;
}

} // namespace leaflyap

#endif
