// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_RUNNER_HPP
#define LEAFLYAP_RUNNER_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "leaflyap/bounds.hpp"
#include "leaflyap/cocycle.hpp"
#include "leaflyap/config.hpp"
#include "leaflyap/diffusion.hpp"
#include "leaflyap/lamination.hpp"
#include "leaflyap/lyapunov.hpp"
#include "leaflyap/version.hpp"

namespace leaflyap {

struct SummaryRow {
    std::string quantity;
    double value = 0.0;
    double stderr_value = 0.0;
};

struct ConvergenceRow {
    double time = 0.0;
    std::string quantity;
    double value = 0.0;
};

struct RunResult {
    std::string run_id;
    std::string model_id;
    std::string cocycle_id;
    std::string estimator;
    int n_paths = 0;
    double T = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<SummaryRow> rows;
    std::vector<ConvergenceRow> convergence;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string config_hash(const Config& cfg) {
    SplitMix64 h(UINT64_C(0xC0FFEE));
    std::uint64_t acc = 0;
    for (const auto& [k, v] : cfg.values()) {
        for (char c : k) acc = (acc ^ static_cast<std::uint64_t>(c)) * UINT64_C(0x100000001B3);
        for (char c : v) acc = (acc ^ static_cast<std::uint64_t>(c)) * UINT64_C(0x100000001B3);
    }
    SplitMix64 g(acc ^ h.next());
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(g.next()));
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------
// catalog

struct CatalogEntry {
    std::string id;
    std::string params; // human-readable schema
    std::vector<std::string> supports;
};

struct Catalog {
    std::vector<CatalogEntry> models;
    std::vector<CatalogEntry> cocycles;
    std::vector<std::string> estimators;
    std::vector<std::string> unsupported_pairs;
};

inline Catalog catalog() {
    Catalog c;
    c.estimators = {"spectrum", "oseledec", "bounds",   "candel",
                    "phi",      "ledrappier", "lawcheck", "cylinder"};
    c.models = {
        {"euclidean_line", "model.start (default 0)", {"cylinder", "lawcheck", "spectrum", "phi"}},
        {"hyperbolic_leaf", "model.base_x, model.base_y (default 0, 1)",
         {"spectrum", "oseledec", "bounds", "candel", "phi", "ledrappier", "lawcheck"}},
        {"kronecker_torus", "model.slope (default 0.618...), measure.id = lebesgue | dirac",
         {"spectrum", "bounds", "candel", "lawcheck"}},
        {"suspension_line", "model.rotation (default 0.382...)", {"spectrum", "candel", "lawcheck"}},
    };
    c.cocycles = {
        {"identity", "cocycle.rank (default 2)", {"any model"}},
        {"busemann", "cocycle.rate (default 1)", {"hyperbolic_leaf"}},
        {"diagonal_busemann", "cocycle.rates = c1,c2,...", {"hyperbolic_leaf"}},
        {"conjugated_busemann", "cocycle.rates; cocycle.p = row;row (row-major decimal)",
         {"hyperbolic_leaf"}},
        {"wedge_busemann", "cocycle.rates; cocycle.k", {"hyperbolic_leaf"}},
        {"dual_busemann", "cocycle.rates", {"hyperbolic_leaf"}},
        {"torus_linear_form", "cocycle.coeff (default 1)", {"kronecker_torus", "suspension_line", "euclidean_line"}},
        {"torus_sine_form", "cocycle.amplitude (default 0.2)", {"kronecker_torus"}},
        {"broken_angle_form", "cocycle.coeff (default 0.15)", {"kronecker_torus"}},
        {"holonomy", "", {"kronecker_torus", "suspension_line"}},
    };
    c.unsupported_pairs = {
        "cylinder on hyperbolic_leaf (quadrature route needs a flat leaf)",
        "cylinder on kronecker_torus / suspension_line (ambient boxes are not leafwise cylinders)",
        "oseledec / ledrappier on kronecker_torus (shipped torus forms are rank-1 scalar)",
        "bounds / candel on euclidean_line (no harmonic-measure context)",
        "holonomy on hyperbolic_leaf (no linear transverse structure)",
    };
    return c;
}

inline std::string catalog_text() {
    const Catalog c = catalog();
    std::ostringstream out;
    out << kVersion << " catalog\n\nmodels:\n";
    for (const auto& m : c.models) {
        out << "  " << m.id << "  [" << m.params << "]\n    estimators:";
        for (const auto& s : m.supports) out << " " << s;
        out << "\n";
    }
    out << "\ncocycles:\n";
    for (const auto& k : c.cocycles) {
        out << "  " << k.id << "  [" << k.params << "]\n    models:";
        for (const auto& s : k.supports) out << " " << s;
        out << "\n";
    }
    out << "\nestimators:";
    for (const auto& e : c.estimators) out << " " << e;
    out << "\n\nunsupported pairs:\n";
    for (const auto& u : c.unsupported_pairs) out << "  - " << u << "\n";
    return out.str();
}

// minimal config for a (model, cocycle, estimator) triple; used by the
// catalog round-trip contract
inline std::string minimal_config(const std::string& model, const std::string& cocycle,
                                  const std::string& estimator) {
    std::ostringstream out;
    out << "model.id = " << model << "\n";
    out << "cocycle.id = " << cocycle << "\n";
    out << "estimator.id = " << estimator << "\n";
    out << "run.T = 4\nrun.dt = 0.03125\nrun.paths = 16\nrun.seed = 7\n";
    if (cocycle == "diagonal_busemann" || cocycle == "conjugated_busemann" ||
        cocycle == "wedge_busemann" || cocycle == "dual_busemann")
        out << "cocycle.rates = 1,2\n";
    if (cocycle == "wedge_busemann") out << "cocycle.k = 2\n";
    if (estimator == "cylinder") out << "cylinder.times = 1\ncylinder.lo = 0\ncylinder.hi = inf\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// experiment assembly

struct Experiment {
    Config cfg;
    std::string model_id;
    std::string cocycle_id;
    std::string estimator;
    std::optional<LaminationModel> lamination;
    std::optional<HarmonicMeasureModel> measure;
    LeafModel leaf = LeafModel::euclidean(1);
    LeafPoint start = LeafPoint(0.0);
    std::optional<CocycleSpec> spec;
    EnsembleOptions ens;
    int checkpoint_stride = 0;
};

namespace detail {

inline Matrix default_conjugator(int d) {
    Matrix p = Matrix::Identity(d, d);
    // a fixed, well-conditioned, visibly non-orthogonal frame
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) p(i, j) = 0.3 / (1.0 + std::fabs(i - j));
    return p;
}

inline Matrix parse_matrix(const Config& cfg, const std::string& key, int d) {
    const auto rows = cfg.get_matrix(key);
    if (rows.empty()) return default_conjugator(d);
    if (static_cast<int>(rows.size()) != d)
        throw DomainError("cli.config", "key '" + key + "' must have " + std::to_string(d) + " rows");
    Matrix p(d, d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != d)
            throw DomainError("cli.config", "key '" + key + "' rows must have " + std::to_string(d) + " entries");
        for (int j = 0; j < d; ++j) p(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return p;
}

} // namespace detail

inline Experiment build_experiment(const Config& cfg) {
    Experiment e;
    e.cfg = cfg;
    e.model_id = cfg.require_string("model.id");
    e.estimator = cfg.require_string("estimator.id");
    e.cocycle_id = cfg.get_string("cocycle.id", "identity");

    // run grid
    e.ens.T = cfg.get_double("run.T", 10.0);
    e.ens.dt = cfg.get_double("run.dt", 1.0 / 64.0);
    e.ens.n_paths = static_cast<int>(cfg.get_int("run.paths", 200));
    e.ens.seed = cfg.get_u64("run.seed", 1);
    e.ens.workers = static_cast<int>(cfg.get_int("run.workers", 1));
    e.ens.sampler.wild_step_threshold_sigmas = cfg.get_double("run.wild_step_threshold_sigmas", 10.0);
    e.checkpoint_stride = static_cast<int>(cfg.get_int("run.checkpoint_stride", 0));
    if (e.ens.n_paths < 1) throw DomainError("cli.run", "run.paths must be >= 1");
    if (e.ens.T <= 0.0) throw DomainError("cli.run", "run.T must be positive");
    const double ratio = e.ens.T / e.ens.dt;
    if (std::fabs(ratio - std::round(ratio)) > 1e-9 * ratio)
        throw DomainError("cli.run", "run.T / run.dt must be an integer (field run.dt)");
    if (e.ens.workers < 1) throw DomainError("cli.run", "run.workers must be >= 1");

    // model + measure
    if (e.model_id == "euclidean_line") {
        e.leaf = LeafModel::euclidean(1);
        e.start = LeafPoint(cfg.get_double("model.start", 0.0));
    } else if (e.model_id == "hyperbolic_leaf") {
        e.lamination = LaminationModel::single_hyperbolic_leaf(cfg.get_double("model.base_x", 0.0),
                                                               cfg.get_double("model.base_y", 1.0));
        e.leaf = e.lamination->leaf_model();
        e.start = LeafPoint(e.lamination->base_point()[0], e.lamination->base_point()[1]);
        e.measure = HarmonicMeasureModel::dirac(e.lamination->base_point());
    } else if (e.model_id == "kronecker_torus") {
        e.lamination = LaminationModel::kronecker_torus(cfg.get_double("model.slope", 0.6180339887498949));
        e.leaf = e.lamination->leaf_model();
        e.start = LeafPoint(0.0);
        const std::string mid = cfg.get_string("measure.id", "lebesgue");
        if (mid == "lebesgue")
            e.measure = HarmonicMeasureModel::lebesgue_torus();
        else if (mid == "dirac")
            e.measure = HarmonicMeasureModel::dirac(
                AmbientPoint(cfg.get_double("measure.x", 0.25), cfg.get_double("measure.y", 0.25)));
        else
            throw DomainError("cli.run", "unknown measure.id '" + mid + "'");
    } else if (e.model_id == "suspension_line") {
        e.lamination = LaminationModel::suspension_line(cfg.get_double("model.rotation", 0.38196601125010515));
        e.leaf = e.lamination->leaf_model();
        e.start = LeafPoint(0.0);
        e.measure = HarmonicMeasureModel::product_suspension();
    } else {
        throw DomainError("cli.run", "unknown model.id '" + e.model_id + "'");
    }

    // cocycle
    const auto need_hyperbolic = [&]() {
        if (e.model_id != "hyperbolic_leaf")
            throw DomainError("cli.run",
                              "cocycle '" + e.cocycle_id + "' needs model.id = hyperbolic_leaf");
    };
    const auto angle_rate = [&]() {
        return e.leaf.angle_rates().empty() ? 1.0 : e.leaf.angle_rates().front();
    };
    if (e.cocycle_id == "identity") {
        e.spec = CocycleSpec::identity(static_cast<int>(cfg.get_int("cocycle.rank", 2)));
    } else if (e.cocycle_id == "busemann") {
        need_hyperbolic();
        e.spec = CocycleSpec::diagonal_busemann({cfg.get_double("cocycle.rate", 1.0)});
    } else if (e.cocycle_id == "diagonal_busemann") {
        need_hyperbolic();
        auto rates = cfg.get_doubles("cocycle.rates");
        if (rates.empty()) rates = {1.0, 2.0};
        e.spec = CocycleSpec::diagonal_busemann(rates);
    } else if (e.cocycle_id == "conjugated_busemann") {
        need_hyperbolic();
        auto rates = cfg.get_doubles("cocycle.rates");
        if (rates.empty()) rates = {1.0, 2.0};
        const int d = static_cast<int>(rates.size());
        e.spec = CocycleSpec::conjugated(CocycleSpec::diagonal_busemann(rates),
                                         detail::parse_matrix(cfg, "cocycle.p", d));
    } else if (e.cocycle_id == "wedge_busemann") {
        need_hyperbolic();
        auto rates = cfg.get_doubles("cocycle.rates");
        if (rates.empty()) rates = {1.0, 2.0};
        e.spec = CocycleSpec::wedge_power(CocycleSpec::diagonal_busemann(rates),
                                          static_cast<int>(cfg.get_int("cocycle.k", 2)));
    } else if (e.cocycle_id == "dual_busemann") {
        need_hyperbolic();
        auto rates = cfg.get_doubles("cocycle.rates");
        if (rates.empty()) rates = {1.0, 2.0};
        e.spec = CocycleSpec::dual(CocycleSpec::diagonal_busemann(rates));
    } else if (e.cocycle_id == "torus_linear_form") {
        Matrix one(1, 1);
        one << 1.0;
        e.spec = CocycleSpec::one_form({Potential::leaf_linear(cfg.get_double("cocycle.coeff", 1.0))},
                                       {one}, "torus_linear_form");
    } else if (e.cocycle_id == "torus_sine_form") {
        if (e.model_id != "kronecker_torus")
            throw DomainError("cli.run", "torus_sine_form needs model.id = kronecker_torus");
        Matrix one(1, 1);
        one << 1.0;
        e.spec = CocycleSpec::one_form(
            {Potential::ambient_sine(cfg.get_double("cocycle.amplitude", 0.2), angle_rate(), 0.0, 0)},
            {one}, "torus_sine_form");
    } else if (e.cocycle_id == "broken_angle_form") {
        if (e.model_id != "kronecker_torus")
            throw DomainError("cli.run", "broken_angle_form needs model.id = kronecker_torus");
        Matrix one(1, 1);
        one << 1.0;
        e.spec = CocycleSpec::one_form(
            {Potential::ambient_angle(cfg.get_double("cocycle.coeff", 0.15), angle_rate(), 0.0, 0)},
            {one}, "broken_angle_form");
    } else if (e.cocycle_id == "holonomy") {
        if (!e.lamination)
            throw DomainError("cli.run", "holonomy needs a lamination model");
        e.spec = holonomy_cocycle(*e.lamination);
    } else {
        throw DomainError("cli.run", "unknown cocycle.id '" + e.cocycle_id + "'");
    }
    return e;
}

// ---------------------------------------------------------------------------
// estimators -> summary rows

inline RunResult run_experiment(const Config& cfg) {
    Experiment e = build_experiment(cfg);
    RunResult res;
    res.run_id = detail::config_hash(cfg);
    res.model_id = e.model_id;
    res.cocycle_id = e.cocycle_id;
    res.estimator = e.estimator;
    res.n_paths = e.ens.n_paths;
    res.T = e.ens.T;
    res.dt = e.ens.dt;
    res.seed = e.ens.seed;

    PathEnsemble ens = e.lamination && e.measure && !e.measure->is_dirac()
                           ? PathEnsemble(*e.lamination, *e.measure, e.ens)
                           : PathEnsemble(e.leaf, e.start, e.ens);
    long long rejected = 0;
    {
        // wild-step accounting at fixture scale: sample a small prefix of the
        // ensemble here; estimators regenerate paths deterministically anyway
        const int probe = std::min(ens.size(), 8);
        for (int i = 0; i < probe; ++i) rejected += ens.sample(i).rejected_steps;
    }

    const auto push = [&](const std::string& q, double v, double se = 0.0) {
        res.rows.push_back(SummaryRow{q, v, se});
    };

    if (e.estimator == "spectrum") {
        const SpectrumEstimate s = spectrum_qr(*e.spec, ens, e.checkpoint_stride);
        for (std::size_t i = 0; i < s.exponents.size(); ++i) {
            push("exponent_" + std::to_string(i + 1), s.exponents[i], s.se[i]);
            push("multiplicity_" + std::to_string(i + 1), s.multiplicities[i]);
        }
        push("telescoping_residual", s.telescoping_residual);
        for (std::size_t c = 0; c < s.checkpoint_times.size(); ++c)
            for (std::size_t i = 0; i < s.series[c].size(); ++i)
                res.convergence.push_back(
                    {s.checkpoint_times[c], "lambda_" + std::to_string(i + 1), s.series[c][i]});
        if (s.multiplicities.size() != s.exponents.size() || s.exponents.empty())
            res.warnings.push_back("spectrum grouping produced no exponents");
        for (std::size_t i = 0; i < s.multiplicities.size(); ++i)
            if (s.multiplicities[i] > 1)
                res.warnings.push_back("multiplicity " + std::to_string(s.multiplicities[i]) +
                                       " at exponent_" + std::to_string(i + 1) +
                                       " (merged by gap threshold)");
    } else if (e.estimator == "oseledec") {
        const SpectrumEstimate s = spectrum_qr(*e.spec, ens, 0);
        const DecompositionEstimate dec = oseledec_spaces(*e.spec, ens, s);
        for (std::size_t i = 0; i < s.exponents.size(); ++i) {
            push("exponent_" + std::to_string(i + 1), s.exponents[i], s.se[i]);
            push("dim_" + std::to_string(i + 1), dec.dims[i]);
        }
        push("invariance_residual", dec.invariance_residual);
    } else if (e.estimator == "bounds") {
        if (!e.lamination || !e.measure)
            throw CapabilityError("cli.run", "bounds needs a lamination model with a measure");
        const ChiBounds cb = chi_bounds(*e.spec, *e.lamination, *e.measure,
                                        static_cast<int>(cfg.get_int("bounds.mc_points", 32)),
                                        e.ens.seed);
        push("chi_max_upper", cb.chi_max_upper, cb.se_max_upper);
        push("chi_max_lower", cb.chi_max_lower, cb.se_max_lower);
        push("chi_min_upper", cb.chi_min_upper, cb.se_min_upper);
        push("chi_min_lower", cb.chi_min_lower, cb.se_min_lower);
        const SpectrumEstimate s = spectrum_qr(*e.spec, ens, 0);
        push("chi_1_estimate", s.exponents.front(), s.se.front());
        push("chi_m_estimate", s.exponents.back(), s.se.back());
    } else if (e.estimator == "candel") {
        if (!e.lamination || !e.measure)
            throw CapabilityError("cli.run", "candel needs a lamination model with a measure");
        const CandelEstimate ce = candel_exponent(*e.spec, *e.lamination, *e.measure,
                                                  static_cast<int>(cfg.get_int("candel.mc_points", 256)),
                                                  e.ens.seed);
        const VectorExponentResult ve = vector_exponent(*e.spec, ens, Vector::Ones(1));
        push("candel_integral", ce.value, ce.se);
        push("mc_exponent", ve.mean, ve.se);
        push("difference", std::fabs(ce.value - ve.mean));
    } else if (e.estimator == "phi") {
        const int n_max = static_cast<int>(cfg.get_int("phi.n", 3));
        for (int n = 1; n <= n_max; ++n) {
            const PhiFunctional pf =
                phi_functional(*e.spec, e.leaf, e.start, Vector::Ones(e.spec->rank()), n,
                               static_cast<int>(cfg.get_int("phi.mc_paths", 4000)), e.ens.seed, e.ens.dt);
            push("phi_mc_" + std::to_string(n), pf.route_mc, pf.route_mc_se);
            push("phi_quadrature_" + std::to_string(n), pf.route_quadrature);
        }
    } else if (e.estimator == "ledrappier") {
        const SpectrumEstimate s = spectrum_qr(*e.spec, ens, 0);
        const LedrappierResult lr = ledrappier_check(
            *e.spec, e.leaf, e.start, static_cast<int>(cfg.get_int("ledrappier.grid", 720)),
            static_cast<int>(cfg.get_int("ledrappier.max_sweeps", 200)),
            static_cast<int>(cfg.get_int("ledrappier.mc_paths", 1024)), e.ens.seed, &s, e.ens.dt);
        int i = 0;
        for (const auto& fp : lr.fixed_points) {
            ++i;
            push("fixed_point_" + std::to_string(i), fp.value, fp.value_se);
            push("fixed_point_" + std::to_string(i) + "_matched_index", fp.matched_index);
            push("fixed_point_" + std::to_string(i) + "_tv", fp.state.last_tv_change);
        }
        push("non_converged", static_cast<double>(lr.non_converged.size()));
        for (const auto& nc : lr.non_converged)
            res.warnings.push_back("transfer iteration not converged; last TV change " +
                                   detail::format_g(nc.last_tv_change));
    } else if (e.estimator == "lawcheck") {
        const LawCheckReport rep =
            law_check(*e.spec, e.leaf, static_cast<int>(cfg.get_int("lawcheck.trials", 16)), e.ens.seed);
        push("identity_residual", rep.identity_residual);
        push("multiplicative_residual", rep.multiplicative_residual);
        push("homotopy_residual", rep.homotopy_residual);
        push("winding_loop_residual", rep.winding_loop_residual);
        push("flagged_non_cocycle", rep.flagged_non_cocycle ? 1.0 : 0.0);
        if (rep.flagged_non_cocycle) res.warnings.push_back("law check flagged: " + rep.note);
    } else if (e.estimator == "cylinder") {
        if (e.model_id != "euclidean_line")
            throw CapabilityError("cli.run", "cylinder estimator supports euclidean_line");
        const auto times = cfg.get_doubles("cylinder.times");
        auto los = cfg.get_doubles("cylinder.lo");
        auto his = cfg.get_doubles("cylinder.hi");
        // 'inf' entries parse as numbers via stod("inf")
        if (times.empty() || los.size() != times.size() || his.size() != times.size())
            throw DomainError("cli.run", "cylinder.times / cylinder.lo / cylinder.hi must align");
        std::vector<CylinderEvent> spec;
        for (std::size_t i = 0; i < times.size(); ++i)
            spec.push_back(CylinderEvent{times[i], {{los[i], his[i]}}});
        const CylinderResult cr =
            cylinder_probability(e.leaf, e.start, spec, e.ens.dt, e.ens.n_paths, e.ens.seed);
        if (cr.has_quadrature) push("cylinder_quadrature", cr.quadrature);
        push("cylinder_mc", cr.monte_carlo, cr.mc_se);
    } else {
        throw DomainError("cli.run", "unknown estimator.id '" + e.estimator + "'");
    }

    if (rejected > 0)
        res.warnings.push_back("wild steps resampled: " + std::to_string(rejected) +
                               " (probe of the ensemble prefix)");
    return res;
}

// ---------------------------------------------------------------------------
// writers

namespace detail {

inline std::string summary_csv_text(const RunResult& r) {
    std::ostringstream out;
    out << "run_id,model,cocycle,estimator,quantity,value,stderr,n_paths,T,dt,seed\n";
    for (const auto& row : r.rows)
        out << r.run_id << ',' << r.model_id << ',' << r.cocycle_id << ',' << r.estimator << ','
            << row.quantity << ',' << format_g(row.value) << ',' << format_g(row.stderr_value) << ','
            << r.n_paths << ',' << format_g(r.T) << ',' << format_g(r.dt) << ',' << r.seed << "\n";
    return out.str();
}

inline std::string convergence_csv_text(const RunResult& r) {
    std::ostringstream out;
    out << "run_id,time,quantity,value\n";
    for (const auto& row : r.convergence)
        out << r.run_id << ',' << format_g(row.time) << ',' << row.quantity << ','
            << format_g(row.value) << "\n";
    return out.str();
}

inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& dir) : lock_(dir / ".leaflyap.lock") {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (std::filesystem::exists(lock_))
            throw DomainError("cli.run", "output directory is locked by another run: " + lock_.string());
        std::ofstream out(lock_);
        out << "locked\n";
    }
    ~OutputLock() {
        std::error_code ec;
        std::filesystem::remove(lock_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::filesystem::path lock_;
};

inline void write_outputs(const RunResult& r, const Config& cfg, const std::string& dir,
                          double wall_seconds) {
    const std::filesystem::path d(dir);
    detail::write_atomic(d / "summary.csv", detail::summary_csv_text(r));
    if (!r.convergence.empty())
        detail::write_atomic(d / "convergence.csv", detail::convergence_csv_text(r));

    std::ostringstream m;
    m << "[run]\n";
    m << "version = " << kVersion << "\n";
    m << "run_id = " << r.run_id << "\n";
    m << "wall_seconds = " << detail::format_g(wall_seconds) << "\n";
    m << "\n[config]\n";
    for (const auto& [k, v] : cfg.values()) m << k << " = " << v << "\n";
    m << "\n[summary]\n" << detail::summary_csv_text(r);
    m << "\n[warnings]\n";
    for (const auto& w : r.warnings) m << "- " << w << "\n";
    detail::write_atomic(d / "manifest.txt", m.str());
}

// dump one ensemble to a plain-text file: a header line then one row per
// step per path (path_index, time, chart coordinates)
inline void dump_paths(std::ostream& out, const PathEnsemble& ens, const std::string& model_id) {
    out << "# model=" << model_id << " T=" << detail::format_g(ens.options().T)
        << " dt=" << detail::format_g(ens.options().dt) << " seed=" << ens.options().seed << "\n";
    for (int i = 0; i < ens.size(); ++i) {
        const DiscretePath p = ens.sample(i);
        for (int k = 0; k <= p.n_steps(); ++k) {
            const LeafPoint q = p.point(k);
            out << i << ' ' << detail::format_g(k * p.dt);
            for (std::size_t c = 0; c < q.dim(); ++c) out << ' ' << detail::format_g(q[c]);
            out << "\n";
        }
    }
}

} // namespace leaflyap

#endif
