// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_LYAPUNOV_HPP
#define LEAFLYAP_LYAPUNOV_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "leaflyap/cocycle.hpp"
#include "leaflyap/parallel.hpp"
#include "leaflyap/path.hpp"
#include "leaflyap/stats.hpp"

namespace leaflyap {

struct EnsembleOptions {
    double T = 10.0;
    double dt = 1.0 / 64.0;
    int n_paths = 200;
    std::uint64_t seed = 1;
    int workers = 1;
    SamplerOptions sampler;
};

// Deterministic handle on an ensemble of leafwise Brownian paths: path i is
// regenerated from (seed, i) on demand, so ensembles of any horizon stay
// memory-light and worker-count independent. In lamination mode, starts are
// mu-sampled (substream 2) and cocycle potentials are rebound to each start's
// ambient angles.
class PathEnsemble {
public:
    PathEnsemble(LeafModel leaf, LeafPoint start, EnsembleOptions opt)
        : leaf_(std::move(leaf)), start_(std::move(start)), opt_(opt) {}

    PathEnsemble(const LaminationModel& model, const HarmonicMeasureModel& mu, EnsembleOptions opt)
        : leaf_(model.leaf_model()), opt_(opt), model_(&model), mu_(&mu) {
        if (model.kind() == LaminationKind::SingleHyperbolicLeaf)
            start_ = LeafPoint(model.base_point()[0], model.base_point()[1]);
        else
            start_ = LeafPoint(0.0);
    }

    int size() const { return opt_.n_paths; }
    const EnsembleOptions& options() const { return opt_; }
    const LeafModel& leaf() const { return leaf_; }
    const LeafPoint& base_start() const { return start_; }
    bool lamination_mode() const { return model_ != nullptr && !mu_->is_dirac(); }

    AmbientPoint ambient_start(int i) const {
        if (model_ == nullptr) return AmbientPoint(0.0, 0.0);
        PathRng rng(opt_.seed, static_cast<std::uint64_t>(i), 2);
        return mu_->sample(rng);
    }

    DiscretePath sample(int i) const {
        return sample_path(leaf_, start_, opt_.T, opt_.dt, opt_.seed, static_cast<std::uint64_t>(i),
                           opt_.sampler);
    }

    ExtendedPath sample_extended(int i) const {
        return sample_extended_path(leaf_, start_, opt_.T, opt_.dt, opt_.seed,
                                    static_cast<std::uint64_t>(i), opt_.sampler);
    }

    // bind ambient potential bases to path i's sampled start
    CocycleSpec bind(const CocycleSpec& spec, int i) const {
        if (!lamination_mode()) return spec;
        return rebind_spec(spec, ambient_start(i));
    }

private:
    LeafModel leaf_;
    LeafPoint start_;
    EnsembleOptions opt_;
    const LaminationModel* model_ = nullptr;
    const HarmonicMeasureModel* mu_ = nullptr;
};

struct VectorExponentResult {
    double mean = 0.0;
    double se = 0.0;
    double max = 0.0; // the per-ensemble sup slope (the esup report)
    std::vector<double> per_path;
};

// (1/T) log ||A(omega, T) v / ||v|||| per path; mean, standard error and the
// ensemble max are reported.
inline VectorExponentResult vector_exponent(const CocycleSpec& spec, const PathEnsemble& ens,
                                            const Vector& v) {
    if (v.norm() == 0.0) throw DomainError("lyapunov.vector_exponent", "zero vector");
    if (ens.size() < 1) throw DomainError("lyapunov.vector_exponent", "empty ensemble");
    const Vector vn = v / v.norm();
    std::vector<double> slopes(static_cast<std::size_t>(ens.size()));
    const bool rebind = ens.lamination_mode();
    const CompiledCocycle shared(spec);
    parallel_for(ens.size(), ens.options().workers, [&](int i) {
        const DiscretePath path = ens.sample(i);
        std::optional<CompiledCocycle> local;
        if (rebind) local.emplace(ens.bind(spec, i));
        const CompiledCocycle& cc = rebind ? *local : shared;
        CocycleFold fold(cc, path);
        fold.advance_to(path.n_steps());
        slopes[static_cast<std::size_t>(i)] = fold.value().log_norm_applied(vn) / path.horizon;
    });
    const MeanSe m = mean_se(slopes);
    return VectorExponentResult{m.mean, m.se, m.max, std::move(slopes)};
}

struct SpectrumEstimate {
    std::vector<double> exponents;     // grouped, strictly decreasing
    std::vector<int> multiplicities;   // sum to d
    std::vector<double> se;            // per grouped exponent
    std::vector<double> raw_exponents; // per QR diagonal, sorted descending
    std::vector<double> raw_se;
    std::vector<std::vector<double>> per_path_slopes; // [path][diag]
    std::vector<double> checkpoint_times;
    std::vector<std::vector<double>> series; // [checkpoint][diag], ensemble means
    double telescoping_residual = 0.0;       // QR volume-conservation check
    double gap_threshold = 0.0;

    double sum() const {
        double s = 0.0;
        for (std::size_t i = 0; i < exponents.size(); ++i) s += exponents[i] * multiplicities[i];
        return s;
    }
};

namespace detail {

// modified Gram-Schmidt with positive diagonal; returns false on rank collapse
inline bool mgs_qr(Matrix& q, Vector& rdiag) {
    const int d = static_cast<int>(q.cols());
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < j; ++i) {
            const double r = q.col(i).dot(q.col(j));
            q.col(j) -= r * q.col(i);
        }
        const double n = q.col(j).norm();
        if (!(n > 1e-300)) return false;
        rdiag(j) = n;
        q.col(j) /= n;
    }
    return true;
}

} // namespace detail

// Discrete QR method: per path, push an orthonormal frame through the step
// values, re-orthonormalize each step, and time-average the log diagonals.
// Exponents are grouped into multiplicities by the gap threshold
// max(0.15, 4 * SE).
inline SpectrumEstimate spectrum_qr(const CocycleSpec& spec, const PathEnsemble& ens,
                                    int checkpoint_stride = 0) {
    const int d = spec.rank();
    const int n_paths = ens.size();
    const double T = ens.options().T;
    const int n_steps = static_cast<int>(std::round(T / ens.options().dt));
    std::vector<int> cps;
    if (checkpoint_stride > 0)
        for (int k = checkpoint_stride; k <= n_steps; k += checkpoint_stride) cps.push_back(k);

    std::vector<std::vector<double>> slopes(static_cast<std::size_t>(n_paths),
                                            std::vector<double>(static_cast<std::size_t>(d), 0.0));
    std::vector<std::vector<double>> cp_acc(static_cast<std::size_t>(n_paths));
    std::vector<double> det_residual(static_cast<std::size_t>(n_paths), 0.0);
    const bool rebind = ens.lamination_mode();
    const CompiledCocycle shared(spec);

    parallel_for(n_paths, ens.options().workers, [&](int p) {
        const DiscretePath path = ens.sample(p);
        std::optional<CompiledCocycle> local;
        if (rebind) local.emplace(ens.bind(spec, p));
        const CompiledCocycle& cc = rebind ? *local : shared;

        std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
        double acc_det = 0.0;
        std::vector<double>& cpv = cp_acc[static_cast<std::size_t>(p)];
        cpv.assign(cps.size() * static_cast<std::size_t>(d), 0.0);
        std::size_t next_cp = 0;

        // fast path: all generators diagonal, the frame never rotates
        bool diag_fast = !cc.path_ordered();
        for (const auto& g : cc.generators()) {
            Matrix off = g;
            off.diagonal().setZero();
            if (off.cwiseAbs().maxCoeff() != 0.0) { diag_fast = false; break; }
        }

        if (diag_fast) {
            const std::size_t np = cc.potentials().size();
            for (int k = 0; k < path.n_steps(); ++k) {
                for (std::size_t j = 0; j < np; ++j) {
                    const double inc = cc.potentials()[j].step_increment(path, k);
                    const auto& g = cc.generators()[j];
                    for (int i = 0; i < d; ++i) acc[static_cast<std::size_t>(i)] += inc * g(i, i);
                    acc_det += inc * g.trace();
                }
                if (next_cp < cps.size() && k + 1 == cps[next_cp]) {
                    for (int i = 0; i < d; ++i)
                        cpv[next_cp * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] =
                            acc[static_cast<std::size_t>(i)];
                    ++next_cp;
                }
            }
        } else {
            Matrix q = Matrix::Identity(d, d);
            Vector rdiag(d);
            for (int k = 0; k < path.n_steps(); ++k) {
                const CocycleValue sv = cc.step_value(path, k);
                q = (sv.matrix * q).eval();
                if (!detail::mgs_qr(q, rdiag))
                    throw NumericError("lyapunov.spectrum_qr",
                                       "re-orthonormalization rank collapse on path " +
                                           std::to_string(p) + " at step " + std::to_string(k));
                // the step value is e^{log_scale} * matrix, so every diagonal
                // picks up the scale
                for (int i = 0; i < d; ++i)
                    acc[static_cast<std::size_t>(i)] += std::log(rdiag(i)) + sv.log_scale;
                acc_det += cc.step_log_det(path, k);
                if (next_cp < cps.size() && k + 1 == cps[next_cp]) {
                    for (int i = 0; i < d; ++i)
                        cpv[next_cp * static_cast<std::size_t>(d) + static_cast<std::size_t>(i)] =
                            acc[static_cast<std::size_t>(i)];
                    ++next_cp;
                }
            }
        }
        double sum_acc = 0.0;
        for (int i = 0; i < d; ++i) {
            slopes[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] =
                acc[static_cast<std::size_t>(i)] / T;
            sum_acc += acc[static_cast<std::size_t>(i)];
        }
        det_residual[static_cast<std::size_t>(p)] =
            std::fabs(sum_acc - acc_det) / std::max(1.0, std::fabs(acc_det));
    });

    SpectrumEstimate est;
    est.per_path_slopes = slopes;
    // fixed-order reductions over the path index
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0), sev(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
        std::vector<double> col(static_cast<std::size_t>(n_paths));
        for (int p = 0; p < n_paths; ++p)
            col[static_cast<std::size_t>(p)] = slopes[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)];
        const MeanSe m = mean_se(col);
        mean[static_cast<std::size_t>(i)] = m.mean;
        sev[static_cast<std::size_t>(i)] = m.se;
    }
    for (double r : det_residual) est.telescoping_residual = std::max(est.telescoping_residual, r);

    // sort diagonals descending by mean
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return mean[static_cast<std::size_t>(a)] > mean[static_cast<std::size_t>(b)];
    });
    for (int i : order) {
        est.raw_exponents.push_back(mean[static_cast<std::size_t>(i)]);
        est.raw_se.push_back(sev[static_cast<std::size_t>(i)]);
    }

    // checkpoint series (ensemble means of running slopes)
    for (std::size_t c = 0; c < cps.size(); ++c) {
        est.checkpoint_times.push_back(cps[c] * ens.options().dt);
        std::vector<double> row(static_cast<std::size_t>(d), 0.0);
        for (int p = 0; p < n_paths; ++p)
            for (int i = 0; i < d; ++i)
                row[static_cast<std::size_t>(i)] +=
                    cp_acc[static_cast<std::size_t>(p)][c * static_cast<std::size_t>(d) +
                                                        static_cast<std::size_t>(i)] /
                    (cps[c] * ens.options().dt) / n_paths;
        std::vector<double> sorted_row;
        for (int i : order) sorted_row.push_back(row[static_cast<std::size_t>(i)]);
        est.series.push_back(std::move(sorted_row));
    }

    // multiplicity grouping by the gap threshold
    double max_se = 0.0;
    for (double s : est.raw_se) max_se = std::max(max_se, s);
    est.gap_threshold = std::max(0.15, 4.0 * max_se);
    std::size_t i = 0;
    while (i < est.raw_exponents.size()) {
        std::size_t j = i + 1;
        while (j < est.raw_exponents.size() &&
               est.raw_exponents[j - 1] - est.raw_exponents[j] < est.gap_threshold)
            ++j;
        double g = 0.0, gse = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            g += est.raw_exponents[k];
            gse = std::max(gse, est.raw_se[k]);
        }
        est.exponents.push_back(g / static_cast<double>(j - i));
        est.multiplicities.push_back(static_cast<int>(j - i));
        est.se.push_back(gse);
        i = j;
    }
    return est;
}

struct DecompositionEstimate {
    std::vector<Matrix> subspaces; // orthonormal bases, one per exponent block
    std::vector<int> dims;
    std::vector<Matrix> forward_filtration;  // V_i (decreasing), V_1 = R^d
    std::vector<Matrix> backward_filtration; // V-_i (increasing)
    double invariance_residual = 0.0;
};

namespace detail {

// orthonormal basis of the span of the given (independent) columns
inline Matrix orthonormalize(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
    return q;
}

// largest principal angle between equal-rank subspaces: the estimation error
inline double max_principal_angle(const Matrix& q1, const Matrix& q2) {
    Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
    const double c = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
    return std::acos(c);
}

// the paper's angle between two subspaces: min over unit pairs
inline double min_pair_angle(const Matrix& q1, const Matrix& q2) {
    Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
    const double c = std::clamp(svd.singularValues().maxCoeff(), -1.0, 1.0);
    return std::acos(c);
}

// average projector of a subspace family, then take the dominant eigenvectors
class ProjectorMean {
public:
    explicit ProjectorMean(int d) : acc_(Matrix::Zero(d, d)), n_(0) {}
    void add(const Matrix& q) {
        acc_ += q * q.transpose();
        ++n_;
    }
    Matrix basis(int k) const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(acc_ / std::max(1, n_));
        const int d = static_cast<int>(acc_.rows());
        Matrix b(d, k);
        for (int i = 0; i < k; ++i) b.col(i) = es.eigenvectors().col(d - 1 - i);
        return b;
    }

private:
    Matrix acc_;
    int n_;
};

// numerically stable intersection of subspaces via principal vectors
inline Matrix subspace_intersection(const Matrix& q1, const Matrix& q2, int k) {
    Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix out(q1.rows(), k);
    for (int i = 0; i < k; ++i) {
        const Vector a = q1 * svd.matrixU().col(i);
        const Vector b = q2 * svd.matrixV().col(i);
        Vector v = a + b;
        if (v.norm() < 1e-12) v = a;
        out.col(i) = v / v.norm();
    }
    return orthonormalize(out);
}

} // namespace detail

struct OseledecOptions {
    int held_out = 6;           // paths used for the invariance residual
    double transport_time = 8.0;
    int reestimate_paths = 64;
};

// Oseledec subspaces from the forward/backward filtrations: V_i from the
// trailing right-singular directions of the terminal forward values, V-_i
// symmetrically from the backward extension, H_i as their principal-vector
// intersection. The invariance residual transports H_i along held-out paths
// and compares with a re-estimate at the endpoint.
inline DecompositionEstimate oseledec_spaces(const CocycleSpec& spec, const PathEnsemble& ens,
                                             const SpectrumEstimate& spectrum,
                                             const OseledecOptions& opts = {}) {
    const int d = spec.rank();
    const int m = static_cast<int>(spectrum.exponents.size());
    for (int i = 0; i + 1 < m; ++i)
        if (spectrum.exponents[static_cast<std::size_t>(i)] -
                spectrum.exponents[static_cast<std::size_t>(i + 1)] <
            spectrum.gap_threshold)
            throw CapabilityError("lyapunov.oseledec_spaces",
                                  "multiplicity ambiguity; decomposition skipped for the merged block");
    std::vector<int> offsets(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 0; i < m; ++i)
        offsets[static_cast<std::size_t>(i) + 1] =
            offsets[static_cast<std::size_t>(i)] + spectrum.multiplicities[static_cast<std::size_t>(i)];

    const CompiledCocycle cc(spec);
    std::vector<detail::ProjectorMean> fwd_mean(static_cast<std::size_t>(m), detail::ProjectorMean(d));
    std::vector<detail::ProjectorMean> bwd_mean(static_cast<std::size_t>(m), detail::ProjectorMean(d));

    for (int p = 0; p < ens.size(); ++p) {
        const ExtendedPath ext = ens.sample_extended(p);
        const CocycleValue fwd = evaluate(cc, ext.forward, ext.forward.horizon);
        Eigen::JacobiSVD<Matrix> svd_f(fwd.matrix, Eigen::ComputeFullV);
        const CocycleValue bwd = extend_backward(spec, ext, -ext.backward.horizon);
        Eigen::JacobiSVD<Matrix> svd_b(bwd.matrix, Eigen::ComputeFullV);
        for (int i = 0; i < m; ++i) {
            // V_i: directions with forward slope <= chi_i (trailing)
            const int k0 = offsets[static_cast<std::size_t>(i)];
            Matrix vf(d, d - k0);
            for (int c2 = k0; c2 < d; ++c2) vf.col(c2 - k0) = svd_f.matrixV().col(c2);
            fwd_mean[static_cast<std::size_t>(i)].add(vf);
            // V-_i: directions with backward slope <= -chi_i (trailing
            // singular directions of the backward value, which shrinks
            // exactly where the forward value grows)
            const int k1 = offsets[static_cast<std::size_t>(i) + 1];
            Matrix vb(d, k1);
            for (int c2 = 0; c2 < k1; ++c2) vb.col(c2) = svd_b.matrixV().col(d - 1 - c2);
            bwd_mean[static_cast<std::size_t>(i)].add(vb);
        }
    }

    DecompositionEstimate dec;
    for (int i = 0; i < m; ++i) {
        const int k0 = offsets[static_cast<std::size_t>(i)];
        const int k1 = offsets[static_cast<std::size_t>(i) + 1];
        const Matrix vf = fwd_mean[static_cast<std::size_t>(i)].basis(d - k0);
        const Matrix vb = bwd_mean[static_cast<std::size_t>(i)].basis(k1);
        dec.forward_filtration.push_back(vf);
        dec.backward_filtration.push_back(vb);
        dec.subspaces.push_back(detail::subspace_intersection(vf, vb, k1 - k0));
        dec.dims.push_back(k1 - k0);
    }

    // invariance residual on held-out paths
    const std::uint64_t held_seed = mix_seed(ens.options().seed, UINT64_C(0x05E1EDEC));
    EnsembleOptions re_opt = ens.options();
    re_opt.n_paths = opts.reestimate_paths;
    for (int h = 0; h < opts.held_out; ++h) {
        DiscretePath path = sample_path(ens.leaf(), ens.base_start(), opts.transport_time,
                                        ens.options().dt, held_seed, static_cast<std::uint64_t>(h),
                                        ens.options().sampler);
        const CocycleValue tr = evaluate(cc, path, opts.transport_time);
        // re-estimate the decomposition at the endpoint
        re_opt.seed = mix_seed(held_seed, static_cast<std::uint64_t>(h));
        PathEnsemble re_ens(ens.leaf(), path.end(), re_opt);
        const DecompositionEstimate re = [&]() {
            DecompositionEstimate r2;
            std::vector<detail::ProjectorMean> fm(static_cast<std::size_t>(m), detail::ProjectorMean(d));
            std::vector<detail::ProjectorMean> bm(static_cast<std::size_t>(m), detail::ProjectorMean(d));
            for (int p = 0; p < re_ens.size(); ++p) {
                const ExtendedPath ext = re_ens.sample_extended(p);
                const CocycleValue fwd = evaluate(cc, ext.forward, ext.forward.horizon);
                Eigen::JacobiSVD<Matrix> svd_f(fwd.matrix, Eigen::ComputeFullV);
                const CocycleValue bwd = extend_backward(spec, ext, -ext.backward.horizon);
                Eigen::JacobiSVD<Matrix> svd_b(bwd.matrix, Eigen::ComputeFullV);
                for (int i = 0; i < m; ++i) {
                    const int k0 = offsets[static_cast<std::size_t>(i)];
                    const int k1 = offsets[static_cast<std::size_t>(i) + 1];
                    Matrix vf(d, d - k0);
                    for (int c2 = k0; c2 < d; ++c2) vf.col(c2 - k0) = svd_f.matrixV().col(c2);
                    fm[static_cast<std::size_t>(i)].add(vf);
                    Matrix vb(d, k1);
                    for (int c2 = 0; c2 < k1; ++c2) vb.col(c2) = svd_b.matrixV().col(d - 1 - c2);
                    bm[static_cast<std::size_t>(i)].add(vb);
                }
            }
            for (int i = 0; i < m; ++i) {
                const int k0 = offsets[static_cast<std::size_t>(i)];
                const int k1 = offsets[static_cast<std::size_t>(i) + 1];
                r2.subspaces.push_back(detail::subspace_intersection(fm[static_cast<std::size_t>(i)].basis(d - k0),
                                                                     bm[static_cast<std::size_t>(i)].basis(k1),
                                                                     k1 - k0));
            }
            return r2;
        }();
        for (int i = 0; i < m; ++i) {
            const Matrix transported =
                detail::orthonormalize(tr.matrix * dec.subspaces[static_cast<std::size_t>(i)]);
            dec.invariance_residual =
                std::max(dec.invariance_residual,
                         detail::max_principal_angle(transported, re.subspaces[static_cast<std::size_t>(i)]));
        }
    }
    return dec;
}

// chi^- estimates on the backward halves via the extended-cocycle inverse.
inline VectorExponentResult backward_vector_exponent(const CocycleSpec& spec, const PathEnsemble& ens,
                                                     const Vector& v) {
    if (v.norm() == 0.0) throw DomainError("lyapunov.backward_vector_exponent", "zero vector");
    const Vector vn = v / v.norm();
    std::vector<double> slopes(static_cast<std::size_t>(ens.size()));
    parallel_for(ens.size(), ens.options().workers, [&](int i) {
        const ExtendedPath ext = ens.sample_extended(i);
        const CocycleValue b = extend_backward(spec, ext, -ext.backward.horizon);
        slopes[static_cast<std::size_t>(i)] = b.log_norm_applied(vn) / ext.backward.horizon;
    });
    const MeanSe m = mean_se(slopes);
    return VectorExponentResult{m.mean, m.se, m.max, std::move(slopes)};
}

struct AngleDecaySeries {
    std::vector<double> times;
    std::vector<double> values; // ensemble means of (1/t) log sin(angle)
    double terminal_mean = 0.0;
    double terminal_se = 0.0;
    bool empty = false; // single-block decompositions have no complementary pair
};

// Transported-angle decay of th-main-style property (iii): the angle between
// A(omega,t) H_S and A(omega,t) H_{N\S} along the ensemble.
inline AngleDecaySeries angle_decay(const CocycleSpec& spec, const DecompositionEstimate& dec,
                                    const PathEnsemble& ens, const std::vector<int>& subset,
                                    int checkpoints = 8) {
    AngleDecaySeries out;
    const int m = static_cast<int>(dec.subspaces.size());
    if (m < 2) {
        out.empty = true;
        return out;
    }
    const int d = static_cast<int>(dec.subspaces.front().rows());
    int ds = 0, dc = 0;
    for (int i = 0; i < m; ++i) {
        const bool in = std::find(subset.begin(), subset.end(), i) != subset.end();
        (in ? ds : dc) += dec.dims[static_cast<std::size_t>(i)];
    }
    if (ds == 0 || dc == 0) {
        out.empty = true;
        return out;
    }
    Matrix hs(d, ds), hc(d, dc);
    int cs = 0, cc2 = 0;
    for (int i = 0; i < m; ++i) {
        const bool in = std::find(subset.begin(), subset.end(), i) != subset.end();
        const Matrix& b = dec.subspaces[static_cast<std::size_t>(i)];
        for (int j = 0; j < b.cols(); ++j) {
            if (in)
                hs.col(cs++) = b.col(j);
            else
                hc.col(cc2++) = b.col(j);
        }
    }
    const CompiledCocycle cc(spec);
    const int n_steps = static_cast<int>(std::round(ens.options().T / ens.options().dt));
    const int stride = std::max(1, n_steps / checkpoints);
    std::vector<int> cps;
    for (int k = stride; k <= n_steps; k += stride) cps.push_back(k);
    std::vector<std::vector<double>> vals(static_cast<std::size_t>(ens.size()));
    parallel_for(ens.size(), ens.options().workers, [&](int p) {
        const DiscretePath path = ens.sample(p);
        CocycleFold fold(cc, path);
        auto& row = vals[static_cast<std::size_t>(p)];
        for (int k : cps) {
            fold.advance_to(k);
            const CocycleValue v = fold.value();
            const Matrix bs = detail::orthonormalize(v.matrix * hs);
            const Matrix bc = detail::orthonormalize(v.matrix * hc);
            const double ang = detail::min_pair_angle(bs, bc);
            const double t = k * ens.options().dt;
            row.push_back(std::log(std::max(std::sin(ang), 1e-300)) / t);
        }
    });
    std::vector<double> terminal(static_cast<std::size_t>(ens.size()));
    for (std::size_t c = 0; c < cps.size(); ++c) {
        double mval = 0.0;
        for (int p = 0; p < ens.size(); ++p) mval += vals[static_cast<std::size_t>(p)][c];
        out.times.push_back(cps[c] * ens.options().dt);
        out.values.push_back(mval / ens.size());
    }
    for (int p = 0; p < ens.size(); ++p) terminal[static_cast<std::size_t>(p)] = vals[static_cast<std::size_t>(p)].back();
    const MeanSe msd = mean_se(terminal);
    out.terminal_mean = msd.mean;
    out.terminal_se = msd.se;
    return out;
}

struct WedgeConsistency {
    double wedge_top = 0.0;
    double wedge_top_se = 0.0;
    double base_top_k_sum = 0.0;
    double discrepancy = 0.0;
};

// chi_1 of the k-th exterior power against the sum of the top k base
// exponents (counted with multiplicity).
inline WedgeConsistency wedge_consistency(const CocycleSpec& spec, int k, const PathEnsemble& ens) {
    const SpectrumEstimate base = spectrum_qr(spec, ens);
    const SpectrumEstimate wedged = spectrum_qr(wedge_power(spec, k), ens);
    WedgeConsistency w;
    w.wedge_top = wedged.raw_exponents.front();
    w.wedge_top_se = wedged.raw_se.front();
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += base.raw_exponents[static_cast<std::size_t>(i)];
    w.base_top_k_sum = s;
    w.discrepancy = std::fabs(w.wedge_top - s);
    return w;
}

struct DualConsistency {
    std::vector<double> dual_raw;
    std::vector<double> base_raw;
    double max_abs_sum = 0.0; // max_i |dual_i + base_{d+1-i}|
};

inline DualConsistency dual_consistency(const CocycleSpec& spec, const PathEnsemble& ens) {
    const SpectrumEstimate base = spectrum_qr(spec, ens);
    const SpectrumEstimate dualled = spectrum_qr(dual(spec), ens);
    DualConsistency r;
    r.base_raw = base.raw_exponents;
    r.dual_raw = dualled.raw_exponents;
    const std::size_t d = base.raw_exponents.size();
    for (std::size_t i = 0; i < d; ++i)
        r.max_abs_sum = std::max(r.max_abs_sum,
                                 std::fabs(r.dual_raw[i] + r.base_raw[d - 1 - i]));
    return r;
}

} // namespace leaflyap

#endif
