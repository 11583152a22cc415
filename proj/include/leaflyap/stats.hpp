// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_STATS_HPP
#define LEAFLYAP_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "leaflyap/errors.hpp"

namespace leaflyap {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;      // standard error of the mean
    double sd = 0.0;
    double max = -std::numeric_limits<double>::infinity();
    double min = std::numeric_limits<double>::infinity();
    std::size_t n = 0;
};

// Fixed-order reduction over per-path values (index order), so results are
// identical for any worker count.
inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double x : xs) {
        s += x;
        r.max = std::max(r.max, x);
        r.min = std::min(r.min, x);
    }
    r.mean = s / static_cast<double>(r.n);
    double q = 0.0;
    for (double x : xs) q += (x - r.mean) * (x - r.mean);
    if (r.n > 1) {
        r.sd = std::sqrt(q / static_cast<double>(r.n - 1));
        r.se = r.sd / std::sqrt(static_cast<double>(r.n));
    }
    return r;
}

namespace detail {

// Regularized upper incomplete gamma Q(a,x), series + continued fraction
// (Lentz). Good to ~1e-12 over the range used by the chi-square tests.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw DomainError("stats.gamma_q", "invalid arguments");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // P(a,x) by series, return 1-P
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Q(a,x) by continued fraction
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

} // namespace detail

// Upper-tail p-value of a chi-square statistic with k degrees of freedom.
inline double chi_square_p_value(double statistic, double dof) {
    return detail::gamma_q(0.5 * dof, 0.5 * statistic);
}

// Pearson chi-square test of observed counts against expected probabilities.
inline double chi_square_test_p(const std::vector<double>& observed,
                                const std::vector<double>& expected_prob,
                                double total) {
    if (observed.size() != expected_prob.size() || observed.empty())
        throw DomainError("stats.chi_square_test_p", "bin mismatch");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_prob[i] * total;
        if (e <= 0.0) throw DomainError("stats.chi_square_test_p", "nonpositive expected count");
        const double d = observed[i] - e;
        stat += d * d / e;
    }
    return chi_square_p_value(stat, static_cast<double>(observed.size() - 1));
}

// Kahan-compensated sum; used by the extended-accumulation oracles.
inline double compensated_sum(const std::vector<double>& xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

} // namespace leaflyap

#endif
