#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rmf {

// Kahan-compensated sum; summation order is the caller's, so results are
// reproducible for a fixed input order.
inline double compensated_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> xs) {
    if (xs.size() < 2) throw std::invalid_argument("mean_and_se: need at least 2 samples");
    const double n = static_cast<double>(xs.size());
    const double mean = compensated_sum(xs) / n;
    double ss = 0.0, c = 0.0;
    for (double x : xs) {
        const double d = (x - mean) * (x - mean) - c;
        const double t = ss + d;
        c = (t - ss) - d;
        ss = t;
    }
    const double var = ss / (n - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

inline double normal_cdf(double x, double mean, double variance) {
    if (!(variance > 0.0)) throw std::invalid_argument("normal_cdf: variance must be positive");
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

struct WilsonInterval {
    double p_hat = 0.0;
    double lo = 0.0;
    double hi = 1.0;
};

inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

// Kolmogorov-Smirnov distance between the sample and N(0, variance).
inline double ks_distance_normal(std::span<const double> samples, double variance) {
    if (samples.empty()) throw std::invalid_argument("ks_distance_normal: empty sample");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i], 0.0, variance);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

struct RatioEstimate {
    double value = 0.0;
    double se = 0.0;
};

namespace detail {
struct PowerSums {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
};

inline PowerSums power_sums(std::span<const double> xs) {
    PowerSums ps;
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    auto add = [](double& s, double& c, double v) {
        const double y = v - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    };
    for (double x : xs) {
        const double x2 = x * x;
        add(ps.s1, c1, x);
        add(ps.s2, c2, x2);
        add(ps.s3, c3, x2 * x);
        add(ps.s4, c4, x2 * x2);
    }
    return ps;
}
}  // namespace detail

// Delete-one jackknife for a ratio statistic derived from raw power sums;
// `stat(s1, s2, s3, s4, n)` maps leave-one-out sums to the statistic.
template <class Stat>
RatioEstimate jackknife_from_power_sums(std::span<const double> xs, Stat&& stat) {
    const std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("jackknife: need at least 3 samples");
    const auto ps = detail::power_sums(xs);
    const double full = stat(ps.s1, ps.s2, ps.s3, ps.s4, static_cast<double>(n));
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i], x2 = x * x;
        loo[i] = stat(ps.s1 - x, ps.s2 - x2, ps.s3 - x2 * x, ps.s4 - x2 * x2,
                      static_cast<double>(n - 1));
    }
    double mean_loo = compensated_sum(loo) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
    const double se = std::sqrt(ss * (static_cast<double>(n - 1) / static_cast<double>(n)));
    (void)full;
    return {full, se};
}

// Raw fourth-over-second-squared moment ratio E[X^4] / E[X^2]^2 with a
// jackknife standard error. This is the CLT-failure probe: it equals 3 for a
// centered Gaussian but grows without bound for S_n.
inline RatioEstimate raw_kurtosis_ratio(std::span<const double> xs) {
    return jackknife_from_power_sums(xs, [](double, double s2, double, double s4, double n) {
        const double m2 = s2 / n;
        const double m4 = s4 / n;
        if (m2 == 0.0) throw std::invalid_argument("raw_kurtosis_ratio: zero second moment");
        return m4 / (m2 * m2);
    });
}

// Central excess kurtosis m4/m2^2 - 3 with a jackknife standard error.
inline RatioEstimate excess_kurtosis(std::span<const double> xs) {
    return jackknife_from_power_sums(xs, [](double s1, double s2, double s3, double s4, double n) {
        const double m = s1 / n;
        const double m2 = s2 / n - m * m;
        const double m4 = (s4 - 4.0 * m * s3 + 6.0 * m * m * s2 - 3.0 * n * m * m * m * m) / n;
        if (!(m2 > 0.0)) throw std::invalid_argument("excess_kurtosis: zero variance");
        return m4 / (m2 * m2) - 3.0;
    });
}

// Order-statistic quantile of an (unsorted) sample; q in [0, 1].
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0,1]");
    std::sort(xs.begin(), xs.end());
    const std::size_t idx = std::min(xs.size() - 1,
                                     static_cast<std::size_t>(std::ceil(q * static_cast<double>(xs.size()))) -
                                         (q > 0.0 ? 1 : 0));
    return xs[idx];
}

}  // namespace rmf
