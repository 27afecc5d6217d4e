#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "rmf/bigint.hpp"
#include "rmf/sieve.hpp"
#include "rmf/squaresets.hpp"

namespace rmf {

// Every analytic bound below carries free constants that the source analysis
// never pins down. They are all exposed here; evaluators are pure functions
// of (params, arguments) and only ever *report* values — dominance against
// exact quantities is asserted solely where specific constants are fixed.
struct BoundParams {
    double c = 1.0;        // omega(l) <= c ln(l)/lnln(l) constant
    double c0 = 1.0;       // subgaussian tail scale constant
    double C = 1.0;        // generic multiplicative constant
    double C1 = 0.5;       // variance sandwich, lower
    double C2 = 1.0;       // variance sandwich, upper
    double c1 = 1.0;       // lower end of the k-range in the tail sum
    double kappa = 1.0;    // O(k^2) constant inside the C_k rule
    double kappa2 = 1.0;   // numerator of the default o(1) exponent rule
    std::function<double(std::uint64_t)> delta_rule;   // n -> o(1) exponent
    std::function<double(unsigned)> ck_rule;           // k -> C_k

    double delta(std::uint64_t n) const {
        if (delta_rule) return delta_rule(n);
        const double ll = std::log(std::log(static_cast<double>(std::max<std::uint64_t>(n, 16))));
        return kappa2 / ll;
    }

    // Default C_k = exp(-2k^2 ln k - 2k^2 lnln k + kappa k^2). The rule is
    // asymptotic in k; lnln k is not usable below k = 3, so small k borrow
    // lnln 3 (logged convention).
    double ck(unsigned k) const {
        if (ck_rule) return ck_rule(k);
        const double kd = static_cast<double>(k);
        const double lnk = k >= 1 ? std::log(kd) : 0.0;
        const double lnlnk = k >= 3 ? std::log(std::log(kd)) : std::log(std::log(3.0));
        return std::exp(-2.0 * kd * kd * lnk - 2.0 * kd * kd * lnlnk + kappa * kd * kd);
    }
};

// M_n = max(M, 1)^{c ln n / lnln n}: the worst-case magnitude of a single
// theta term. Below n = 16 (where lnln is unsafe) returns max(M, 1).
inline double theta_sup_scale(double M, std::uint64_t n, const BoundParams& p) {
    const double base = std::max(M, 1.0);
    if (n < 16) return base;
    const double nd = static_cast<double>(n);
    return std::pow(base, p.c * std::log(nd) / std::log(std::log(nd)));
}

// C1 n^{1 - c |ln a| / lnln n} <= ||S_n||_2^2 <= C2 n^{1 + c ln b / lnln n}
// for a <= E[X_p^2] <= b.
inline std::pair<double, double> variance_sandwich(double a, double b, std::uint64_t n,
                                                   const BoundParams& p) {
    if (!(a > 0.0 && a <= 1.0 && b >= 1.0)) throw std::invalid_argument("variance_sandwich: need 0 < a <= 1 <= b");
    if (n < 16) throw std::invalid_argument("variance_sandwich: n must be >= 16");
    const double nd = static_cast<double>(n);
    const double ll = std::log(std::log(nd));
    const double lo = p.C1 * std::pow(nd, 1.0 - p.c * std::abs(std::log(a)) / ll);
    const double hi = p.C2 * std::pow(nd, 1.0 + p.c * std::log(b) / ll);
    return {lo, hi};
}

// Unconditional even-moment bound E[S_n^{2k}] <= C_k sqrt(n) M_n^{2k}
// (ln n)^{2k^2}, as stated.
inline double even_moment_bound(const BoundParams& p, std::uint64_t n, unsigned k, double M) {
    if (n < 16) throw std::invalid_argument("even_moment_bound: n must be >= 16");
    if (k < 1) throw std::invalid_argument("even_moment_bound: k must be >= 1");
    const double nd = static_cast<double>(n);
    const double mn = theta_sup_scale(M, n, p);
    const double kd = static_cast<double>(k);
    return p.ck(k) * std::sqrt(nd) * std::pow(mn, 2.0 * kd) * std::pow(std::log(nd), 2.0 * kd * kd);
}

// The proof-side variant of the same bound, kept as an alternate formula:
// C_k n^k (ln n)^{2(2k-3)} M_n.
inline double even_moment_bound_alt(const BoundParams& p, std::uint64_t n, unsigned k, double M) {
    if (n < 16) throw std::invalid_argument("even_moment_bound_alt: n must be >= 16");
    if (k < 1) throw std::invalid_argument("even_moment_bound_alt: k must be >= 1");
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    return p.ck(k) * std::pow(nd, kd) * std::pow(std::log(nd), 2.0 * (2.0 * kd - 3.0)) *
           theta_sup_scale(M, n, p);
}

// RH-conditional q-norm bound via the martingale/Burkholder route:
// ||S_n||_q <= C sqrt(q) M_n n^{2/3 + delta(n)}.
inline double lq_norm_bound(const BoundParams& p, std::uint64_t n, double q, double M) {
    if (q < 2.0) throw std::invalid_argument("lq_norm_bound: q must be >= 2");
    const double nd = static_cast<double>(n);
    return p.C * std::sqrt(q) * theta_sup_scale(M, n, p) * std::pow(nd, 2.0 / 3.0 + p.delta(n));
}

struct TailBoundValue {
    double u_n = 0.0;
    double bound = 1.0;
};

// Subgaussian tail from the Azuma route: P(S_n >= t0) <= exp(-t0^2 / u_n),
// u_n = c0 M_n n^{4/3 + delta(n)}.
inline TailBoundValue subgaussian_tail_bound(const BoundParams& p, std::uint64_t n, double t0,
                                             double M) {
    const double u_n = p.c0 * theta_sup_scale(M, n, p) *
                       std::pow(static_cast<double>(n), 4.0 / 3.0 + p.delta(n));
    return {u_n, std::exp(-t0 * t0 / u_n)};
}

// Moment-route bound on the bad-set count:
// B_{2k,n} <= C^{2k} (2k)^k n^{k(3/2 + delta(n))} / (2k)!.
// Evaluated in log space so large k do not overflow.
inline double badset_moment_bound(const BoundParams& p, std::uint64_t n, unsigned k) {
    if (k < 1) throw std::invalid_argument("badset_moment_bound: k must be >= 1");
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    const double log_val = 2.0 * kd * std::log(p.C) + kd * std::log(2.0 * kd) +
                           kd * (1.5 + p.delta(n)) * std::log(nd) - std::lgamma(2.0 * kd + 1.0);
    return std::exp(log_val);
}

struct FlaggedValue {
    double value = 0.0;
    bool in_hypothesis = true;
};

// Range-restricted bad-set bound B_{2k,n} <= C_k n^k (ln n)^{k(2k-3)} / (2k)!,
// stated for 2 <= k <= c ln n / lnln n. Outside that range the value is still
// returned, flagged as out-of-hypothesis.
inline FlaggedValue badset_harper_bound(const BoundParams& p, std::uint64_t n, unsigned k) {
    if (k < 2) throw std::invalid_argument("badset_harper_bound: k must be >= 2");
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    const double log_val = std::log(p.ck(k)) + kd * std::log(nd) +
                           kd * (2.0 * kd - 3.0) * std::log(std::log(nd)) -
                           std::lgamma(2.0 * kd + 1.0);
    FlaggedValue out;
    out.value = std::exp(log_val);
    out.in_hypothesis =
        n >= 16 && kd <= p.c * std::log(nd) / std::log(std::log(nd));
    return out;
}

// Hypercontractive alternative: ||S_n||_{2q} <= (sum over squarefree l <= n
// of ceil(2q-1)^{omega(l)})^{1/2}, summed exactly over the omega histogram.
inline double hypercontractive_bound(const SieveTables& t, std::uint64_t n, double q) {
    if (q < 1.0) throw std::invalid_argument("hypercontractive_bound: q must be >= 1");
    t.check_range(n, "hypercontractive_bound");
    const std::uint64_t base = static_cast<std::uint64_t>(std::ceil(2.0 * q - 1.0));
    std::vector<std::uint64_t> hist;
    for (std::uint64_t ell = 1; ell <= n; ++ell) {
        if (!t.is_squarefree(ell)) continue;
        const unsigned w = t.omega[ell];
        if (hist.size() <= w) hist.resize(w + 1, 0);
        ++hist[w];
    }
    BigInt total = 0;
    BigInt pw = 1;
    for (std::size_t w = 0; w < hist.size(); ++w) {
        if (hist[w]) total += BigInt(hist[w]) * pw;
        pw *= base;
    }
    return std::exp(0.5 * big_log(total));
}

// The normalized remainder sum from the no-weak-limit argument:
//    exp(-c0 n t^2 / a_n^2) * sum_k t^{2k} M_n^{2k} B_{2k,n} / a_n^{2k}
// over k in [c1 ln n / lnln n, n^{1/2+eps}], intersected with the range where
// B can be nonzero. Requires the histogram to cover that range.
inline double charfn_tail_sum(const SieveTables& t, const WeightDistribution& dist, std::uint64_t n,
                              double t_val, double a_n, double M, const BoundParams& p,
                              double eps = 0.25) {
    t.check_range(n, "charfn_tail_sum");
    if (!(a_n > 0.0)) throw std::invalid_argument("charfn_tail_sum: a_n must be positive");
    if (t_val == 0.0) return 0.0;
    const double nd = static_cast<double>(n);
    const double ll = n >= 16 ? std::log(std::log(nd)) : 1.0;
    const unsigned k_lo = std::max<unsigned>(1, static_cast<unsigned>(std::ceil(p.c1 * std::log(nd) / ll)));
    const unsigned feasible = static_cast<unsigned>(dist.set_size / 2);
    const unsigned k_hi = std::min<unsigned>(
        feasible, static_cast<unsigned>(std::floor(std::pow(nd, 0.5 + eps))));
    const double mn = theta_sup_scale(M, n, p);
    const double log_term_base = 2.0 * (std::log(std::abs(t_val)) + std::log(mn) - std::log(a_n));
    double sum = 0.0;
    for (unsigned k = k_lo; k <= k_hi; ++k) {
        const BigInt b = dist.badset_count(2 * k);  // throws if histogram is capped short of 2k
        if (b == 0) continue;
        sum += std::exp(static_cast<double>(k) * log_term_base + big_log(b));
    }
    return std::exp(-p.c0 * nd * t_val * t_val / (a_n * a_n)) * sum;
}

struct IntegralValue {
    double value = 0.0;
    double ratio_to_log = 0.0;  // value / ln(beta)
};

// I(beta) = int_0^inf beta^{alpha/(alpha+1)} e^{-2 alpha ln alpha} / (1+alpha)^2 d alpha.
// Composite Simpson on [0, A]; the cutoff A is grown until the analytic tail
// bound beta * exp(-2A ln A) / (2 ln A + 2) drops below 1e-12 of the running
// value. The integrand extends continuously to alpha = 0 with value 1.
inline IntegralValue supnorm_integral(double beta, double quad_step = 1e-3) {
    if (beta < 2.0) throw std::invalid_argument("supnorm_integral: beta must be >= 2");
    if (!(quad_step > 0.0)) throw std::invalid_argument("supnorm_integral: step must be positive");
    const double lb = std::log(beta);
    auto integrand = [&](double a) {
        if (a <= 0.0) return 1.0;
        return std::exp(lb * a / (a + 1.0) - 2.0 * a * std::log(a)) / ((1.0 + a) * (1.0 + a));
    };
    double A = 4.0;
    auto integrate_to = [&](double upper) {
        const std::uint64_t steps = std::max<std::uint64_t>(
            4, static_cast<std::uint64_t>(std::ceil(upper / quad_step)) & ~std::uint64_t{1});
        const double h = upper / static_cast<double>(steps);
        double acc = integrand(0.0) + integrand(upper);
        for (std::uint64_t i = 1; i < steps; ++i)
            acc += integrand(h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    double value = integrate_to(A);
    for (;;) {
        const double tail = beta * std::exp(-2.0 * A * std::log(A)) / (2.0 * std::log(A) + 2.0);
        if (tail < 1e-12 * value || A > 1e4) break;
        A *= 2.0;
        value = integrate_to(A);
    }
    return {value, value / lb};
}

// Smooth-count route bound on a single martingale cell:
// ||M_p(n)||_inf <= C1 M_n (n/p) (ln(n/p)/ln p)^{-ln(n/p)/ln p},
// stated under p >= (ln(n/p))^3; evaluated (and flagged) outside it.
inline FlaggedValue martingale_supnorm_bound(const BoundParams& params, std::uint64_t n,
                                             std::uint64_t p, double M) {
    if (p < 2 || p > n) throw std::invalid_argument("martingale_supnorm_bound: need 2 <= p <= n");
    const double nd = static_cast<double>(n);
    const double pd = static_cast<double>(p);
    const double u = std::log(nd / pd) / std::log(pd);
    const double damping = u > 0.0 ? std::exp(-u * std::log(u)) : 1.0;  // u^{-u} -> 1 as u -> 0
    FlaggedValue out;
    out.value = params.C1 * theta_sup_scale(M, n, params) * (nd / pd) * damping;
    out.in_hypothesis = pd >= std::pow(std::log(nd / pd), 3.0);
    return out;
}

// Log-derivative of the integrand scale exp(2 a ln n/(1+a) - 2 a ln a): it is
// strictly decreasing from +inf to -inf on (0, inf), so it changes sign once.
inline double supnorm_integrand_log_derivative(std::uint64_t n, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("supnorm_integrand_log_derivative: alpha > 0");
    const double ln_n = std::log(static_cast<double>(n));
    return 2.0 * ln_n / ((1.0 + alpha) * (1.0 + alpha)) - 2.0 * (1.0 + std::log(alpha));
}

// Log-derivative of the moment weight (ln n / x)^{2x^2}; vanishes at
// x = ln(n)/e, the maximizer.
inline double moment_weight_log_derivative(std::uint64_t n, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("moment_weight_log_derivative: x > 0");
    return 2.0 * x * (std::log(std::log(static_cast<double>(n))) - std::log(x) - 1.0);
}

}  // namespace rmf
