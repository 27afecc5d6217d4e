#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmf/model.hpp"
#include "rmf/parallel.hpp"
#include "rmf/sieve.hpp"
#include "rmf/stats.hpp"

namespace rmf {

// ---------------------------------------------------------------------------
// Path evaluation plan. theta is multiplicative along the smallest-prime-
// factor chain: for squarefree l = p * m with p = spf(l), theta_l = X_p *
// theta_m and m is an earlier squarefree integer. Walking the squarefree list
// in order therefore evaluates every theta with one multiply per term.
// ---------------------------------------------------------------------------
struct ThetaPlan {
    std::uint64_t n = 0;
    std::vector<std::uint32_t> ell;        // squarefree integers, ascending; ell[0] = 1
    std::vector<std::uint32_t> parent;     // index of l / spf(l) in this list
    std::vector<std::uint32_t> prime_idx;  // index of spf(l) in tables.primes
    std::size_t prime_count = 0;

    static ThetaPlan build(const SieveTables& t, std::uint64_t n) {
        t.check_range(n, "ThetaPlan");
        ThetaPlan plan;
        plan.n = n;
        plan.prime_count = t.prime_count_upto(n);
        std::vector<std::uint32_t> position(n + 1, 0);
        plan.ell.push_back(1);
        plan.parent.push_back(0);
        plan.prime_idx.push_back(0);
        for (std::uint64_t l = 2; l <= n; ++l) {
            if (!t.is_squarefree(l)) continue;
            const std::uint32_t p = t.smallest_prime_factor[l];
            position[l] = static_cast<std::uint32_t>(plan.ell.size());
            plan.ell.push_back(static_cast<std::uint32_t>(l));
            plan.parent.push_back(position[l / p]);
            plan.prime_idx.push_back(static_cast<std::uint32_t>(t.prime_index(p)));
        }
        return plan;
    }
};

struct McOptions {
    std::uint64_t paths = 10'000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::uint64_t first_path_id = 0;
};

namespace detail {

// Rademacher-family fast path: signs as int8, S accumulated in int64.
template <class Emit>
void walk_path_signs(const ThetaPlan& plan, const SieveTables& t, std::span<const std::uint64_t> grid,
                     const ModelSpec& spec, std::uint64_t seed, std::uint64_t path_id,
                     std::vector<std::int8_t>& signs, std::vector<std::int8_t>& th, Emit&& emit) {
    const bool mobius = spec.family == Family::mobius_deterministic;
    for (std::size_t i = 0; i < plan.prime_count; ++i)
        signs[i] = mobius ? std::int8_t{-1}
                          : ((counter_hash(seed, path_id, i) >> 63) ? std::int8_t{1} : std::int8_t{-1});
    th[0] = 1;
    std::int64_t s = 1;
    std::size_t g = 0;
    while (g < grid.size() && grid[g] < 1) emit(g++, 0.0);
    while (g < grid.size() && grid[g] < 2) emit(g++, 1.0);
    for (std::size_t i = 1; i < plan.ell.size(); ++i) {
        th[i] = static_cast<std::int8_t>(signs[plan.prime_idx[i]] * th[plan.parent[i]]);
        s += th[i];
        const std::uint64_t next = i + 1 < plan.ell.size() ? plan.ell[i + 1] : plan.n + 1;
        while (g < grid.size() && grid[g] >= plan.ell[i] && grid[g] < next)
            emit(g++, static_cast<double>(s));
    }
    while (g < grid.size()) emit(g++, static_cast<double>(s));
    (void)t;
}

template <class Emit>
void walk_path_values(const ThetaPlan& plan, const SieveTables& t, std::span<const std::uint64_t> grid,
                      const ModelSpec& spec, std::uint64_t seed, std::uint64_t path_id,
                      std::vector<double>& values, std::vector<double>& th, Emit&& emit) {
    for (std::size_t i = 0; i < plan.prime_count; ++i)
        values[i] = spec.draw(seed, path_id, i, t.primes[i]);
    th[0] = 1.0;
    double s = 1.0;
    std::size_t g = 0;
    while (g < grid.size() && grid[g] < 1) emit(g++, 0.0);
    while (g < grid.size() && grid[g] < 2) emit(g++, 1.0);
    for (std::size_t i = 1; i < plan.ell.size(); ++i) {
        th[i] = values[plan.prime_idx[i]] * th[plan.parent[i]];
        s += th[i];
        const std::uint64_t next = i + 1 < plan.ell.size() ? plan.ell[i + 1] : plan.n + 1;
        while (g < grid.size() && grid[g] >= plan.ell[i] && grid[g] < next) emit(g++, s);
    }
    while (g < grid.size()) emit(g++, s);
}

}  // namespace detail

// S_n for every path at every grid point: result[g][path]. Work is
// partitioned over paths; each path writes only its own slots, so the result
// is bit-identical for any thread count.
inline std::vector<std::vector<double>> mc_sample_sums(const ModelSpec& spec, const SieveTables& t,
                                                       std::span<const std::uint64_t> n_grid,
                                                       const McOptions& opt) {
    if (n_grid.empty()) throw std::invalid_argument("mc_sample_sums: empty grid");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] < n_grid[i - 1]) throw std::invalid_argument("mc_sample_sums: grid must be sorted");
    t.check_range(n_grid.back(), "mc_sample_sums");
    spec.validate();
    const ThetaPlan plan = ThetaPlan::build(t, n_grid.back());
    std::vector<std::vector<double>> out(n_grid.size(), std::vector<double>(opt.paths));
    const bool sign_family =
        spec.family == Family::rademacher || spec.family == Family::mobius_deterministic;
    for_each_chunk(opt.paths, 256, opt.threads, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
        std::vector<std::int8_t> signs(plan.prime_count), th8(plan.ell.size());
        std::vector<double> values, thd;
        if (!sign_family) {
            values.resize(plan.prime_count);
            thd.resize(plan.ell.size());
        }
        for (std::uint64_t pid = begin; pid < end; ++pid) {
            auto emit = [&](std::size_t g, double s) { out[g][pid] = s; };
            if (sign_family)
                detail::walk_path_signs(plan, t, n_grid, spec, opt.seed, opt.first_path_id + pid, signs,
                                        th8, emit);
            else
                detail::walk_path_values(plan, t, n_grid, spec, opt.seed, opt.first_path_id + pid,
                                         values, thd, emit);
        }
    });
    return out;
}

enum class Method { enumeration, formula, tuple_oracle, monte_carlo };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::enumeration: return "enumeration";
        case Method::formula: return "formula";
        case Method::tuple_oracle: return "tuple-oracle";
        case Method::monte_carlo: return "monte-carlo";
    }
    return "?";
}

// One estimated or exact quantity with provenance. Exact methods carry
// standard_error = 0 and paths = 0.
struct MomentReport {
    std::uint64_t n = 0;
    std::string parameter;  // e.g. "2r=4", "t0=1.5", "lambda=0.5", "t=1"
    double value = 0.0;
    double standard_error = 0.0;
    Method method = Method::monte_carlo;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

inline std::vector<MomentReport> mc_moments(const ModelSpec& spec, const SieveTables& t,
                                            std::span<const std::uint64_t> n_grid,
                                            std::span<const unsigned> r_list, const McOptions& opt) {
    if (opt.paths < 2) throw std::invalid_argument("mc_moments: need paths >= 2");
    const auto sums = mc_sample_sums(spec, t, n_grid, opt);
    std::vector<MomentReport> reports;
    std::vector<double> powered;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        for (unsigned r : r_list) {
            powered.resize(sums[g].size());
            for (std::size_t i = 0; i < sums[g].size(); ++i) {
                double v = 1.0;
                for (unsigned j = 0; j < 2 * r; ++j) v *= sums[g][i];
                powered[i] = v;
            }
            const auto ms = mean_and_se(powered);
            reports.push_back({n_grid[g], "2r=" + std::to_string(2 * r), ms.mean, ms.se,
                               Method::monte_carlo, opt.paths, opt.seed});
        }
    }
    return reports;
}

struct TailReport {
    std::uint64_t n = 0;
    double t0 = 0.0;
    double p_hat = 0.0;
    double standard_error = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 1.0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

inline std::vector<TailReport> mc_tail(const ModelSpec& spec, const SieveTables& t, std::uint64_t n,
                                       std::span<const double> t0_grid, const McOptions& opt) {
    if (opt.paths < 100) throw std::invalid_argument("mc_tail: need paths >= 100");
    const std::uint64_t grid[1] = {n};
    const auto sums = mc_sample_sums(spec, t, grid, opt);
    std::vector<TailReport> out;
    for (double t0 : t0_grid) {
        std::uint64_t hits = 0;
        for (double s : sums[0])
            if (s >= t0) ++hits;
        const auto w = wilson_interval(hits, opt.paths);
        const double se = std::sqrt(w.p_hat * (1.0 - w.p_hat) / static_cast<double>(opt.paths));
        out.push_back({n, t0, w.p_hat, se, w.lo, w.hi, opt.paths, opt.seed});
    }
    return out;
}

// Normalizing sequence a_n for the characteristic-function probes.
struct NormalizationRule {
    std::string name = "sqrt-n";
    std::function<double(std::uint64_t)> custom;  // used when name == "custom"

    double operator()(std::uint64_t n) const {
        const double nd = static_cast<double>(n);
        double a = 0.0;
        if (name == "sqrt-n") a = std::sqrt(nd);
        else if (name == "sqrt-n-over-log-n") a = std::sqrt(nd / std::log(nd));
        else if (name == "b-n") a = std::sqrt(nd) * std::pow(std::log(std::log(nd)), -0.25);
        else if (name == "custom" && custom) a = custom(n);
        else throw std::invalid_argument("NormalizationRule: unknown rule " + name);
        if (!(a > 0.0) || !std::isfinite(a))
            throw std::invalid_argument("NormalizationRule: a_n must be positive and finite at n = " +
                                        std::to_string(n));
        return a;
    }
};

struct CharFnReport {
    std::uint64_t n = 0;
    double t = 0.0;
    double a_n = 1.0;
    double estimate = 0.0;
    double standard_error = 0.0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

inline std::vector<CharFnReport> mc_charfn_decay(const ModelSpec& spec, const SieveTables& t,
                                                 std::span<const std::uint64_t> n_grid, double t_val,
                                                 const NormalizationRule& a_rule, const McOptions& opt) {
    if (opt.paths < 2) throw std::invalid_argument("mc_charfn_decay: need paths >= 2");
    const auto sums = mc_sample_sums(spec, t, n_grid, opt);
    std::vector<CharFnReport> out;
    std::vector<double> cosines;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const double a = a_rule(n_grid[g]);
        cosines.resize(sums[g].size());
        for (std::size_t i = 0; i < sums[g].size(); ++i)
            cosines[i] = std::cos(t_val * sums[g][i] / a);
        const auto ms = mean_and_se(cosines);
        out.push_back({n_grid[g], t_val, a, ms.mean, ms.se, opt.paths, opt.seed});
    }
    return out;
}

struct GrowthReport {
    double epsilon = 0.0;
    std::vector<std::uint64_t> grid;
    std::vector<std::pair<double, double>> quantiles;  // (q, value of sup_n n^{-1/2-eps} |S_n|)
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

// Per-path supremum of n^{-1/2-eps} |S_n| over a factor-2 geometric grid,
// reported as quantiles across paths.
inline GrowthReport path_growth_report(const ModelSpec& spec, const SieveTables& t, std::uint64_t n_max,
                                       double epsilon, const McOptions& opt,
                                       std::span<const double> qs_in = {}) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("path_growth_report: epsilon must be > 0");
    t.check_range(n_max, "path_growth_report");
    GrowthReport rep;
    rep.epsilon = epsilon;
    rep.paths = opt.paths;
    rep.seed = opt.seed;
    for (std::uint64_t n = 1; n <= n_max; n *= 2) rep.grid.push_back(n);
    if (rep.grid.back() != n_max) rep.grid.push_back(n_max);
    const auto sums = mc_sample_sums(spec, t, rep.grid, opt);
    std::vector<double> weight(rep.grid.size());
    for (std::size_t g = 0; g < rep.grid.size(); ++g)
        weight[g] = std::pow(static_cast<double>(rep.grid[g]), -0.5 - epsilon);
    std::vector<double> sup(opt.paths, 0.0);
    for (std::size_t g = 0; g < rep.grid.size(); ++g)
        for (std::uint64_t p = 0; p < opt.paths; ++p)
            sup[p] = std::max(sup[p], weight[g] * std::abs(sums[g][p]));
    static constexpr double default_qs[] = {0.5, 0.9, 0.99, 1.0};
    std::span<const double> qs = qs_in.empty() ? std::span<const double>(default_qs) : qs_in;
    for (double q : qs) rep.quantiles.emplace_back(q, quantile(sup, q));
    return rep;
}

struct NormalityReport {
    std::size_t samples = 0;
    double excess_kurtosis = 0.0;
    double kurtosis_se = 0.0;
    double ks_distance = 0.0;  // against N(0, Q_n)
};

inline NormalityReport normality_diagnostics(std::span<const double> samples, std::uint64_t n,
                                             double q_n) {
    (void)n;
    if (samples.size() < 1000)
        throw std::invalid_argument("normality_diagnostics: need at least 1000 samples");
    const auto k = excess_kurtosis(samples);  // throws on zero variance
    NormalityReport rep;
    rep.samples = samples.size();
    rep.excess_kurtosis = k.value;
    rep.kurtosis_se = k.se;
    rep.ks_distance = ks_distance_normal(samples, q_n);
    return rep;
}

}  // namespace rmf
