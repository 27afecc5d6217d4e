#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rmf/dickman.hpp"
#include "rmf/model.hpp"
#include "rmf/moments.hpp"
#include "rmf/montecarlo.hpp"
#include "rmf/report.hpp"
#include "rmf/sieve.hpp"
#include "rmf/squaresets.hpp"
#include "rmf/stats.hpp"

namespace rmf {

struct VerifyResult {
    Table table;
    bool all_passed = true;
};

// Exact conditional-mean check: for each assignment of the earlier variables,
// averaging M_p(n) over the support of X_p must give exactly zero. T below is
// the multiplier of X_p in M_p(n); everything stays rational.
inline bool conditional_zero_exact(const ModelSpec& spec, const SieveTables& t, std::uint64_t n,
                                   std::uint64_t p) {
    const auto ells = martingale_support(t, n, p);
    std::vector<std::uint64_t> qs;
    for (std::uint64_t ell : ells)
        for_each_prime_factor(t, ell, [&](std::uint64_t q) {
            if (q != p) qs.push_back(q);
        });
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    std::vector<std::vector<Rational>> choices;
    for (std::uint64_t q : qs) {
        choices.emplace_back();
        for (const auto& a : spec.support_for(q)) choices.back().push_back(a.value);
    }
    std::vector<std::size_t> odo(qs.size(), 0);
    for (;;) {
        Rational t_mult = 0;
        for (std::uint64_t ell : ells) {
            Rational prod = 1;
            for_each_prime_factor(t, ell, [&](std::uint64_t q) {
                if (q == p) return;
                const std::size_t qi = static_cast<std::size_t>(
                    std::lower_bound(qs.begin(), qs.end(), q) - qs.begin());
                prod *= choices[qi][odo[qi]];
            });
            t_mult += prod;
        }
        Rational cond_mean = 0;
        for (const auto& a : spec.support_for(p)) cond_mean += a.prob * (a.value * t_mult);
        if (cond_mean != 0) return false;
        std::size_t pos = 0;
        while (pos < qs.size() && ++odo[pos] == choices[pos].size()) odo[pos++] = 0;
        if (pos == qs.size()) break;
    }
    return true;
}

namespace verify_detail {

struct Runner {
    Table& table;
    std::string level;
    bool& all_ok;

    void check(const std::string& name, bool ok, const std::string& detail) {
        table.row().text(name).text(level).text(ok ? "pass" : "FAIL").text(detail);
        if (!ok) all_ok = false;
    }
};

inline bool trial_division_consistent(const SieveTables& t, std::uint64_t ell) {
    bool sf = true;
    unsigned w = 0;
    std::uint64_t largest = 0, m = ell;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        ++w;
        largest = p;
        unsigned e = 0;
        while (m % p == 0) m /= p, ++e;
        if (e > 1) sf = false;
    }
    if (m > 1) ++w, largest = m;
    return sf == t.is_squarefree(ell) && w == t.omega[ell] &&
           (ell < 2 || largest == t.largest_prime_factor[ell]);
}

inline bool distributions_equal(const WeightDistribution& a, const WeightDistribution& b) {
    return a.counts == b.counts && a.rank == b.rank && a.nullity == b.nullity;
}

}  // namespace verify_detail

// Cross-module invariant suite. `quick` keeps every check under a second or
// so; `full` runs the advertised ranges. The emitted table is a pure function
// of (level, seed) — thread count must never change a byte of it.
inline VerifyResult run_verify(const std::string& level, std::uint64_t seed, unsigned threads) {
    const bool full = level == "full";
    VerifyResult res{Table({"check", "level", "status", "detail"}), true};
    verify_detail::Runner r{res.table, level, res.all_passed};

    const std::uint64_t table_n = full ? 1'000'000 : 100'000;
    const SieveTables t = build_tables(table_n);
    const ModelSpec rad = ModelSpec::rademacher();

    {  // tables vs trial division on a seeded sample
        const std::uint64_t samples = full ? 10'000 : 2'000;
        bool ok = true;
        std::uint64_t bad = 0;
        for (std::uint64_t i = 0; i < samples; ++i) {
            const std::uint64_t ell = 2 + counter_hash(seed, 1, i) % (table_n - 1);
            if (!verify_detail::trial_division_consistent(t, ell)) {
                ok = false;
                bad = ell;
                break;
            }
        }
        r.check("sieve-factorization-spot", ok,
                ok ? std::to_string(samples) + " values" : "mismatch at " + std::to_string(bad));
    }
    {  // squarefree density against 6/pi^2
        const double density =
            static_cast<double>(squarefree_count(t, table_n)) / static_cast<double>(table_n);
        const double target = 6.0 / (std::numbers::pi * std::numbers::pi);
        const double tol = full ? 1e-4 : 1e-3;
        r.check("squarefree-density", std::abs(density - target) < tol,
                "Q(n)/n=" + format_double(density));
    }
    {  // psi identities
        bool ok = true;
        for (std::uint64_t x : {std::uint64_t{1}, std::uint64_t{10}, std::uint64_t{100},
                                std::uint64_t{1000}, std::uint64_t{65536}}) {
            const std::uint64_t expect = static_cast<std::uint64_t>(std::floor(std::log2(static_cast<double>(x)))) + 1;
            if (smooth_count(t, x, 2) != expect) ok = false;
        }
        ok = ok && smooth_count(t, 10, 3) == 7 && smooth_count(t, 16, 2) == 5;
        ok = ok && smooth_count(t, 1000, 7) <= smooth_count(t, 1000, 11) &&
             smooth_count(t, 500, 7) <= smooth_count(t, 1000, 7);
        r.check("smooth-count-identities", ok, "psi(x,2), psi(10,3), monotonicity");
    }
    {  // Dickman closed forms on [0,2]
        const DickmanTable rho(4.0);
        const double e15 = std::abs(rho(1.5) - (1.0 - std::log(1.5)));
        const double e20 = std::abs(rho(2.0) - (1.0 - std::log(2.0)));
        const bool ok = e15 < 1e-8 && e20 < 1e-8 && rho(3.0) < rho(2.0) && rho(0.5) == 1.0;
        r.check("dickman-closed-form", ok, "err(2)=" + format_double(e20));
    }
    {  // Moebius realization: theta under X = -1 equals mu; Mertens values
        const ModelSpec mob = ModelSpec::mobius_deterministic();
        const SamplePath path = sample_path(mob, t, seed, 0);
        bool ok = true;
        for (std::uint64_t ell = 1; ell <= 100; ++ell)
            if (theta(path, t, ell) != static_cast<double>(t.moebius(ell))) ok = false;
        const std::uint64_t grid[2] = {10, 100};
        const auto sums = partial_sums(path, t, grid);
        ok = ok && sums[0] == -1.0 && sums[1] == 1.0;
        r.check("moebius-realization", ok, "S_10=-1, S_100=1");
    }
    {  // decomposition identity, exact on Rademacher paths
        const std::uint64_t n = full ? 10'000 : 2'000;
        const std::uint64_t paths = full ? 100 : 10;
        bool ok = true;
        for (std::uint64_t pid = 0; pid < paths && ok; ++pid) {
            const SamplePath path = sample_path(rad, t, seed, pid);
            const std::uint64_t grid[1] = {n};
            const double s_n = partial_sums(path, t, grid)[0];
            ok = martingale_decomposition(path, t, n).total() == s_n;
        }
        r.check("martingale-decomposition-identity", ok,
                std::to_string(paths) + " paths at n=" + std::to_string(n));
    }
    {  // conditional zero, exact rationals
        bool ok = true;
        for (std::uint32_t p : t.primes) {
            if (p > 30) break;
            ok = ok && conditional_zero_exact(rad, t, 30, p);
        }
        const ModelSpec half = ModelSpec::symmetric_finite(
            {{Rational(1), Rational(1, 4)},
             {Rational(-1), Rational(1, 4)},
             {Rational(1, 2), Rational(1, 4)},
             {Rational(-1, 2), Rational(1, 4)}});
        for (std::uint32_t p : t.primes) {
            if (p > 20) break;
            ok = ok && conditional_zero_exact(half, t, 20, p);
        }
        r.check("martingale-conditional-zero", ok, "exact over support enumeration");
    }
    {  // theta multiplicativity on coprime squarefree pairs
        const SamplePath path = sample_path(rad, t, seed, 7);
        bool ok = true;
        std::uint64_t tested = 0;
        for (std::uint64_t i = 0; tested < 200 && i < 4000; ++i) {
            const std::uint64_t a = 1 + counter_hash(seed, 2, 2 * i) % 300;
            const std::uint64_t b = 1 + counter_hash(seed, 2, 2 * i + 1) % 300;
            if (!t.is_squarefree(a) || !t.is_squarefree(b)) continue;
            if (std::gcd(a, b) != 1 || a * b > t.n_max) continue;
            ++tested;
            if (theta(path, t, a * b) != theta(path, t, a) * theta(path, t, b)) ok = false;
        }
        r.check("theta-multiplicative", ok, std::to_string(tested) + " coprime pairs");
    }
    {  // three-way bad-set agreement
        const std::uint64_t n_hi = full ? 20 : 12;
        bool ok = true;
        for (std::uint64_t n = 1; n <= n_hi && ok; ++n) {
            const auto m = build_exponent_matrix(t, n);
            const auto kd = badset_counts_kernel(m, 0, 28, threads);
            const auto md = badset_counts_macwilliams(m, 26, threads);
            const auto bd = brute_force_badsets(t, n);
            ok = verify_detail::distributions_equal(kd, md) && kd.counts == bd.counts;
        }
        r.check("badset-triple-agreement", ok, "n <= " + std::to_string(n_hi));
    }
    {  // kernel vs MacWilliams on larger n
        const std::uint64_t n_hi = full ? 60 : 30;
        const auto m = build_exponent_matrix(t, n_hi);
        const bool ok = verify_detail::distributions_equal(badset_counts_kernel(m, 0, 28, threads),
                                                           badset_counts_macwilliams(m, 26, threads));
        r.check("badset-dual-agreement", ok, "n = " + std::to_string(n_hi));
    }
    {  // the l = 1 column is the zero vector, so the kernel splits as
       // K0 x {0, {1}} with K0 the kernel without column 1:
       // counts[w] = K0[w] + K0[w-1].
        const std::uint64_t n = full ? 60 : 30;
        const auto m = build_exponent_matrix(t, n);
        const auto d = badset_counts_kernel(m, 0, 28, threads);
        auto m0 = m;
        m0.squarefree_list.erase(m0.squarefree_list.begin());
        m0.column_words.erase(m0.column_words.begin(),
                              m0.column_words.begin() + static_cast<std::ptrdiff_t>(m0.words_per_column));
        const auto d0 = badset_counts_kernel(m0, 0, 28, threads);
        auto k0 = [&](unsigned w) {
            auto it = d0.counts.find(w);
            return it == d0.counts.end() ? BigInt(0) : it->second;
        };
        bool ok = d0.nullity + 1 == d.nullity;
        for (unsigned w = 0; w <= d.set_size && ok; ++w) {
            const BigInt lhs = d.counts.count(w) ? d.counts.at(w) : BigInt(0);
            ok = lhs == k0(w) + (w > 0 ? k0(w - 1) : BigInt(0));
        }
        r.check("badset-column-one-pairing", ok, "n = " + std::to_string(n));
    }
    {  // moment enumeration vs tuple oracle (even and odd orders)
        const std::uint64_t n_hi = full ? 8 : 6;
        const unsigned order_hi = full ? 6 : 4;
        bool ok = true;
        for (std::uint64_t n = 1; n <= n_hi && ok; ++n)
            for (unsigned order = 1; order <= order_hi && ok; ++order) {
                const Rational lhs = exact_moment_of_order(t, n, order);
                const BigInt rhs = square_product_tuple_count(t, n, order);
                ok = lhs == Rational(rhs);
            }
        r.check("moment-tuple-oracle", ok,
                "n <= " + std::to_string(n_hi) + ", order <= " + std::to_string(order_hi));
    }
    {  // second moment three ways
        bool ok = true;
        for (std::uint64_t n : {std::uint64_t{10}, std::uint64_t{25}}) {
            const BigInt via_enum = exact_moment_enumeration(t, n, 1);
            const Rational via_formula = second_moment_formula(rad, t, n);
            ok = ok && via_enum == squarefree_count(t, n) && via_formula == Rational(via_enum);
        }
        r.check("second-moment-identity", ok, "enumeration = formula = Q(n)");
    }
    {  // characteristic function closed form at n = 3
        bool ok = true;
        for (double tv : {0.0, 0.5, 1.0, std::numbers::pi}) {
            const auto cf = exact_charfn(t, 3, tv);
            const double expect_cos = (std::cos(3 * tv) + 3 * std::cos(tv)) / 4.0;
            const double expect_sin = (std::sin(3 * tv) + std::sin(tv)) / 4.0;
            ok = ok && std::abs(cf.cos_mean - expect_cos) < 1e-12 &&
                 std::abs(cf.sin_mean - expect_sin) < 1e-12;
        }
        r.check("charfn-closed-form", ok, "n=3 four-case form");
    }
    {  // sign-space charfn vs the kernel-count expansion (independent routes)
        const std::uint64_t n = full ? 25 : 15;
        const auto dist = badset_counts_kernel(build_exponent_matrix(t, n), 0, 28, threads);
        bool ok = true;
        for (double tv : {0.4, 1.0, 2.5}) {
            const auto a = exact_charfn(t, n, tv);
            const auto b = charfn_via_kernel_counts(dist, tv);
            ok = ok && std::abs(a.cos_mean - b.cos_mean) < 1e-11 &&
                 std::abs(a.sin_mean - b.sin_mean) < 1e-11;
        }
        r.check("charfn-kernel-expansion", ok, "n = " + std::to_string(n));
    }
    {  // exact sup norm equals term count for Rademacher (all-plus attains it)
        bool ok = true;
        for (std::uint32_t p : t.primes) {
            if (p > 30) break;
            const auto ells = martingale_support(t, 30, p);
            ok = ok && sup_norm_Mp(rad, t, 30, p) == static_cast<double>(ells.size());
        }
        r.check("supnorm-term-count", ok, "n = 30, all p");
    }
    {  // sampler determinism and thread-count independence
        const std::uint64_t grid[2] = {100, full ? std::uint64_t{5000} : std::uint64_t{1000}};
        McOptions a{512, seed, 1};
        McOptions b{512, seed, threads > 1 ? threads : 4};
        const auto sa = mc_sample_sums(rad, t, grid, a);
        const auto sb = mc_sample_sums(rad, t, grid, b);
        bool ok = sa == sb;
        const SamplePath p1 = sample_path(rad, t, seed, 3);
        const SamplePath p2 = sample_path(rad, t, seed, 3);
        ok = ok && p1.values == p2.values;
        r.check("sampler-determinism", ok, "chunked runs identical across thread counts");
    }
    {  // sampler CLT sanity: mean of X_2 across paths
        const std::uint64_t paths = full ? 100'000 : 10'000;
        double sum = 0.0;
        for (std::uint64_t pid = 0; pid < paths; ++pid)
            sum += rad.draw(seed, pid, 0, 2);
        const double mean = sum / static_cast<double>(paths);
        const double limit = 4.0 / std::sqrt(static_cast<double>(paths));
        r.check("sampler-clt-sanity", std::abs(mean) < limit,
                "mean(X_2)=" + format_double(mean) + " limit=" + format_double(limit));
    }
    return res;
}

}  // namespace rmf
