#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rmf/bounds.hpp"
#include "rmf/moments.hpp"
#include "rmf/montecarlo.hpp"
#include "rmf/sieve.hpp"
#include "rmf/squaresets.hpp"

using namespace rmf;

namespace {
const SieveTables& tables() {
    static const SieveTables t = build_tables(1'000'000);
    return t;
}
BoundParams frozen() {
    BoundParams p;
    p.delta_rule = [](std::uint64_t) { return 0.0; };
    return p;
}
}  // namespace

TEST_CASE("theta_sup_scale") {
    const BoundParams p;
    CHECK(theta_sup_scale(1.0, 1000, p) == 1.0);
    CHECK(theta_sup_scale(0.5, 1000, p) == 1.0);   // max(M,1) = 1
    CHECK(theta_sup_scale(2.0, 8, p) == 2.0);      // below-16 convention
    const std::uint64_t n = 1619;  // ~ e^e rounded to a larger prime-ish value
    const double expect = std::pow(2.0, std::log(static_cast<double>(n)) /
                                            std::log(std::log(static_cast<double>(n))));
    CHECK(theta_sup_scale(2.0, n, p) == Catch::Approx(expect));
}

TEST_CASE("variance sandwich") {
    const auto p = frozen();
    SECTION("a = b = 1 collapses to (C1 n, C2 n)") {
        const auto [lo, hi] = variance_sandwich(1.0, 1.0, 100, p);
        CHECK(lo == Catch::Approx(0.5 * 100));
        CHECK(hi == Catch::Approx(100.0));
    }
    SECTION("exact Q(n) lies inside for n in [1e3, 1e6]") {
        for (std::uint64_t n : {1'000ull, 10'000ull, 100'000ull, 1'000'000ull}) {
            const auto [lo, hi] = variance_sandwich(1.0, 1.0, n, p);
            const double q = static_cast<double>(squarefree_count(tables(), n));
            REQUIRE(lo <= q);
            REQUIRE(q <= hi);
        }
    }
    SECTION("plug-in exponent") {
        BoundParams pp = frozen();
        pp.C1 = 1.0;
        const auto [lo, hi] = variance_sandwich(0.5, 1.0, 10'000, pp);
        const double expo = 1.0 - std::log(2.0) / std::log(std::log(10'000.0));
        CHECK(lo == Catch::Approx(std::pow(10'000.0, expo)));
        CHECK(hi == Catch::Approx(10'000.0));
    }
    CHECK_THROWS_AS(variance_sandwich(1.5, 2.0, 100, p), std::invalid_argument);
    CHECK_THROWS_AS(variance_sandwich(1.0, 1.0, 10, p), std::invalid_argument);
}

TEST_CASE("even moment bound reports ratios (no dominance claim)") {
    const auto p = frozen();
    const double bound = even_moment_bound(p, 40, 2, 1.0);
    const double exact = exact_moment_enumeration(tables(), 40, 2).convert_to<double>();
    CHECK(bound > 0.0);
    CHECK(exact == 4040.0);
    CHECK(std::isfinite(bound / exact));
    // M = 1 removes the M_n factor: scaling in C_k only
    BoundParams unit = frozen();
    unit.ck_rule = [](unsigned) { return 1.0; };
    const double b1 = even_moment_bound(unit, 100, 1, 1.0);
    CHECK(b1 == Catch::Approx(std::sqrt(100.0) * std::pow(std::log(100.0), 2.0)));
    const double alt = even_moment_bound_alt(unit, 100, 2, 1.0);
    CHECK(alt == Catch::Approx(100.0 * 100.0 * std::pow(std::log(100.0), 2.0)));
}

TEST_CASE("lq norm bound") {
    const auto p = frozen();
    SECTION("dominates the exact L2 norm with C = 1") {
        for (std::uint64_t n : {100ull, 10'000ull, 1'000'000ull}) {
            const double bound = lq_norm_bound(p, n, 2.0, 1.0);
            const double exact = std::sqrt(static_cast<double>(squarefree_count(tables(), n)));
            REQUIRE(bound >= exact);
        }
    }
    SECTION("doubling q multiplies by sqrt 2") {
        CHECK(lq_norm_bound(p, 1000, 4.0, 1.0) ==
              Catch::Approx(std::sqrt(2.0) * lq_norm_bound(p, 1000, 2.0, 1.0)));
    }
    SECTION("M = 1, delta = 0, n = 8: C sqrt(q) * 4") {
        CHECK(lq_norm_bound(p, 8, 2.0, 1.0) == Catch::Approx(std::sqrt(2.0) * 4.0));
    }
    CHECK_THROWS_AS(lq_norm_bound(p, 100, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("subgaussian tail bound") {
    const auto p = frozen();
    const auto at_zero = subgaussian_tail_bound(p, 1000, 0.0, 1.0);
    CHECK(at_zero.bound == 1.0);
    const auto at_root = subgaussian_tail_bound(p, 1000, std::sqrt(at_zero.u_n), 1.0);
    CHECK(at_root.bound == Catch::Approx(std::exp(-1.0)));
    CHECK(at_zero.u_n == Catch::Approx(std::pow(1000.0, 4.0 / 3.0)));
}

TEST_CASE("empirical tail dominated by the bound at n = 1000") {
    const auto p = frozen();
    const double t0s[3] = {30.0, 60.0, 100.0};
    const auto reps = mc_tail(ModelSpec::rademacher(), tables(), 1000, t0s, {5'000, 31, 2});
    for (const auto& rep : reps) {
        const auto b = subgaussian_tail_bound(p, 1000, rep.t0, 1.0);
        REQUIRE(rep.p_hat <= b.bound);
    }
}

TEST_CASE("badset moment-route bound") {
    const auto p = frozen();
    CHECK(badset_moment_bound(p, 10, 2) == Catch::Approx(16.0 * 1000.0 / 24.0));  // ~666.7 >= 3
    CHECK(badset_moment_bound(p, 10, 2) >= 3.0);
    CHECK(badset_moment_bound(p, 50, 1) > 0.0);  // B_{2,n} = 0 <= anything positive
    SECTION("dominates exact counts for n <= 60 with C = 1, delta = 0") {
        for (std::uint64_t n : {10ull, 30ull, 60ull}) {
            const auto d = badset_counts_kernel(build_exponent_matrix(tables(), n));
            for (unsigned k = 1; 2 * k <= d.set_size; ++k) {
                const double exact = d.badset_count(2 * k).convert_to<double>();
                REQUIRE(exact <= badset_moment_bound(p, n, k));
            }
        }
    }
}

TEST_CASE("badset harper-range bound") {
    const auto p = frozen();
    CHECK_THROWS_AS(badset_harper_bound(p, 100, 1), std::invalid_argument);
    const auto v2 = badset_harper_bound(p, 60, 2);
    CHECK(std::isfinite(v2.value));
    const auto d = badset_counts_kernel(build_exponent_matrix(tables(), 60));
    const double exact = d.badset_count(4).convert_to<double>();
    CHECK(exact > 0.0);
    CHECK(std::isfinite(v2.value / exact));
    SECTION("monotone in n for fixed k") {
        double prev = 0.0;
        for (std::uint64_t n : {20ull, 40ull, 80ull, 160ull}) {
            const auto v = badset_harper_bound(p, n, 2);
            REQUIRE(v.value > prev);
            prev = v.value;
        }
    }
    SECTION("out-of-hypothesis values are flagged, not errors") {
        const auto v = badset_harper_bound(p, 20, 8);
        CHECK_FALSE(v.in_hypothesis);
        CHECK(std::isfinite(v.value));
    }
}

TEST_CASE("hypercontractive bound") {
    const auto& t = tables();
    CHECK(hypercontractive_bound(t, 3, 1.0) == Catch::Approx(std::sqrt(3.0)));
    for (std::uint64_t n : {10ull, 100ull})
        CHECK(hypercontractive_bound(t, n, 1.0) ==
              Catch::Approx(std::sqrt(static_cast<double>(squarefree_count(t, n)))));
    // comparison table entry: q = 3 versus the martingale-route bound at 2q = 6
    const double hyper = hypercontractive_bound(t, 100, 3.0);
    const double lq = lq_norm_bound(frozen(), 100, 6.0, 1.0);
    CHECK(std::isfinite(hyper));
    CHECK(std::isfinite(lq));
    CHECK_THROWS_AS(hypercontractive_bound(t, 100, 0.5), std::invalid_argument);
}

TEST_CASE("charfn tail sum") {
    const auto& t = tables();
    const auto p = frozen();
    const auto m = build_exponent_matrix(t, 60);
    const auto d = badset_counts_macwilliams(m);
    CHECK(charfn_tail_sum(t, d, 60, 0.0, std::sqrt(60.0), 1.0, p) == 0.0);
    const double v = charfn_tail_sum(t, d, 60, 0.5, std::sqrt(60.0), 1.0, p);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    SECTION("capped histogram triggers an explicit error when the range needs it") {
        auto capped = d;
        capped.weight_cap = 4;
        std::map<unsigned, BigInt> trimmed;
        for (const auto& [w, c] : capped.counts)
            if (w <= 4) trimmed[w] = c;
        capped.counts = trimmed;
        CHECK_THROWS_AS(charfn_tail_sum(t, capped, 60, 0.5, std::sqrt(60.0), 1.0, p),
                        std::invalid_argument);
    }
}

TEST_CASE("supnorm integral") {
    const auto i2 = supnorm_integral(2.0);
    CHECK(i2.value > 0.0);
    double prev = i2.value;
    for (double beta : {10.0, 100.0, 1e4, 1e6}) {
        const auto iv = supnorm_integral(beta);
        REQUIRE(iv.value > prev);  // non-decreasing in beta
        REQUIRE(std::isfinite(iv.value));
        prev = iv.value;
    }
    // spot value against an independent quadrature (scipy, fixed reference)
    CHECK(supnorm_integral(100.0).value == Catch::Approx(4.246595).epsilon(1e-4));
    CHECK(supnorm_integral(2.0).value == Catch::Approx(1.133120).epsilon(1e-4));
    CHECK_THROWS_AS(supnorm_integral(1.5), std::invalid_argument);
}

TEST_CASE("martingale supnorm bound") {
    const auto& t = tables();
    BoundParams p = frozen();
    p.C1 = 10.0;
    SECTION("dominates the exact sup norm at n = 30, p = 5 with C1 = 10") {
        const double exact = sup_norm_Mp(ModelSpec::rademacher(), t, 30, 5);
        const auto bound = martingale_supnorm_bound(p, 30, 5, 1.0);
        CHECK(exact <= bound.value);
    }
    SECTION("p = n gives C1 M_n exactly") {
        const auto v = martingale_supnorm_bound(p, 29, 29, 1.0);
        CHECK(v.value == Catch::Approx(10.0));
        CHECK(v.in_hypothesis);
    }
    SECTION("term count equals the smooth-restricted count") {
        for (std::uint32_t prime : {2u, 3u, 5u, 7u, 13u}) {
            const auto ells = martingale_support(t, 1000, prime);
            std::uint64_t direct = 0;
            for (std::uint64_t k = 1; k * prime <= 1000; ++k)
                if (t.is_squarefree(k) && k % prime != 0 &&
                    (k == 1 || t.largest_prime_factor[k] < prime))
                    ++direct;
            REQUIRE(ells.size() == direct);
        }
    }
    CHECK_THROWS_AS(martingale_supnorm_bound(p, 10, 11, 1.0), std::invalid_argument);
}

TEST_CASE("integrand log-derivative has exactly one sign change") {
    for (std::uint64_t n : {3ull, 10ull, 1000ull, 1'000'000ull}) {
        int changes = 0;
        double prev = supnorm_integrand_log_derivative(n, 1e-3);
        CHECK(prev > 0.0);
        for (double a = 1e-3; a <= 50.0; a *= 1.05) {
            const double cur = supnorm_integrand_log_derivative(n, a);
            if ((prev > 0) != (cur > 0)) ++changes;
            prev = cur;
        }
        REQUIRE(changes == 1);
        CHECK(prev < 0.0);
    }
}

TEST_CASE("moment weight maximizes at ln(n)/e") {
    for (std::uint64_t n : {100ull, 10'000ull, 1'000'000ull}) {
        const double xstar = std::log(static_cast<double>(n)) / std::numbers::e;
        CHECK(moment_weight_log_derivative(n, xstar) == Catch::Approx(0.0).margin(1e-9));
        CHECK(moment_weight_log_derivative(n, xstar * 0.9) > 0.0);
        CHECK(moment_weight_log_derivative(n, xstar * 1.1) < 0.0);
    }
}

TEST_CASE("default delta rule decays to zero on a grid") {
    const BoundParams p;  // delta(n) = kappa2 / lnln(n)
    double prev = p.delta(16);
    CHECK(prev > 0.0);
    for (std::uint64_t n = 100; n <= 100'000'000'000ull; n *= 100) {
        const double d = p.delta(n);
        CHECK(d < prev);
        prev = d;
    }
    CHECK(prev < 0.35);
}

TEST_CASE("charfn tail sum vanishes when the k-range holds no counts") {
    const auto& t = tables();
    BoundParams p = frozen();
    p.c1 = 10.0;  // pushes k_lo past the entire feasible range
    const auto d = badset_counts_macwilliams(build_exponent_matrix(t, 60));
    CHECK(charfn_tail_sum(t, d, 60, 0.5, std::sqrt(60.0), 1.0, p) == 0.0);
}

TEST_CASE("bound evaluators are pure") {
    const auto p = frozen();
    CHECK(even_moment_bound(p, 500, 3, 1.5) == even_moment_bound(p, 500, 3, 1.5));
    CHECK(supnorm_integral(10.0).value == supnorm_integral(10.0).value);
    const auto a = subgaussian_tail_bound(p, 777, 2.5, 1.25);
    const auto b = subgaussian_tail_bound(p, 777, 2.5, 1.25);
    CHECK(a.u_n == b.u_n);
    CHECK(a.bound == b.bound);
}
