#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmf/bigint.hpp"
#include "rmf/errors.hpp"
#include "rmf/model.hpp"
#include "rmf/parallel.hpp"
#include "rmf/sieve.hpp"
#include "rmf/squaresets.hpp"

namespace rmf {

// ---------------------------------------------------------------------------
// Exact Rademacher sign-space enumeration. All 2^pi(n) sign assignments are
// visited in Gray-code order: one X_p flips per step, and S_n is updated by
// -2 * (current contribution of the squarefree multiples of p). The Gray bit
// that flips most often is mapped to the prime with the fewest multiples, so
// the amortized work per step is O(1) terms.
// ---------------------------------------------------------------------------

namespace detail {

// Precomputed walk order for the sign space of primes <= n.
struct SignSpacePlan {
    std::size_t num_primes = 0;
    std::vector<std::uint32_t> squarefree;            // squarefree l <= n
    std::vector<std::uint32_t> prime_bits;            // Gray-bit mask of primes dividing l
    std::vector<std::vector<std::uint32_t>> flips;    // per Gray bit: positions in `squarefree`

    static SignSpacePlan build(const SieveTables& t, std::uint64_t n, unsigned prime_budget) {
        t.check_range(n, "enumerate_sign_space");
        SignSpacePlan plan;
        plan.num_primes = t.prime_count_upto(n);
        if (plan.num_primes > std::min(prime_budget, 32u))  // 32: Gray-bit masks are u32
            throw BudgetExceeded("enumerate_sign_space: pi(n) = " + std::to_string(plan.num_primes) +
                                 " exceeds the sign-space budget " + std::to_string(prime_budget));
        // Gray bit b flips 2^{m-1-b} times: give low bits the primes with the
        // fewest squarefree multiples.
        std::vector<std::uint64_t> mult_count(plan.num_primes, 0);
        for (std::uint64_t ell = 2; ell <= n; ++ell) {
            if (!t.is_squarefree(ell)) continue;
            for_each_prime_factor(t, ell, [&](std::uint64_t p) { ++mult_count[t.prime_index(p)]; });
        }
        std::vector<std::size_t> order(plan.num_primes);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return mult_count[a] < mult_count[b]; });
        std::vector<std::uint32_t> bit_of_prime(plan.num_primes);
        for (std::size_t b = 0; b < order.size(); ++b)
            bit_of_prime[order[b]] = static_cast<std::uint32_t>(b);
        plan.flips.resize(plan.num_primes);
        for (std::uint64_t ell = 1; ell <= n; ++ell) {
            if (!t.is_squarefree(ell)) continue;
            const std::uint32_t pos = static_cast<std::uint32_t>(plan.squarefree.size());
            plan.squarefree.push_back(static_cast<std::uint32_t>(ell));
            std::uint32_t mask = 0;
            for_each_prime_factor(t, ell, [&](std::uint64_t p) {
                const std::uint32_t b = bit_of_prime[t.prime_index(p)];
                mask |= std::uint32_t{1} << b;
                plan.flips[b].push_back(pos);
            });
            plan.prime_bits.push_back(mask);
        }
        return plan;
    }

    // theta values and S for the assignment encoded by a Gray code word.
    std::int64_t init_state(std::uint64_t gray, std::vector<std::int8_t>& th) const {
        th.assign(squarefree.size(), 1);
        std::int64_t s = 0;
        for (std::size_t i = 0; i < squarefree.size(); ++i) {
            if (std::popcount(gray & prime_bits[i]) & 1) th[i] = -1;
            s += th[i];
        }
        return s;
    }
};

}  // namespace detail

template <class Visit>
void enumerate_sign_space(const SieveTables& t, std::uint64_t n, Visit&& visit,
                          unsigned prime_budget = 25) {
    const auto plan = detail::SignSpacePlan::build(t, n, prime_budget);
    std::vector<std::int8_t> th;
    std::int64_t s = plan.init_state(0, th);
    visit(s);
    if (plan.num_primes == 0) return;
    const std::uint64_t total = std::uint64_t{1} << plan.num_primes;
    for (std::uint64_t i = 1; i < total; ++i) {
        for (std::uint32_t pos : plan.flips[static_cast<std::size_t>(std::countr_zero(i))]) {
            s -= 2 * th[pos];
            th[pos] = static_cast<std::int8_t>(-th[pos]);
        }
        visit(s);
    }
}

namespace detail {
inline BigInt int128_to_big(__int128 v) {
    return BigInt(static_cast<std::int64_t>(v >> 64)) * (BigInt(1) << 64) +
           BigInt(static_cast<std::uint64_t>(v));
}
}  // namespace detail

// sum over all sign vectors of S_n^order, exactly (signed). Partitioned by
// high-order Gray-code prefix: each chunk re-derives its starting theta state
// from the Gray word of its first index, walks its range incrementally, and
// the exact per-chunk integers are summed afterwards, so the result is
// independent of the thread count.
inline BigInt sign_space_power_sum(const SieveTables& t, std::uint64_t n, unsigned order,
                                   unsigned prime_budget = 25, unsigned threads = 1) {
    if (static_cast<double>(order) * std::log2(static_cast<double>(n) + 1.0) > 100.0)
        throw BudgetExceeded("sign_space_power_sum: order too large for 128-bit accumulation");
    const auto plan = detail::SignSpacePlan::build(t, n, prime_budget);
    const std::uint64_t total_states = std::uint64_t{1} << plan.num_primes;
    const std::uint64_t chunk_size = std::min<std::uint64_t>(total_states, std::uint64_t{1} << 20);
    const std::uint64_t num_chunks = (total_states + chunk_size - 1) / chunk_size;
    std::vector<BigInt> partial(num_chunks);
    for_each_chunk(total_states, chunk_size, threads,
                   [&](std::uint64_t ci, std::uint64_t begin, std::uint64_t end) {
                       std::vector<std::int8_t> th;
                       std::int64_t s = plan.init_state(begin ^ (begin >> 1), th);
                       __int128 acc = 0;
                       auto add = [&](std::int64_t v) {
                           __int128 pw = 1;
                           for (unsigned i = 0; i < order; ++i) pw *= v;
                           acc += pw;
                       };
                       add(s);
                       for (std::uint64_t i = begin + 1; i < end; ++i) {
                           for (std::uint32_t pos :
                                plan.flips[static_cast<std::size_t>(std::countr_zero(i))]) {
                               s -= 2 * th[pos];
                               th[pos] = static_cast<std::int8_t>(-th[pos]);
                           }
                           add(s);
                       }
                       partial[ci] = detail::int128_to_big(acc);
                   });
    BigInt total = 0;
    for (const BigInt& p : partial) total += p;
    return total;
}

// E[S_n^{2r}] for the Rademacher model, exact. The normalized average is a
// nonnegative integer (it counts 2r-tuples of squarefree integers with square
// product), so divisibility by 2^pi(n) is asserted.
inline BigInt exact_moment_enumeration(const SieveTables& t, std::uint64_t n, unsigned r,
                                       unsigned prime_budget = 25, unsigned threads = 1) {
    if (r == 0) return 1;
    const BigInt sum = sign_space_power_sum(t, n, 2 * r, prime_budget, threads);
    const std::size_t m = t.prime_count_upto(n);
    BigInt q, rem;
    boost::multiprecision::divide_qr(sum, BigInt(1) << m, q, rem);
    if (rem != 0 || q < 0)
        throw InternalFault("exact_moment_enumeration: moment is not a nonnegative integer");
    return q;
}

// E[S_n^order] as an exact rational, any order (odd orders included).
inline Rational exact_moment_of_order(const SieveTables& t, std::uint64_t n, unsigned order,
                                      unsigned prime_budget = 25) {
    const BigInt sum = sign_space_power_sum(t, n, order, prime_budget);
    return Rational(sum, BigInt(1) << t.prime_count_upto(n));
}

// Independent oracle: counts order-tuples (l_1, ..., l_order) of squarefree
// integers <= n whose product is a perfect square, by direct odometer loop
// over XOR masks. Deliberately naive; must equal the sign-space route.
inline BigInt square_product_tuple_count(const SieveTables& t, std::uint64_t n, unsigned order,
                                         std::uint64_t work_budget = 200'000'000) {
    t.check_range(n, "square_product_tuple_count");
    if (t.prime_count_upto(n) > 64)
        throw BudgetExceeded("square_product_tuple_count: more than 64 prime rows");
    std::vector<std::uint64_t> masks;
    for (std::uint64_t ell = 1; ell <= n; ++ell) {
        if (!t.is_squarefree(ell)) continue;
        std::uint64_t mask = 0;
        for_each_prime_factor(t, ell, [&](std::uint64_t p) {
            mask ^= std::uint64_t{1} << t.prime_index(p);
        });
        masks.push_back(mask);
    }
    const std::size_t s = masks.size();
    double work = 1;
    for (unsigned i = 0; i < order; ++i) work *= static_cast<double>(s);
    if (work > static_cast<double>(work_budget))
        throw BudgetExceeded("square_product_tuple_count: s^order exceeds work budget");
    if (order == 0) return 1;
    std::vector<std::size_t> odo(order, 0);
    std::vector<std::uint64_t> prefix(order + 1, 0);  // prefix[i] = xor of first i choices
    BigInt count = 0;
    for (;;) {
        for (std::size_t i = 0; i < order; ++i) prefix[i + 1] = prefix[i] ^ masks[odo[i]];
        if (prefix[order] == 0) ++count;
        std::size_t pos = 0;
        while (pos < order && ++odo[pos] == s) odo[pos++] = 0;
        if (pos == order) break;
    }
    return count;
}

inline BigInt tuple_count_oracle(const SieveTables& t, std::uint64_t n, unsigned r) {
    if (n > 8 || r > 3)
        throw BudgetExceeded("tuple_count_oracle: oracle scale is n <= 8, r <= 3");
    return square_product_tuple_count(t, n, 2 * r);
}

// ||S_n||_2^2 from orthogonality: sum over squarefree l <= n of the product
// of E[X_p^2] over p | l. Exact rational; equals Q(n) for Rademacher.
inline Rational second_moment_formula(const ModelSpec& spec, const SieveTables& t, std::uint64_t n) {
    t.check_range(n, "second_moment_formula");
    std::vector<Rational> prime_sq;  // E[X_p^2] per prime index, lazily sized
    const std::size_t m = t.prime_count_upto(n);
    prime_sq.reserve(m);
    for (std::size_t i = 0; i < m; ++i) prime_sq.push_back(spec.second_moment(t.primes[i]));
    Rational total = 0;
    for (std::uint64_t ell = 1; ell <= n; ++ell) {
        if (!t.is_squarefree(ell)) continue;
        Rational prod = 1;
        for_each_prime_factor(t, ell, [&](std::uint64_t p) { prod *= prime_sq[t.prime_index(p)]; });
        total += prod;
    }
    return total;
}

struct CharFnValue {
    double cos_mean = 1.0;
    double sin_mean = 0.0;
};

// Exact E[cos(t S_n)] and E[sin(t S_n)] by sign-space enumeration. Note the
// deterministic theta_1 = 1 term shifts the ensemble, so the sine mean is
// generally nonzero at finite n (e.g. (sin 3t + sin t)/4 at n = 3).
inline CharFnValue exact_charfn(const SieveTables& t, std::uint64_t n, double t_val,
                                unsigned prime_budget = 25) {
    double cs = 0.0, cc = 0.0, ss = 0.0, sc = 0.0;
    std::uint64_t count = 0;
    enumerate_sign_space(
        t, n,
        [&](std::int64_t s) {
            const double a = t_val * static_cast<double>(s);
            double y = std::cos(a) - cc;
            double tt = cs + y;
            cc = (tt - cs) - y;
            cs = tt;
            y = std::sin(a) - sc;
            tt = ss + y;
            sc = (tt - ss) - y;
            ss = tt;
            ++count;
        },
        prime_budget);
    return {cs / static_cast<double>(count), ss / static_cast<double>(count)};
}

// The same two quantities reconstructed from the kernel weight histogram,
// for the Rademacher model. Expanding cos/sin of the sum term by term, a
// subset A of squarefree integers contributes E[prod_{l in A} theta_l],
// which is 1 exactly when A's exponent vectors XOR to zero (a kernel member)
// and 0 otherwise. With s = Q(n) and K_w the kernel count at weight w:
//     E cos(t S_n) = sum_{even w} (-1)^{w/2}     K_w sin^w(t) cos^{s-w}(t)
//     E sin(t S_n) = sum_{odd  w} (-1)^{(w-1)/2} K_w sin^w(t) cos^{s-w}(t)
// Entirely independent of the sign-space enumeration route.
inline CharFnValue charfn_via_kernel_counts(const WeightDistribution& dist, double t_val) {
    if (dist.weight_cap != 0)
        throw std::invalid_argument("charfn_via_kernel_counts: need a complete histogram");
    const double sn = std::sin(t_val);
    const double cs = std::cos(t_val);
    double cos_sum = 0.0, sin_sum = 0.0;
    for (const auto& [w, count] : dist.counts) {
        const double term = count.convert_to<double>() * std::pow(sn, static_cast<double>(w)) *
                            std::pow(cs, static_cast<double>(dist.set_size - w));
        if (w % 2 == 0)
            cos_sum += ((w / 2) % 2 ? -1.0 : 1.0) * term;
        else
            sin_sum += (((w - 1) / 2) % 2 ? -1.0 : 1.0) * term;
    }
    return {cos_sum, sin_sum};
}

// Exact E[exp(lambda S_n)], accumulated in shifted (log-sum-exp) form so the
// intermediate sums cannot overflow: terms are exp(lambda (S - n)) <= 1 for
// lambda >= 0, and the shift is undone at the end.
inline double exact_mgf(const SieveTables& t, std::uint64_t n, double lambda,
                        unsigned prime_budget = 25) {
    const double shift = std::abs(lambda) * static_cast<double>(n);
    double acc = 0.0, comp = 0.0;
    std::uint64_t count = 0;
    enumerate_sign_space(
        t, n,
        [&](std::int64_t s) {
            const double y = std::exp(lambda * static_cast<double>(s) - shift) - comp;
            const double tt = acc + y;
            comp = (tt - acc) - y;
            acc = tt;
            ++count;
        },
        prime_budget);
    return std::exp(shift + std::log(acc / static_cast<double>(count)));
}

// Exact P(S_n >= t0) over the sign space.
inline Rational exact_tail(const SieveTables& t, std::uint64_t n, double t0,
                           unsigned prime_budget = 25) {
    std::uint64_t hits = 0, count = 0;
    enumerate_sign_space(
        t, n,
        [&](std::int64_t s) {
            if (static_cast<double>(s) >= t0) ++hits;
            ++count;
        },
        prime_budget);
    return Rational(hits, count);
}

}  // namespace rmf
