#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rmf/bigint.hpp"
#include "rmf/errors.hpp"
#include "rmf/gf2.hpp"
#include "rmf/parallel.hpp"
#include "rmf/sieve.hpp"

namespace rmf {

enum class CountMethod { kernel_enum, macwilliams, brute_force };

inline const char* to_string(CountMethod m) {
    switch (m) {
        case CountMethod::kernel_enum: return "kernel";
        case CountMethod::macwilliams: return "macwilliams";
        case CountMethod::brute_force: return "brute";
    }
    return "?";
}

// Subset-size histogram of the square-product kernel: counts[w] is the exact
// number of w-element subsets of the squarefree integers in [1, n] whose
// exponent vectors XOR to zero. B_{2k,n} = counts[2k]; the only odd-weight
// members come from the l = 1 column (zero vector).
struct WeightDistribution {
    std::uint64_t n = 0;
    std::size_t set_size = 0;  // s = Q(n)
    std::size_t rank = 0;
    std::size_t nullity = 0;
    CountMethod method = CountMethod::kernel_enum;
    unsigned weight_cap = 0;  // 0 = complete histogram
    std::map<unsigned, BigInt> counts;

    BigInt total() const {
        BigInt s = 0;
        for (const auto& [w, c] : counts) s += c;
        return s;
    }

    // B_{2k,n}. Zero weights are simply absent from the map; requesting a
    // weight beyond a truncated histogram is an error.
    BigInt badset_count(unsigned two_k) const {
        if (weight_cap != 0 && two_k > weight_cap)
            throw std::invalid_argument("WeightDistribution: weight " + std::to_string(two_k) +
                                        " beyond computed cap " + std::to_string(weight_cap));
        auto it = counts.find(two_k);
        return it == counts.end() ? BigInt(0) : it->second;
    }
};

namespace detail {

inline WeightDistribution tallies_to_distribution(const ExponentMatrix& m, std::size_t rank,
                                                  std::size_t nullity, CountMethod method,
                                                  const std::vector<std::uint64_t>& tallies,
                                                  unsigned weight_cap) {
    WeightDistribution d;
    d.n = m.n;
    d.set_size = m.cols();
    d.rank = rank;
    d.nullity = nullity;
    d.method = method;
    d.weight_cap = weight_cap;
    for (std::size_t w = 0; w < tallies.size(); ++w) {
        if (tallies[w] == 0) continue;
        if (weight_cap != 0 && w > weight_cap) continue;
        d.counts[static_cast<unsigned>(w)] = tallies[w];
    }
    return d;
}

// Gray-code walk over all 2^k combinations of `vectors` (each `words` wide),
// tallying Hamming weights. Chunked so the walk parallelizes with chunk-order
// determinism: each chunk seeds its state from the Gray code of its start.
inline std::vector<std::uint64_t> gray_weight_tally(const std::vector<std::uint64_t>& vectors,
                                                    std::size_t k, std::size_t words,
                                                    std::size_t weight_range, unsigned threads) {
    const std::uint64_t total = std::uint64_t{1} << k;
    const std::uint64_t chunk = std::min<std::uint64_t>(total, std::uint64_t{1} << 18);
    const std::uint64_t num_chunks = (total + chunk - 1) / chunk;
    std::vector<std::vector<std::uint64_t>> partial(num_chunks);
    for_each_chunk(total, chunk, threads, [&](std::uint64_t ci, std::uint64_t begin, std::uint64_t end) {
        std::vector<std::uint64_t> tally(weight_range + 1, 0);
        std::vector<std::uint64_t> state(words, 0);
        const std::uint64_t g0 = begin ^ (begin >> 1);
        for (std::size_t b = 0; b < k; ++b)
            if ((g0 >> b) & 1)
                for (std::size_t w = 0; w < words; ++w) state[w] ^= vectors[b * words + w];
        auto weigh = [&] {
            std::uint64_t wt = 0;
            for (std::size_t w = 0; w < words; ++w) wt += std::popcount(state[w]);
            ++tally[wt];
        };
        weigh();
        for (std::uint64_t t = begin + 1; t < end; ++t) {
            const unsigned b = static_cast<unsigned>(std::countr_zero(t));
            for (std::size_t w = 0; w < words; ++w) state[w] ^= vectors[b * words + w];
            weigh();
        }
        partial[ci] = std::move(tally);
    });
    std::vector<std::uint64_t> tally(weight_range + 1, 0);
    for (const auto& p : partial)
        for (std::size_t w = 0; w < p.size(); ++w) tally[w] += p[w];
    return tally;
}

}  // namespace detail

// Exact histogram by walking all 2^nullity kernel vectors.
inline WeightDistribution badset_counts_kernel(const ExponentMatrix& m, unsigned weight_cap = 0,
                                               unsigned nullity_budget = 28, unsigned threads = 1) {
    const KernelBasis kb = rank_and_kernel(m);
    if (kb.nullity > nullity_budget)
        throw BudgetExceeded("badset_counts_kernel: nullity " + std::to_string(kb.nullity) +
                             " exceeds budget " + std::to_string(nullity_budget) +
                             "; use the MacWilliams route (rank " + std::to_string(kb.rank) + ")");
    const auto tallies = detail::gray_weight_tally(kb.basis_words, kb.nullity, kb.words_per_vector,
                                                   m.cols(), threads);
    return detail::tallies_to_distribution(m, kb.rank, kb.nullity, CountMethod::kernel_enum, tallies,
                                           weight_cap);
}

// Krawtchouk column K_j(w; s) for j = 0..s at fixed w, by the integer
// three-term recurrence (j+1) K_{j+1} = (s-2w) K_j - (s-j+1) K_{j-1}.
inline std::vector<BigInt> krawtchouk_column(std::size_t s, std::size_t w) {
    std::vector<BigInt> k(s + 1);
    k[0] = 1;
    if (s >= 1) k[1] = BigInt(static_cast<std::int64_t>(s) - 2 * static_cast<std::int64_t>(w));
    for (std::size_t j = 1; j + 1 <= s; ++j) {
        BigInt num = k[1] * k[j] - BigInt(static_cast<std::int64_t>(s) - static_cast<std::int64_t>(j) + 1) * k[j - 1];
        BigInt q, r;
        boost::multiprecision::divide_qr(num, BigInt(static_cast<std::int64_t>(j) + 1), q, r);
        if (r != 0) throw InternalFault("krawtchouk_column: non-integral recurrence step");
        k[j + 1] = q;
    }
    return k;
}

// Exact histogram via the dual route: enumerate the 2^rank row-space vectors,
// then apply the MacWilliams transform
//     counts[j] = 2^{-rank} * sum_w dual_counts[w] * K_j(w; s)
// in exact integers. Every division must be exact; a remainder means a bug.
inline WeightDistribution badset_counts_macwilliams(const ExponentMatrix& m, unsigned rank_budget = 26,
                                                    unsigned threads = 1) {
    const std::size_t s = m.cols();
    const std::size_t wv = (s + 63) / 64 ? (s + 63) / 64 : 1;
    // row basis of the matrix as s-bit vectors
    std::vector<std::uint64_t> rows(m.rows() * wv, 0);
    for (std::size_t j = 0; j < s; ++j) {
        const std::uint64_t* col = m.column_words.data() + j * m.words_per_column;
        for (std::size_t r = 0; r < m.rows(); ++r)
            if ((col[r >> 6] >> (r & 63)) & 1) rows[r * wv + (j >> 6)] |= std::uint64_t{1} << (j & 63);
    }
    std::vector<std::uint64_t> basis;
    std::vector<std::vector<std::uint64_t>> pivots;  // reduced rows keyed by lowest bit
    std::vector<int> pivot_at(s ? s : 1, -1);
    std::vector<std::uint64_t> cur(wv);
    std::size_t rank = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        std::copy_n(rows.data() + r * wv, wv, cur.data());
        for (;;) {
            const int low = detail::lowest_set_bit(std::span<const std::uint64_t>(cur.data(), wv));
            if (low < 0) break;
            if (pivot_at[static_cast<std::size_t>(low)] < 0) {
                pivot_at[static_cast<std::size_t>(low)] = static_cast<int>(pivots.size());
                pivots.emplace_back(cur.begin(), cur.end());
                basis.insert(basis.end(), rows.data() + r * wv, rows.data() + (r + 1) * wv);
                ++rank;
                break;
            }
            const auto& pv = pivots[static_cast<std::size_t>(pivot_at[static_cast<std::size_t>(low)])];
            detail::xor_into(cur.data(), pv.data(), wv);
        }
    }
    if (rank > rank_budget)
        throw BudgetExceeded("badset_counts_macwilliams: rank " + std::to_string(rank) +
                             " exceeds budget " + std::to_string(rank_budget));
    const auto dual_tally = detail::gray_weight_tally(basis, rank, wv, s, threads);
    const BigInt scale = BigInt(1) << rank;
    std::map<unsigned, BigInt> counts;
    std::vector<std::vector<BigInt>> kraw;  // per dual weight with nonzero tally
    std::vector<std::size_t> dual_weights;
    for (std::size_t w = 0; w < dual_tally.size(); ++w)
        if (dual_tally[w]) {
            dual_weights.push_back(w);
            kraw.push_back(krawtchouk_column(s, w));
        }
    WeightDistribution d;
    d.n = m.n;
    d.set_size = s;
    d.rank = rank;
    d.nullity = s - rank;
    d.method = CountMethod::macwilliams;
    d.weight_cap = 0;
    for (std::size_t j = 0; j <= s; ++j) {
        BigInt sum = 0;
        for (std::size_t i = 0; i < dual_weights.size(); ++i)
            sum += BigInt(dual_tally[dual_weights[i]]) * kraw[i][j];
        if (sum == 0) continue;
        BigInt q, r;
        boost::multiprecision::divide_qr(sum, scale, q, r);
        if (r != 0 || q < 0)
            throw InternalFault("badset_counts_macwilliams: transform produced a non-integral count");
        if (q != 0) d.counts[static_cast<unsigned>(j)] = q;
    }
    return d;
}

// Oracle: enumerate all 2^{Q(n)} subsets directly and test the square-product
// condition by XOR of exponent vectors. Only viable for Q(n) <= 20.
inline WeightDistribution brute_force_badsets(const SieveTables& t, std::uint64_t n,
                                              unsigned max_size = 0, unsigned subset_budget = 20) {
    const ExponentMatrix m = build_exponent_matrix(t, n);
    const std::size_t s = m.cols();
    if (s > subset_budget)
        throw BudgetExceeded("brute_force_badsets: Q(n) = " + std::to_string(s) + " exceeds budget " +
                             std::to_string(subset_budget));
    if (m.rows() > 64) throw BudgetExceeded("brute_force_badsets: more than 64 prime rows");
    std::vector<std::uint64_t> masks(s, 0);
    for (std::size_t j = 0; j < s; ++j) {
        const auto col = m.column(j);
        masks[j] = col[0];
    }
    std::vector<std::uint64_t> tally(s + 1, 0);
    std::uint64_t state = 0;
    tally[0] = 1;  // empty subset
    const std::uint64_t total = std::uint64_t{1} << s;
    for (std::uint64_t i = 1; i < total; ++i) {
        state ^= masks[std::countr_zero(i)];
        if (state == 0) ++tally[std::popcount(i ^ (i >> 1))];
    }
    const KernelBasis kb = rank_and_kernel(m);
    return detail::tallies_to_distribution(m, kb.rank, kb.nullity, CountMethod::brute_force, tally,
                                           max_size);
}

// A "bad set": distinct squarefree integers, even size >= 2, product a
// perfect square. Returns false (not an error) when a member fails the
// squarefree or parity test.
inline bool is_bad_set(const SieveTables& t, std::span<const std::uint64_t> a) {
    if (a.size() < 2 || a.size() % 2 != 0) return false;
    std::map<std::uint64_t, int> parity;
    for (std::size_t i = 0; i < a.size(); ++i) {
        t.check_range(a[i], "is_bad_set");
        if (a[i] < 1) throw std::invalid_argument("is_bad_set: members must be >= 1");
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i] == a[j]) throw std::invalid_argument("is_bad_set: members must be distinct");
        if (!t.is_squarefree(a[i])) return false;
        for_each_prime_factor(t, a[i], [&](std::uint64_t p) { parity[p] ^= 1; });
    }
    for (const auto& [p, odd] : parity)
        if (odd) return false;
    return true;
}

struct LowerBoundScan {
    unsigned argmax_k = 0;
    double max_ratio = 0.0;          // max over k of B_{2k,n} (2k)! / n^k
    bool any_at_least_one = false;   // exact big-integer comparison, no rounding
};

// Scans k in [k_lo, k_hi] for the largest B_{2k,n} (2k)! / n^k. The compare
// against 1 is done on cross-multiplied big integers; only the reported
// ratio is rounded to double.
inline LowerBoundScan scan_lower_bound(const WeightDistribution& d, std::uint64_t n, unsigned k_lo,
                                       unsigned k_hi) {
    if (k_lo < 1 || k_hi < k_lo) throw std::invalid_argument("scan_lower_bound: need 1 <= k_lo <= k_hi");
    LowerBoundScan out;
    BigInt best_num = 0, best_den = 1;
    for (unsigned k = k_lo; k <= k_hi; ++k) {
        const BigInt num = d.badset_count(2 * k) * big_factorial(2 * k);
        const BigInt den = big_pow(BigInt(n), k);
        if (num >= den) out.any_at_least_one = true;
        if (out.argmax_k == 0 || num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            out.argmax_k = k;
        }
    }
    out.max_ratio = big_ratio(best_num, best_den);
    return out;
}

inline LowerBoundScan scan_lower_bound(const SieveTables& t, std::uint64_t n, unsigned k_lo,
                                       unsigned k_hi, unsigned threads = 1) {
    const ExponentMatrix m = build_exponent_matrix(t, n);
    const KernelBasis kb = rank_and_kernel(m);
    WeightDistribution d = kb.nullity <= 28 ? badset_counts_kernel(m, 0, 28, threads)
                                            : badset_counts_macwilliams(m, 26, threads);
    return scan_lower_bound(d, n, k_lo, k_hi);
}

}  // namespace rmf
