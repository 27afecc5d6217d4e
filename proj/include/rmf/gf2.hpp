#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rmf/sieve.hpp"

namespace rmf {

// GF(2) exponent matrix of the squarefree integers in [1, n]: one column per
// squarefree l (ascending, starting with l = 1), one row per prime <= n, bit
// set where the prime divides l. A subset of columns XORs to zero exactly
// when the product of the corresponding integers is a perfect square.
struct ExponentMatrix {
    std::uint64_t n = 0;
    std::vector<std::uint64_t> squarefree_list;  // column j <-> squarefree_list[j]
    std::vector<std::uint32_t> primes;           // row i <-> primes[i]
    std::size_t words_per_column = 0;
    std::vector<std::uint64_t> column_words;     // column-major, bit i of column j = row i

    std::size_t rows() const { return primes.size(); }
    std::size_t cols() const { return squarefree_list.size(); }

    std::span<const std::uint64_t> column(std::size_t j) const {
        return {column_words.data() + j * words_per_column, words_per_column};
    }
};

inline ExponentMatrix build_exponent_matrix(const SieveTables& t, std::uint64_t n) {
    t.check_range(n, "build_exponent_matrix");
    ExponentMatrix m;
    m.n = n;
    for (std::uint32_t p : t.primes) {
        if (p > n) break;
        m.primes.push_back(p);
    }
    m.words_per_column = (m.primes.size() + 63) / 64;
    if (m.words_per_column == 0) m.words_per_column = 1;  // n = 1: no prime rows
    for (std::uint64_t ell = 1; ell <= n; ++ell)
        if (t.is_squarefree(ell)) m.squarefree_list.push_back(ell);
    m.column_words.assign(m.cols() * m.words_per_column, 0);
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::uint64_t* col = m.column_words.data() + j * m.words_per_column;
        for_each_prime_factor(t, m.squarefree_list[j], [&](std::uint64_t p) {
            const std::size_t r = static_cast<std::size_t>(
                std::lower_bound(m.primes.begin(), m.primes.end(), p) - m.primes.begin());
            col[r >> 6] ^= std::uint64_t{1} << (r & 63);
        });
    }
    return m;
}

// Kernel basis of the column space: vectors over columns (s bits each) whose
// selected columns XOR to zero. rank + nullity = number of columns.
struct KernelBasis {
    std::size_t rank = 0;
    std::size_t nullity = 0;
    std::size_t num_columns = 0;
    std::size_t words_per_vector = 0;
    std::vector<std::uint64_t> basis_words;  // nullity vectors, packed

    std::span<const std::uint64_t> vector(std::size_t i) const {
        return {basis_words.data() + i * words_per_vector, words_per_vector};
    }
};

namespace detail {
inline int lowest_set_bit(std::span<const std::uint64_t> v) {
    for (std::size_t w = 0; w < v.size(); ++w)
        if (v[w]) return static_cast<int>((w << 6) + std::countr_zero(v[w]));
    return -1;
}

inline void xor_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    for (std::size_t w = 0; w < words; ++w) dst[w] ^= src[w];
}
}  // namespace detail

// Gaussian elimination over GF(2), processing columns left to right and
// tracking the combination that produced each reduced column. Columns that
// reduce to zero yield kernel basis vectors.
inline KernelBasis rank_and_kernel(const ExponentMatrix& m) {
    const std::size_t s = m.cols();
    const std::size_t wc = m.words_per_column;
    const std::size_t wv = (s + 63) / 64;
    KernelBasis out;
    out.num_columns = s;
    out.words_per_vector = wv ? wv : 1;

    std::vector<int> pivot_of_row(m.rows() ? m.rows() : 1, -1);
    std::vector<std::uint64_t> pivot_cols;   // reduced columns, wc words each
    std::vector<std::uint64_t> pivot_combs;  // their combinations, wv words each
    std::vector<std::uint64_t> cur(wc), comb(out.words_per_vector);

    for (std::size_t j = 0; j < s; ++j) {
        std::copy_n(m.column_words.data() + j * wc, wc, cur.data());
        std::fill(comb.begin(), comb.end(), 0);
        comb[j >> 6] = std::uint64_t{1} << (j & 63);
        for (;;) {
            const int r = detail::lowest_set_bit(cur);
            if (r < 0) {
                out.basis_words.insert(out.basis_words.end(), comb.begin(), comb.end());
                ++out.nullity;
                break;
            }
            const int pv = pivot_of_row[static_cast<std::size_t>(r)];
            if (pv < 0) {
                pivot_of_row[static_cast<std::size_t>(r)] = static_cast<int>(out.rank);
                pivot_cols.insert(pivot_cols.end(), cur.begin(), cur.end());
                pivot_combs.insert(pivot_combs.end(), comb.begin(), comb.end());
                ++out.rank;
                break;
            }
            detail::xor_into(cur.data(), pivot_cols.data() + static_cast<std::size_t>(pv) * wc, wc);
            detail::xor_into(comb.data(), pivot_combs.data() + static_cast<std::size_t>(pv) * out.words_per_vector,
                             out.words_per_vector);
        }
    }
    return out;
}

// XOR of the columns selected by an s-bit combination vector; used to verify
// kernel membership.
inline std::vector<std::uint64_t> xor_of_columns(const ExponentMatrix& m,
                                                 std::span<const std::uint64_t> combination) {
    std::vector<std::uint64_t> acc(m.words_per_column, 0);
    for (std::size_t j = 0; j < m.cols(); ++j)
        if ((combination[j >> 6] >> (j & 63)) & 1)
            detail::xor_into(acc.data(), m.column_words.data() + j * m.words_per_column, m.words_per_column);
    return acc;
}

}  // namespace rmf
