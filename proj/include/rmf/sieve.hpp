#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmf {

// Immutable factorization tables for [1, n_max], built once with a linear
// (smallest-prime-factor) sieve. Everything downstream — squarefree flags,
// omega, largest prime factors, smooth counts — is read off these arrays.
// Safe to share across threads after construction.
struct SieveTables {
    std::uint64_t n_max = 0;
    std::vector<std::uint32_t> smallest_prime_factor;  // index 0,1 unused (0)
    std::vector<std::uint32_t> largest_prime_factor;   // index 0,1 unused (0)
    std::vector<std::uint8_t> omega;                   // omega[1] = 0
    std::vector<std::uint64_t> squarefree_bits;        // bit l set iff l squarefree
    std::vector<std::uint32_t> primes;                 // ascending, all primes <= n_max

    bool is_squarefree(std::uint64_t ell) const {
        return ell >= 1 && ell <= n_max && ((squarefree_bits[ell >> 6] >> (ell & 63)) & 1) != 0;
    }

    // Moebius function: +/-1 on squarefree integers by parity of omega, else 0.
    int moebius(std::uint64_t ell) const {
        if (!is_squarefree(ell)) return 0;
        return (omega[ell] & 1) ? -1 : 1;
    }

    // Index of p in primes; throws if p is not a prime <= n_max.
    std::size_t prime_index(std::uint64_t p) const {
        auto it = std::lower_bound(primes.begin(), primes.end(), p);
        if (it == primes.end() || *it != p)
            throw std::invalid_argument("prime_index: " + std::to_string(p) + " is not a tabulated prime");
        return static_cast<std::size_t>(it - primes.begin());
    }

    std::size_t prime_count_upto(std::uint64_t n) const {
        return static_cast<std::size_t>(std::upper_bound(primes.begin(), primes.end(), n) - primes.begin());
    }

    void check_range(std::uint64_t n, const char* who) const {
        if (n > n_max) throw std::out_of_range(std::string(who) + ": n exceeds table n_max");
    }
};

inline SieveTables build_tables(std::uint64_t n_max) {
    if (n_max < 2) throw std::invalid_argument("build_tables: n_max must be >= 2");
    SieveTables t;
    t.n_max = n_max;
    t.smallest_prime_factor.assign(n_max + 1, 0);
    auto& spf = t.smallest_prime_factor;
    for (std::uint64_t i = 2; i <= n_max; ++i) {
        if (spf[i] == 0) {
            spf[i] = static_cast<std::uint32_t>(i);
            t.primes.push_back(static_cast<std::uint32_t>(i));
        }
        for (std::uint32_t p : t.primes) {
            if (p > spf[i] || i * p > n_max) break;
            spf[i * p] = p;
        }
    }
    t.largest_prime_factor.assign(n_max + 1, 0);
    t.omega.assign(n_max + 1, 0);
    t.squarefree_bits.assign((n_max >> 6) + 1, 0);
    t.squarefree_bits[0] |= 2;  // l = 1
    for (std::uint64_t l = 2; l <= n_max; ++l) {
        const std::uint32_t p = spf[l];
        const std::uint64_t m = l / p;
        if (m == 1) {
            t.omega[l] = 1;
            t.largest_prime_factor[l] = p;
            t.squarefree_bits[l >> 6] |= std::uint64_t{1} << (l & 63);
        } else {
            const bool repeated = spf[m] == p;
            t.omega[l] = static_cast<std::uint8_t>(t.omega[m] + (repeated ? 0 : 1));
            t.largest_prime_factor[l] = t.largest_prime_factor[m];
            if (!repeated && ((t.squarefree_bits[m >> 6] >> (m & 63)) & 1))
                t.squarefree_bits[l >> 6] |= std::uint64_t{1} << (l & 63);
        }
    }
    return t;
}

// Walks the distinct prime factors of ell (ascending) via the spf chain.
template <class Fn>
void for_each_prime_factor(const SieveTables& t, std::uint64_t ell, Fn&& fn) {
    while (ell > 1) {
        const std::uint64_t p = t.smallest_prime_factor[ell];
        fn(p);
        while (ell % p == 0) ell /= p;
    }
}

// Q(n): number of squarefree integers in [1, n].
inline std::uint64_t squarefree_count(const SieveTables& t, std::uint64_t n) {
    t.check_range(n, "squarefree_count");
    std::uint64_t count = 0;
    const std::uint64_t full_words = (n + 1) >> 6;
    for (std::uint64_t w = 0; w < full_words; ++w) count += std::popcount(t.squarefree_bits[w]);
    const unsigned rem = static_cast<unsigned>((n + 1) & 63);
    if (rem) count += std::popcount(t.squarefree_bits[full_words] & ((std::uint64_t{1} << rem) - 1));
    return count;
}

// psi(x, y): number of y-smooth integers in [1, x]; 1 is y-smooth.
inline std::uint64_t smooth_count(const SieveTables& t, std::uint64_t x, std::uint64_t y) {
    t.check_range(x, "smooth_count");
    if (y < 2) throw std::invalid_argument("smooth_count: y must be >= 2");
    std::uint64_t count = 0;
    for (std::uint64_t m = 1; m <= x; ++m)
        if (t.largest_prime_factor[m] <= y) ++count;
    return count;
}

// s_n: number of primes in (n/2, n]. Each such prime occurs in exactly one
// squarefree integer <= n, namely itself.
inline std::uint64_t tail_prime_count(const SieveTables& t, std::uint64_t n) {
    t.check_range(n, "tail_prime_count");
    const auto lo = std::upper_bound(t.primes.begin(), t.primes.end(), n / 2);
    const auto hi = std::upper_bound(t.primes.begin(), t.primes.end(), n);
    return static_cast<std::uint64_t>(hi - lo);
}

// ---------------------------------------------------------------------------
// Binary cache. Layout: 8-byte magic, n_max, then an offset table pointing at
// the five sections (primes, spf, lpf, omega, squarefree bits). All integers
// little-endian, offsets from the start of the file.
// ---------------------------------------------------------------------------

namespace detail {
constexpr char kSieveMagic[8] = {'R', 'M', 'F', 'S', 'I', 'V', '0', '1'};

template <class T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
    const std::uint64_t count = v.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
}

template <class T>
void read_vec(std::ifstream& in, std::vector<T>& v) {
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T)));
}
}  // namespace detail

inline void save_tables(const SieveTables& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_tables: cannot open " + path);
    out.write(detail::kSieveMagic, 8);
    out.write(reinterpret_cast<const char*>(&t.n_max), sizeof(t.n_max));
    const std::streampos offsets_pos = out.tellp();
    std::uint64_t offsets[5] = {0, 0, 0, 0, 0};
    out.write(reinterpret_cast<const char*>(offsets), sizeof(offsets));
    offsets[0] = static_cast<std::uint64_t>(out.tellp());
    detail::write_vec(out, t.primes);
    offsets[1] = static_cast<std::uint64_t>(out.tellp());
    detail::write_vec(out, t.smallest_prime_factor);
    offsets[2] = static_cast<std::uint64_t>(out.tellp());
    detail::write_vec(out, t.largest_prime_factor);
    offsets[3] = static_cast<std::uint64_t>(out.tellp());
    detail::write_vec(out, t.omega);
    offsets[4] = static_cast<std::uint64_t>(out.tellp());
    detail::write_vec(out, t.squarefree_bits);
    out.seekp(offsets_pos);
    out.write(reinterpret_cast<const char*>(offsets), sizeof(offsets));
    if (!out) throw std::runtime_error("save_tables: write failed for " + path);
}

inline SieveTables load_tables(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_tables: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::kSieveMagic, 8) != 0)
        throw std::runtime_error("load_tables: bad magic in " + path);
    SieveTables t;
    in.read(reinterpret_cast<char*>(&t.n_max), sizeof(t.n_max));
    std::uint64_t offsets[5];
    in.read(reinterpret_cast<char*>(offsets), sizeof(offsets));
    in.seekg(static_cast<std::streamoff>(offsets[0]));
    detail::read_vec(in, t.primes);
    in.seekg(static_cast<std::streamoff>(offsets[1]));
    detail::read_vec(in, t.smallest_prime_factor);
    in.seekg(static_cast<std::streamoff>(offsets[2]));
    detail::read_vec(in, t.largest_prime_factor);
    in.seekg(static_cast<std::streamoff>(offsets[3]));
    detail::read_vec(in, t.omega);
    in.seekg(static_cast<std::streamoff>(offsets[4]));
    detail::read_vec(in, t.squarefree_bits);
    if (!in) throw std::runtime_error("load_tables: truncated file " + path);
    if (t.n_max < 2 || t.primes.empty() || t.smallest_prime_factor.size() != t.n_max + 1)
        throw std::runtime_error("load_tables: inconsistent table in " + path);
    return t;
}

}  // namespace rmf
