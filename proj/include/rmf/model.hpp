#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rmf/bigint.hpp"
#include "rmf/errors.hpp"
#include "rmf/rng.hpp"
#include "rmf/sieve.hpp"

namespace rmf {

enum class Family { rademacher, symmetric_finite, mobius_deterministic };

// One point of a finite symmetric distribution; values and probabilities are
// exact rationals so conditional-mean checks can be done without rounding.
struct SupportAtom {
    Rational value;
    Rational prob;
};

// Distribution family for the independent variables X_p. Symmetric supports
// must come in (v, q) / (-v, q) pairs with probabilities summing to 1 and no
// value equal to zero. `mobius_deterministic` is the degenerate pseudo-model
// X_p = -1 used for Mertens cross-checks; it skips the symmetry requirement.
struct ModelSpec {
    Family family = Family::rademacher;
    std::vector<SupportAtom> support;                            // symmetric_finite only
    std::map<std::uint64_t, std::vector<SupportAtom>> per_prime; // optional overrides

    static ModelSpec rademacher() { return ModelSpec{}; }

    static ModelSpec mobius_deterministic() {
        ModelSpec s;
        s.family = Family::mobius_deterministic;
        return s;
    }

    static ModelSpec symmetric_finite(std::vector<SupportAtom> atoms) {
        ModelSpec s;
        s.family = Family::symmetric_finite;
        s.support = std::move(atoms);
        s.validate();
        return s;
    }

    void validate() const {
        if (family != Family::symmetric_finite) return;
        validate_support(support);
        for (const auto& [p, sup] : per_prime) {
            (void)p;
            validate_support(sup);
        }
    }

    // The support used for primes without a per-prime override. It always
    // applies to cofinitely many primes, so M and c0 must scan it.
    const std::vector<SupportAtom>& base_support() const {
        static const std::vector<SupportAtom> rademacher_support{
            {Rational(1), Rational(1, 2)}, {Rational(-1), Rational(1, 2)}};
        static const std::vector<SupportAtom> mobius_support{{Rational(-1), Rational(1)}};
        if (family == Family::mobius_deterministic) return mobius_support;
        if (family == Family::rademacher) return rademacher_support;
        return support;
    }

    const std::vector<SupportAtom>& support_for(std::uint64_t p) const {
        if (family == Family::symmetric_finite) {
            auto it = per_prime.find(p);
            if (it != per_prime.end()) return it->second;
        }
        return base_support();
    }

    // M = sup_p max |value|; c0 = inf_p min |value|. Both finite/positive by
    // construction for valid specs.
    double sup_abs_value() const { return scan_abs(true); }
    double inf_abs_value() const { return scan_abs(false); }

    Rational second_moment(std::uint64_t p) const {
        Rational s = 0;
        for (const auto& a : support_for(p)) s += a.prob * a.value * a.value;
        return s;
    }

    // Realized value of X_p for the given prime index. Pure function of
    // (seed, path_id, prime_index): counter-based, no sequential state.
    double draw(std::uint64_t seed, std::uint64_t path_id, std::uint64_t prime_index,
                std::uint64_t prime) const {
        const std::uint64_t h = counter_hash(seed, path_id, prime_index);
        switch (family) {
            case Family::mobius_deterministic:
                return -1.0;
            case Family::rademacher:
                return (h >> 63) ? 1.0 : -1.0;
            case Family::symmetric_finite:
                break;
        }
        const auto& sup = support_for(prime);
        if (sup.empty()) throw std::invalid_argument("ModelSpec: empty support");
        const double u = to_unit_double(h);
        double cum = 0.0;
        for (const auto& a : sup) {
            cum += a.prob.convert_to<double>();
            if (u < cum) return a.value.convert_to<double>();
        }
        return sup.back().value.convert_to<double>();
    }

private:
    static void validate_support(const std::vector<SupportAtom>& sup) {
        if (sup.empty()) throw std::invalid_argument("ModelSpec: empty support");
        Rational total = 0;
        for (const auto& a : sup) {
            if (a.value == 0) throw std::invalid_argument("ModelSpec: support value 0 breaks c0 > 0");
            if (a.prob <= 0) throw std::invalid_argument("ModelSpec: probabilities must be positive");
            total += a.prob;
            bool mirrored = false;
            for (const auto& b : sup)
                if (b.value == -a.value && b.prob == a.prob) { mirrored = true; break; }
            if (!mirrored) throw std::invalid_argument("ModelSpec: support not symmetric about 0");
        }
        if (total != 1) throw std::invalid_argument("ModelSpec: probabilities must sum to 1");
    }

    double scan_abs(bool want_max) const {
        auto scan_one = [&](const std::vector<SupportAtom>& sup) {
            double best = want_max ? 0.0 : std::numeric_limits<double>::infinity();
            for (const auto& a : sup) {
                const double v = std::abs(a.value.convert_to<double>());
                best = want_max ? std::max(best, v) : std::min(best, v);
            }
            return best;
        };
        double best = scan_one(base_support());
        for (const auto& [p, sup] : per_prime) {
            (void)p;
            const double v = scan_one(sup);
            best = want_max ? std::max(best, v) : std::min(best, v);
        }
        return best;
    }
};

// One realized assignment of all X_p, p <= n_max. Values are indexed by the
// position of p in tables.primes. Immutable once created; regenerating with
// the same (spec, seed, path_id) yields bit-identical values.
struct SamplePath {
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    std::vector<double> values;  // aligned with SieveTables::primes

    double value_at(std::size_t prime_index) const { return values[prime_index]; }
};

inline SamplePath sample_path(const ModelSpec& spec, const SieveTables& t, std::uint64_t seed,
                              std::uint64_t path_id) {
    spec.validate();
    SamplePath path;
    path.seed = seed;
    path.path_id = path_id;
    path.values.resize(t.primes.size());
    for (std::size_t i = 0; i < t.primes.size(); ++i)
        path.values[i] = spec.draw(seed, path_id, i, t.primes[i]);
    return path;
}

// theta_l: product of X_p over the distinct primes dividing l when l is
// squarefree, zero otherwise; theta_1 = 1 (empty product).
inline double theta(const SamplePath& path, const SieveTables& t, std::uint64_t ell) {
    if (ell < 1) throw std::out_of_range("theta: ell must be >= 1");
    t.check_range(ell, "theta");
    if (!t.is_squarefree(ell)) return 0.0;
    double prod = 1.0;
    for_each_prime_factor(t, ell, [&](std::uint64_t p) { prod *= path.value_at(t.prime_index(p)); });
    return prod;
}

// Streaming partial sums S_n = sum_{l<=n} theta_l at each requested grid
// point; the grid must be sorted ascending.
inline std::vector<double> partial_sums(const SamplePath& path, const SieveTables& t,
                                        std::span<const std::uint64_t> n_grid) {
    if (n_grid.empty()) return {};
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] < n_grid[i - 1]) throw std::invalid_argument("partial_sums: grid must be sorted");
    t.check_range(n_grid.back(), "partial_sums");
    std::vector<double> out;
    out.reserve(n_grid.size());
    double s = 0.0;
    std::size_t g = 0;
    for (std::uint64_t ell = 1; ell <= n_grid.back() && g < n_grid.size(); ++ell) {
        if (t.is_squarefree(ell)) s += theta(path, t, ell);
        while (g < n_grid.size() && n_grid[g] == ell) out.push_back(s), ++g;
    }
    while (g < n_grid.size()) out.push_back(s), ++g;  // grid entries of 0 (empty sum)
    return out;
}

struct MartingaleDecomposition {
    double theta_1_cell = 1.0;                 // the l = 1 term, carried explicitly
    std::map<std::uint64_t, double> cells;     // p -> M_p(n)
    double total() const {
        double s = theta_1_cell;
        for (const auto& [p, v] : cells) s += v;
        return s;
    }
};

// Groups theta_l by largest prime factor: M_p(n) = sum over squarefree l <= n
// with P(l) = p. The l = 1 term has no largest prime factor and is carried as
// a separate deterministic cell, so theta_1_cell + sum_p M_p(n) = S_n exactly.
inline MartingaleDecomposition martingale_decomposition(const SamplePath& path, const SieveTables& t,
                                                        std::uint64_t n) {
    t.check_range(n, "martingale_decomposition");
    MartingaleDecomposition d;
    for (std::uint32_t p : t.primes) {
        if (p > n) break;
        d.cells[p] = 0.0;
    }
    for (std::uint64_t ell = 2; ell <= n; ++ell) {
        if (!t.is_squarefree(ell)) continue;
        d.cells[t.largest_prime_factor[ell]] += theta(path, t, ell);
    }
    return d;
}

// Squarefree l <= n with largest prime factor exactly p (the terms of M_p(n)).
inline std::vector<std::uint64_t> martingale_support(const SieveTables& t, std::uint64_t n,
                                                     std::uint64_t p) {
    t.check_range(n, "martingale_support");
    std::vector<std::uint64_t> ells;
    for (std::uint64_t k = 1; k * p <= n; ++k) {
        const std::uint64_t ell = k * p;
        if (t.is_squarefree(ell) && t.largest_prime_factor[ell] == p) ells.push_back(ell);
    }
    return ells;
}

// Small-prime split: p < (ln(n/p))^3 with its complement among primes <= n.
// The cube sits outside the logarithm; the alternate reading ln((n/p)^3) is
// kept alongside so callers can surface where the two disagree.
inline bool in_delta(std::uint64_t n, std::uint64_t p) {
    return static_cast<double>(p) < std::pow(std::log(static_cast<double>(n) / static_cast<double>(p)), 3);
}

inline bool in_delta_alternate(std::uint64_t n, std::uint64_t p) {
    return static_cast<double>(p) < 3.0 * std::log(static_cast<double>(n) / static_cast<double>(p));
}

struct DeltaSplit {
    std::vector<std::uint64_t> delta;
    std::vector<std::uint64_t> complement;
};

inline DeltaSplit delta_split(const SieveTables& t, std::uint64_t n) {
    t.check_range(n, "delta_split");
    DeltaSplit out;
    for (std::uint32_t p : t.primes) {
        if (p > n) break;
        (in_delta(n, p) ? out.delta : out.complement).push_back(p);
    }
    return out;
}

// Exact essential supremum of |sum over the given squarefree l of theta_l|,
// by enumerating every support combination of the primes involved. The
// enumeration budget is counted in primes (default 20) with a hard cap on
// total combinations.
inline double sup_norm_theta_sum(const ModelSpec& spec, const SieveTables& t,
                                 std::span<const std::uint64_t> ells, unsigned prime_budget = 20,
                                 std::uint64_t combo_budget = std::uint64_t{1} << 26) {
    if (ells.empty()) return 0.0;
    std::vector<std::uint64_t> qs;
    for (std::uint64_t ell : ells) {
        t.check_range(ell, "sup_norm_theta_sum");
        if (!t.is_squarefree(ell)) throw std::invalid_argument("sup_norm_theta_sum: terms must be squarefree");
        for_each_prime_factor(t, ell, [&](std::uint64_t p) { qs.push_back(p); });
    }
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    if (qs.size() > prime_budget)
        throw BudgetExceeded("sup_norm_theta_sum: " + std::to_string(qs.size()) +
                             " primes exceed the enumeration budget of " + std::to_string(prime_budget) +
                             "; fall back to the term-count bound");
    std::vector<std::vector<double>> val_choices(qs.size());
    std::uint64_t combos = 1;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        for (const auto& a : spec.support_for(qs[i])) val_choices[i].push_back(a.value.convert_to<double>());
        if (combos > combo_budget / std::max<std::size_t>(val_choices[i].size(), 1))
            throw BudgetExceeded("sup_norm_theta_sum: support combinations exceed budget");
        combos *= val_choices[i].size();
    }
    // prime-index lists per term
    std::vector<std::vector<std::size_t>> term_primes(ells.size());
    for (std::size_t j = 0; j < ells.size(); ++j)
        for_each_prime_factor(t, ells[j], [&](std::uint64_t p) {
            term_primes[j].push_back(static_cast<std::size_t>(
                std::lower_bound(qs.begin(), qs.end(), p) - qs.begin()));
        });
    std::vector<std::size_t> odo(qs.size(), 0);
    std::vector<double> x(qs.size());
    double best = 0.0;
    for (std::uint64_t c = 0; c < combos; ++c) {
        for (std::size_t i = 0; i < qs.size(); ++i) x[i] = val_choices[i][odo[i]];
        double sum = 0.0;
        for (std::size_t j = 0; j < ells.size(); ++j) {
            double prod = 1.0;
            for (std::size_t qi : term_primes[j]) prod *= x[qi];
            sum += prod;
        }
        best = std::max(best, std::abs(sum));
        for (std::size_t i = 0; i < qs.size(); ++i) {
            if (++odo[i] < val_choices[i].size()) break;
            odo[i] = 0;
        }
    }
    return best;
}

// ||M_p(n)||_inf, exact. The budget counts primes strictly below p that
// actually occur in the terms.
inline double sup_norm_Mp(const ModelSpec& spec, const SieveTables& t, std::uint64_t n,
                          std::uint64_t p, unsigned prime_budget = 20) {
    t.check_range(n, "sup_norm_Mp");
    const auto ells = martingale_support(t, n, p);
    if (ells.empty()) return 0.0;
    // +1: the budget is phrased over primes below p, and p itself always occurs.
    return sup_norm_theta_sum(spec, t, ells, prime_budget + 1);
}

}  // namespace rmf
