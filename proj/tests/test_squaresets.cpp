#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "rmf/moments.hpp"
#include "rmf/sieve.hpp"
#include "rmf/squaresets.hpp"

using namespace rmf;

namespace {
const SieveTables& tables() {
    static const SieveTables t = build_tables(1000);
    return t;
}

std::map<unsigned, BigInt> counts_of(std::initializer_list<std::pair<unsigned, long>> init) {
    std::map<unsigned, BigInt> m;
    for (auto [w, c] : init) m[w] = c;
    return m;
}
}  // namespace

TEST_CASE("exponent matrix shape at n = 10") {
    const auto m = build_exponent_matrix(tables(), 10);
    CHECK(m.cols() == 7);   // Q(10)
    CHECK(m.rows() == 4);   // primes 2,3,5,7
    CHECK(m.squarefree_list == std::vector<std::uint64_t>{1, 2, 3, 5, 6, 7, 10});
    CHECK(m.column(0)[0] == 0);          // l = 1 -> zero vector
    CHECK(m.column(4)[0] == 0b0011u);    // l = 6 -> rows of 2 and 3
    CHECK(m.column(6)[0] == 0b0101u);    // l = 10 -> rows of 2 and 5
}

TEST_CASE("rank and kernel") {
    SECTION("n = 10") {
        const auto kb = rank_and_kernel(build_exponent_matrix(tables(), 10));
        CHECK(kb.rank == 4);
        CHECK(kb.nullity == 3);
    }
    SECTION("n = 2") {
        const auto kb = rank_and_kernel(build_exponent_matrix(tables(), 2));
        CHECK(kb.rank == 1);
        CHECK(kb.nullity == 1);
    }
    SECTION("every basis vector XORs columns to zero") {
        for (std::uint64_t n : {10ull, 30ull, 60ull}) {
            const auto m = build_exponent_matrix(tables(), n);
            const auto kb = rank_and_kernel(m);
            REQUIRE(kb.rank + kb.nullity == m.cols());
            for (std::size_t i = 0; i < kb.nullity; ++i) {
                const auto z = xor_of_columns(m, kb.vector(i));
                for (std::uint64_t w : z) REQUIRE(w == 0);
            }
        }
    }
}

TEST_CASE("kernel enumeration matches the hand-tallied distribution at n = 10") {
    const auto m = build_exponent_matrix(tables(), 10);
    const auto d = badset_counts_kernel(m);
    CHECK(d.counts == counts_of({{0, 1}, {1, 1}, {3, 2}, {4, 3}, {5, 1}}));
    CHECK(d.badset_count(4) == 3);  // B_{4,10}
    CHECK(d.badset_count(2) == 0);
    CHECK(d.total() == BigInt(1) << d.nullity);
}

TEST_CASE("counts[2] is always zero and counts[1] = 1") {
    for (std::uint64_t n : {2ull, 10ull, 25ull, 60ull}) {
        const auto d = badset_counts_kernel(build_exponent_matrix(tables(), n));
        CHECK(d.badset_count(2) == 0);
        CHECK(d.counts.at(1) == 1);  // the singleton {1}
        CHECK(d.counts.at(0) == 1);
    }
}

TEST_CASE("n = 2 kernel distribution") {
    const auto d = badset_counts_kernel(build_exponent_matrix(tables(), 2));
    CHECK(d.counts == counts_of({{0, 1}, {1, 1}}));
}

TEST_CASE("brute force oracle agrees with kernel enumeration") {
    for (std::uint64_t n = 1; n <= 20; ++n) {
        const auto m = build_exponent_matrix(tables(), n);
        const auto kd = badset_counts_kernel(m);
        const auto bd = brute_force_badsets(tables(), n);
        REQUIRE(kd.counts == bd.counts);
    }
    // spot values from direct products
    const auto d6 = brute_force_badsets(tables(), 6);
    CHECK(d6.counts.at(3) == 1);  // {2,3,6}: 36 = 6^2
    CHECK(d6.counts.at(4) == 1);  // {1,2,3,6}
    const auto d4 = brute_force_badsets(tables(), 4);
    CHECK(d4.counts == counts_of({{0, 1}, {1, 1}}));
    CHECK_THROWS_AS(brute_force_badsets(tables(), 100), BudgetExceeded);
}

TEST_CASE("MacWilliams transform agrees with kernel enumeration exactly") {
    for (std::uint64_t n = 1; n <= 60; ++n) {
        const auto m = build_exponent_matrix(tables(), n);
        const auto kd = badset_counts_kernel(m, 0, 28, 2);
        const auto md = badset_counts_macwilliams(m, 26, 2);
        REQUIRE(kd.counts == md.counts);
        REQUIRE(kd.rank == md.rank);
        REQUIRE(kd.nullity == md.nullity);
    }
}

TEST_CASE("MacWilliams B_4 at n = 100 agrees with pair-XOR matching") {
    // Exponent masks of squarefree integers are injective, so two distinct
    // pairs with equal XOR are disjoint and every square-product 4-set splits
    // into matching pairs in exactly 3 ways: B_4 = sum_m C(g_m, 2) / 3.
    const auto& t = tables();
    const auto m = build_exponent_matrix(t, 100);
    REQUIRE(m.rows() <= 64);
    std::vector<std::uint64_t> masks(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) masks[j] = m.column(j)[0];
    std::map<std::uint64_t, std::uint64_t> groups;
    for (std::size_t i = 0; i < masks.size(); ++i)
        for (std::size_t j = i + 1; j < masks.size(); ++j) ++groups[masks[i] ^ masks[j]];
    BigInt matched = 0;
    for (const auto& [xor_mask, g] : groups) matched += BigInt(g) * (g - 1) / 2;
    REQUIRE(matched % 3 == 0);
    const auto d = badset_counts_macwilliams(m, 26, 2);
    CHECK(d.badset_count(4) == matched / 3);
    CHECK(d.badset_count(4) == 590);
    CHECK(d.total() == BigInt(1) << d.nullity);  // 2^36, checked exactly
}

TEST_CASE("MacWilliams zero-matrix edge at n = 1") {
    const auto m = build_exponent_matrix(tables(), 1);
    const auto d = badset_counts_macwilliams(m);
    CHECK(d.counts == counts_of({{0, 1}, {1, 1}}));
}

TEST_CASE("krawtchouk recurrence spot values") {
    const auto k3 = krawtchouk_column(7, 3);
    CHECK(k3[0] == 1);
    CHECK(k3[1] == 1);
    CHECK(k3[2] == -3);
    CHECK(k3[3] == -3);
    const auto k0 = krawtchouk_column(7, 0);
    for (std::size_t j = 0; j <= 7; ++j) {
        BigInt binom = big_factorial(7) / (big_factorial(static_cast<unsigned>(j)) *
                                           big_factorial(static_cast<unsigned>(7 - j)));
        CHECK(k0[j] == binom);  // K_j(0; s) = C(s, j)
    }
}

TEST_CASE("is_bad_set") {
    const auto& t = tables();
    const std::uint64_t good[4] = {3, 5, 6, 10};  // 900 = 30^2
    CHECK(is_bad_set(t, good));
    const std::uint64_t pair[2] = {2, 3};
    CHECK_FALSE(is_bad_set(t, pair));
    const std::uint64_t odd[3] = {2, 3, 6};  // square product but odd size
    CHECK_FALSE(is_bad_set(t, odd));
    const std::uint64_t nonsf[2] = {4, 4};
    CHECK_THROWS_AS(is_bad_set(t, nonsf), std::invalid_argument);  // duplicates
    const std::uint64_t with_sq[4] = {2, 4, 8, 1};
    CHECK_FALSE(is_bad_set(t, with_sq));
}

TEST_CASE("every even-weight kernel member is a bad set") {
    const auto& t = tables();
    const auto m = build_exponent_matrix(t, 30);
    const auto kb = rank_and_kernel(m);
    // spot-check all pairwise XORs of basis vectors
    std::vector<std::uint64_t> members;
    for (std::size_t i = 0; i < kb.nullity; ++i)
        for (std::size_t j = i + 1; j < kb.nullity; ++j) {
            members.clear();
            for (std::size_t col = 0; col < m.cols(); ++col) {
                const bool a = (kb.vector(i)[col >> 6] >> (col & 63)) & 1;
                const bool b = (kb.vector(j)[col >> 6] >> (col & 63)) & 1;
                if (a ^ b) members.push_back(m.squarefree_list[col]);
            }
            if (members.size() % 2 == 0 && !members.empty())
                REQUIRE(is_bad_set(t, members));
        }
}

TEST_CASE("scan_lower_bound at n = 10") {
    const auto& t = tables();
    const auto scan = scan_lower_bound(t, 10, 1, 3);
    CHECK(scan.argmax_k == 2);
    CHECK(scan.max_ratio == Catch::Approx(3.0 * 24.0 / 100.0));  // 0.72
    CHECK_FALSE(scan.any_at_least_one);
}

TEST_CASE("budget refusal names the alternative") {
    const auto m = build_exponent_matrix(tables(), 200);
    CHECK_THROWS_AS(badset_counts_kernel(m, 0, 10), BudgetExceeded);
    try {
        badset_counts_kernel(m, 0, 10);
    } catch (const BudgetExceeded& e) {
        CHECK(std::string(e.what()).find("MacWilliams") != std::string::npos);
    }
}

TEST_CASE("weight distributions are chunk-order independent") {
    const auto m = build_exponent_matrix(tables(), 50);
    const auto a = badset_counts_kernel(m, 0, 28, 1);
    const auto b = badset_counts_kernel(m, 0, 28, 4);
    CHECK(a.counts == b.counts);
}

TEST_CASE("fourth moment decomposes as 3Q^2 - 2Q + 24 B_4") {
    // 4-tuples with square product are either all-equal (Q), two distinct
    // values in pairs (3 Q (Q-1)), or orderings of a 4-element bad set
    // (4! B_4); no other pattern can square.
    const auto& t = tables();
    for (std::uint64_t n : {3ull, 10ull, 20ull, 30ull, 40ull}) {
        const BigInt q = squarefree_count(t, n);
        const BigInt b4 = badset_counts_kernel(build_exponent_matrix(t, n)).badset_count(4);
        REQUIRE(exact_moment_enumeration(t, n, 2) == 3 * q * q - 2 * q + 24 * b4);
    }
}

TEST_CASE("moment link: E[S^{2r}] >= (2r)! B_{2r,n}") {
    const auto& t = tables();
    for (std::uint64_t n : {10ull, 20ull, 30ull, 40ull}) {
        const auto d = badset_counts_kernel(build_exponent_matrix(t, n));
        for (unsigned r = 1; r <= 3; ++r) {
            const BigInt moment = exact_moment_enumeration(t, n, r);
            REQUIRE(moment >= big_factorial(2 * r) * d.badset_count(2 * r));
        }
    }
}
