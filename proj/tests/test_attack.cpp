#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "bpem/attack.hpp"
#include "bpem/permutation.hpp"

using bpem::BitString;

namespace {

double three_sigma(double p, double trials) { return 3.0 * std::sqrt(p * (1.0 - p) / trials); }

// Collision probability for q independent uniform n-bit values. The t_i of
// a random permutation are close to that.
double birthday(int n, int q) {
    const double space = std::ldexp(1.0, n);
    double none = 1.0;
    for (int i = 1; i < q; ++i) none *= 1.0 - i / space;
    return 1.0 - none;
}

}  // namespace

TEST_CASE("a BPEM oracle never collides") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        auto oracle = bpem::make_bpem_oracle(8, seed);
        bpem::Rng rng(seed);
        const auto rho = rng.bits(8);
        std::vector<BitString> omegas;
        for (std::uint64_t i = 0; i < 64; ++i) omegas.push_back(BitString::from_uint(8, (i * 37 + seed) % 256));
        const auto report = bpem::run_attack(oracle, 8, rho, omegas);
        REQUIRE_FALSE(report.collision_found);
        REQUIRE_FALSE(report.colliding_indices.has_value());
        REQUIRE(report.verdict == bpem::Verdict::LooksBpem);
        REQUIRE(oracle.queries() == 64);
    }
    // Every variant, with all 2^n omegas.
    for (const auto v : {bpem::BpemVariant::ThreeKeyOnePerm, bpem::BpemVariant::OneKeyTwoPerm,
                         bpem::BpemVariant::OneKeyOnePerm}) {
        bpem::Rng rng(77);
        const auto f1 = bpem::table_permutation(bpem::random_table(6, rng));
        const auto f2 = bpem::is_single_perm(v) ? f1 : bpem::table_permutation(bpem::random_table(6, rng));
        const auto ks = bpem::BpemKeySet::random(v, 6, rng);
        bpem::EncryptionOracle oracle(12, [&](const BitString& m) { return bpem::bpem_encrypt(ks, f1, f2, m); });
        CHECK_FALSE(bpem::run_attack(oracle, 6, 64).collision_found);
    }
}

TEST_CASE("identity oracle collides at the first pair") {
    bpem::EncryptionOracle oracle(16, [](const BitString& m) { return m; });
    const std::vector<BitString> omegas{BitString::from_bits("00000000"), BitString::from_bits("00000001")};
    const auto report = bpem::run_attack(oracle, 8, BitString::zeros(8), omegas);
    CHECK(report.collision_found);
    REQUIRE(report.colliding_indices.has_value());
    CHECK(report.colliding_indices->first == 1);
    CHECK(report.colliding_indices->second == 2);
    CHECK(report.verdict == bpem::Verdict::LooksRandom);
    CHECK(bpem::to_string(report.verdict) == "looks-random");
    CHECK(bpem::to_string(bpem::Verdict::LooksBpem) == "looks-bpem");

    bpem::EncryptionOracle again(16, [](const BitString& m) { return m; });
    const auto longer = bpem::run_attack(again, 8, 10);
    CHECK(longer.colliding_indices == std::pair<std::uint64_t, std::uint64_t>{1, 2});
}

TEST_CASE("reported collision is lexicographically first") {
    // t values: 5 3 5 3 -> the first colliding pair is (1, 3).
    const std::vector<std::uint64_t> t = {5, 3, 5, 3};
    bpem::EncryptionOracle oracle(8, [&](const BitString& m) {
        const auto w = left_half(m);
        return concat(w ^ BitString::from_uint(4, t[w.to_uint()]), BitString::zeros(4));
    });
    const auto report = bpem::run_attack(oracle, 4, 4);
    CHECK(report.colliding_indices == std::pair<std::uint64_t, std::uint64_t>{1, 3});
}

TEST_CASE("attack preconditions") {
    bpem::EncryptionOracle oracle(16, [](const BitString& m) { return m; });
    const auto z = BitString::zeros(8);
    CHECK_THROWS_AS(bpem::run_attack(oracle, 8, z, std::vector<BitString>{z, z}), std::invalid_argument);
    CHECK_THROWS_AS(bpem::run_attack(oracle, 8, z, std::vector<BitString>{z}), std::invalid_argument);
    CHECK_THROWS_AS(bpem::run_attack(oracle, 8, 1), std::invalid_argument);
    CHECK_THROWS_AS(bpem::run_attack(oracle, 7, 4), std::invalid_argument);
    CHECK_THROWS_AS(bpem::run_attack(oracle, 8, BitString::zeros(4), std::vector<BitString>{z, BitString::from_uint(8, 1)}), std::invalid_argument);
    CHECK_THROWS_AS(oracle.query(BitString::zeros(8)), std::invalid_argument);
    CHECK_THROWS_AS(bpem::default_omegas(4, 17), std::invalid_argument);
}

TEST_CASE("random permutation collision rate matches the birthday estimate") {
    const int trials = 10000;
    int hits = 0;
    for (int s = 0; s < trials; ++s) {
        auto oracle = bpem::make_random_oracle(8, static_cast<std::uint64_t>(s));
        hits += bpem::run_attack(oracle, 8, 64).collision_found ? 1 : 0;
    }
    const double rate = static_cast<double>(hits) / trials;
    const double expected = birthday(8, 64);
    CHECK(std::abs(rate - expected) <= three_sigma(expected, trials) + 1e-4);
    CHECK(bpem::attack_lower_bound(8, 64) == doctest::Approx(0.99961).epsilon(1e-4));
    CHECK(rate >= bpem::attack_lower_bound(8, 64) - three_sigma(0.9996, trials));
}

TEST_CASE("lazy random oracle is a consistent permutation") {
    auto oracle = bpem::make_random_oracle(12, 3);
    bpem::Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const auto m = rng.bits(24);
        const auto c = oracle.query(m);
        CHECK(oracle.query(m) == c);
    }
    std::unordered_set<BitString> outputs;
    for (std::uint64_t x = 0; x < 4096; ++x) outputs.insert(oracle.query(BitString::from_uint(24, x)));
    CHECK(outputs.size() == 4096);
}

TEST_CASE("analytic lower bound") {
    CHECK(bpem::attack_lower_bound(8, 1) == 0.0);
    CHECK(bpem::attack_lower_bound(8, 8) == doctest::Approx(1.0 - std::exp(-56.0 / 514.0)));
    CHECK(bpem::attack_lower_bound(8, 32) == doctest::Approx(0.85485).epsilon(1e-4));
    for (int n = 1; n <= 16; ++n) {
        double prev = 0.0;
        for (std::uint64_t q = 1; q <= (std::uint64_t{1} << std::min(n, 10)); ++q) {
            const double b = bpem::attack_lower_bound(n, q);
            REQUIRE(b >= prev);
            REQUIRE(b <= 1.0);
            prev = b;
        }
    }
}

TEST_CASE("advantage estimates") {
    const auto q1 = bpem::estimate_advantage(8, 1, 200, 5);
    CHECK(q1.analytic_lower_bound == 0.0);
    CHECK(q1.empirical_advantage == 0.0);

    const auto a8 = bpem::estimate_advantage(8, 8, 2000, 1);
    const auto a32 = bpem::estimate_advantage(8, 32, 2000, 1);
    for (const auto& a : {a8, a32}) {
        CHECK(a.trials == 2000);
        CHECK(a.bpem_collision_rate == 0.0);
        CHECK(a.empirical_advantage == doctest::Approx(std::abs(a.bpem_collision_rate - a.random_collision_rate)));
        const double bound = 1.0 - std::exp(-static_cast<double>(a.q * (a.q - 1)) / 514.0);
        CHECK(a.analytic_lower_bound == doctest::Approx(bound));
        CHECK(std::abs(a.empirical_advantage - bound) <= three_sigma(bound, 2000));
    }
    CHECK(a32.empirical_advantage > a8.empirical_advantage);

    const auto again = bpem::estimate_advantage(8, 32, 2000, 1);
    CHECK(again.random_collision_rate == a32.random_collision_rate);

    CHECK_THROWS_AS(bpem::estimate_advantage(13, 4, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(bpem::estimate_advantage(4, 17, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(bpem::estimate_advantage(4, 0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(bpem::estimate_advantage(4, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("reference upper bounds") {
    using V = bpem::BpemVariant;
    CHECK(bpem::sprp_upper_bound(V::ThreeKeyTwoPerm, 10, 2, 3, 5) == doctest::Approx(2.0 * (26 + 12 + 20) / 1024.0));
    CHECK(bpem::sprp_upper_bound(V::ThreeKeyOnePerm, 10, 2, 3, 5) == doctest::Approx(2.0 * (42 + 64) / 1024.0));
    CHECK(bpem::sprp_upper_bound(V::OneKeyOnePerm, 10, 2, 3, 0) ==
          doctest::Approx(2.0 * (32 + 24) / 1024.0 + 68.0 / 1023.0 + 4.0 / (1024.0 * 1024.0)));
    for (int n = 4; n <= 12; ++n) {
        for (double q = 2; q <= 64; q *= 2) {
            for (const auto v : {V::ThreeKeyTwoPerm, V::ThreeKeyOnePerm, V::OneKeyTwoPerm, V::OneKeyOnePerm}) {
                CHECK(bpem::sprp_upper_bound(v, n, q, 0, 0) >= bpem::attack_lower_bound(n, static_cast<std::uint64_t>(q)));
            }
        }
    }
}
