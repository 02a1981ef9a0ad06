#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "bpem/bitstring.hpp"
#include "bpem/em_cipher.hpp"

namespace bpem {

/// Encryption-only oracle on 2n-bit blocks. There is deliberately no way to
/// ask for an inverse: the distinguisher below is a chosen-plaintext attack.
class EncryptionOracle {
public:
    using Fn = std::function<BitString(const BitString&)>;

    EncryptionOracle(int block_width, Fn encrypt);

    int block_width() const noexcept { return block_width_; }
    BitString query(const BitString& plaintext);
    std::uint64_t queries() const noexcept { return queries_; }

private:
    int block_width_;
    Fn encrypt_;
    std::uint64_t queries_ = 0;
};

enum class Verdict { LooksBpem, LooksRandom };
std::string_view to_string(Verdict v) noexcept;

struct AttackReport {
    int n = 0;
    std::uint64_t q = 0;
    BitString rho = BitString::zeros(1);
    bool collision_found = false;
    /// Query numbers (i, j), counted from 1, of the first colliding pair in
    /// lexicographic order.
    std::optional<std::pair<std::uint64_t, std::uint64_t>> colliding_indices;
    Verdict verdict = Verdict::LooksBpem;
};

/// omega_i = i - 1 for i = 1..q, as n-bit strings.
std::vector<BitString> default_omegas(int n, std::uint64_t q);

/// Queries omega_i * rho, forms t_i = omega_i ^ (sigma_i)_L and looks for
/// t_i = t_j. A BPEM oracle never produces a collision; a random permutation
/// does with probability about 1 - exp(-q(q-1) / 2^(n+1)).
AttackReport run_attack(EncryptionOracle& oracle, int n, const BitString& rho, std::span<const BitString> omegas);
/// Defaults: rho all-zero, omega_i = i - 1.
AttackReport run_attack(EncryptionOracle& oracle, int n, std::uint64_t q);

struct AdvantageEstimate {
    int n = 0;
    std::uint64_t q = 0;
    std::uint64_t trials = 0;
    double bpem_collision_rate = 0.0;
    double random_collision_rate = 0.0;
    double empirical_advantage = 0.0;
    double analytic_lower_bound = 0.0;
};

/// 1 - exp(-q(q-1) / (2(2^n + 1))): the attack's guaranteed advantage.
double attack_lower_bound(int n, std::uint64_t q);

/// Upper bound on the strong-PRP advantage of two-round BPEM for q
/// encryption/decryption queries and q1, q2 queries to the public
/// permutations. For single-permutation variants q1 + q2 counts queries to
/// the shared permutation. Not clamped to 1.
double sprp_upper_bound(BpemVariant variant, int n, double q, double q1, double q2);

/// Runs `trials` attacks against fresh three-key BPEM instances and `trials`
/// against fresh uniformly random permutations of 2n bits. Deterministic in
/// `seed` regardless of how trials are spread over threads.
AdvantageEstimate estimate_advantage(int n, std::uint64_t q, std::uint64_t trials, std::uint64_t seed);

/// Oracle factories used by the estimator, exposed for tests and the CLI.
EncryptionOracle make_bpem_oracle(int n, std::uint64_t seed);
/// Table-backed when 2n <= 16, lazily sampled otherwise.
EncryptionOracle make_random_oracle(int n, std::uint64_t seed);

}  // namespace bpem
