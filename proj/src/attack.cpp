#include "bpem/attack.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "bpem/balanced.hpp"
#include "bpem/permutation.hpp"
#include "bpem/rng.hpp"

namespace bpem {

EncryptionOracle::EncryptionOracle(int block_width, Fn encrypt)
    : block_width_(block_width), encrypt_(std::move(encrypt)) {
    if (!encrypt_) throw std::invalid_argument("EncryptionOracle: empty function");
}

BitString EncryptionOracle::query(const BitString& plaintext) {
    if (plaintext.width() != block_width_) throw std::invalid_argument("oracle query has wrong block width");
    ++queries_;
    return encrypt_(plaintext);
}

std::string_view to_string(Verdict v) noexcept {
    return v == Verdict::LooksRandom ? "looks-random" : "looks-bpem";
}

std::vector<BitString> default_omegas(int n, std::uint64_t q) {
    if (n < 64 && q > (std::uint64_t{1} << n)) throw std::invalid_argument("more queries than distinct n-bit strings");
    std::vector<BitString> out;
    out.reserve(q);
    for (std::uint64_t i = 0; i < q; ++i) out.push_back(BitString::from_uint(n, i));
    return out;
}

AttackReport run_attack(EncryptionOracle& oracle, int n, const BitString& rho, std::span<const BitString> omegas) {
    if (oracle.block_width() != 2 * n) throw std::invalid_argument("oracle block width must be 2n");
    if (rho.width() != n) throw std::invalid_argument("rho must have width n");
    if (omegas.size() < 2) throw std::invalid_argument("the attack needs at least two queries");
    {
        std::unordered_set<BitString> seen;
        for (const auto& w : omegas) {
            if (w.width() != n) throw std::invalid_argument("omega has wrong width");
            if (!seen.insert(w).second) throw std::invalid_argument("omegas must be pairwise distinct");
        }
    }

    AttackReport report;
    report.n = n;
    report.q = omegas.size();
    report.rho = rho;

    // t -> first query number with that value. Scanning in order and keeping
    // the smallest (first, later) pair yields the lexicographically first
    // collision: a smaller first index beats any later one.
    std::unordered_map<BitString, std::uint64_t> first_seen;
    std::unordered_map<std::uint64_t, std::uint64_t> second_seen;
    for (std::uint64_t i = 0; i < omegas.size(); ++i) {
        const auto sigma = oracle.query(concat(omegas[i], rho));
        const auto t = omegas[i] ^ left_half(sigma);
        const auto [it, inserted] = first_seen.try_emplace(t, i + 1);
        if (!inserted) second_seen.try_emplace(it->second, i + 1);
    }
    if (!second_seen.empty()) {
        const auto best = std::min_element(second_seen.begin(), second_seen.end(),
                                           [](const auto& a, const auto& b) { return a.first < b.first; });
        report.collision_found = true;
        report.colliding_indices = std::pair{best->first, best->second};
        report.verdict = Verdict::LooksRandom;
    }
    return report;
}

AttackReport run_attack(EncryptionOracle& oracle, int n, std::uint64_t q) {
    const auto omegas = default_omegas(n, q);
    return run_attack(oracle, n, BitString::zeros(n), omegas);
}

double attack_lower_bound(int n, std::uint64_t q) {
    const double qd = static_cast<double>(q);
    return -std::expm1(-qd * (qd - 1.0) / (2.0 * (std::ldexp(1.0, n) + 1.0)));
}

double sprp_upper_bound(BpemVariant variant, int n, double q, double q1, double q2) {
    const double space = std::ldexp(1.0, n);
    switch (variant) {
        case BpemVariant::ThreeKeyTwoPerm:
        case BpemVariant::OneKeyTwoPerm:
            return q * (13.0 * q + 4.0 * q1 + 4.0 * q2) / space;
        case BpemVariant::ThreeKeyOnePerm:
            return q * (21.0 * q + 8.0 * (q1 + q2)) / space;
        case BpemVariant::OneKeyOnePerm:
            return q * (16.0 * q + 8.0 * (q1 + q2)) / space + 17.0 * q * q / (space - 1.0) +
                   q * q / (space * space);
    }
    return 1.0;
}

namespace {

class LazyRandomOracle {
public:
    LazyRandomOracle(int width, std::uint64_t seed) : width_(width), rng_(seed) {}

    BitString operator()(const BitString& x) {
        if (const auto it = table_.find(x); it != table_.end()) return it->second;
        BitString y = rng_.bits(width_);
        while (used_.contains(y)) y = rng_.bits(width_);
        used_.insert(y);
        table_.emplace(x, y);
        return y;
    }

private:
    int width_;
    Rng rng_;
    std::unordered_map<BitString, BitString> table_;
    std::unordered_set<BitString> used_;
};

bool trial_collides(EncryptionOracle oracle, int n, std::uint64_t q) {
    if (q < 2) return false;
    return run_attack(oracle, n, q).collision_found;
}

}  // namespace

EncryptionOracle make_bpem_oracle(int n, std::uint64_t seed) {
    Rng rng(seed);
    const auto f1 = table_permutation(random_table(n, rng));
    const auto f2 = table_permutation(random_table(n, rng));
    const auto keys = BpemKeySet::random(BpemVariant::ThreeKeyTwoPerm, n, rng);
    return EncryptionOracle(2 * n, [=](const BitString& m) { return bpem_encrypt(keys, f1, f2, m); });
}

EncryptionOracle make_random_oracle(int n, std::uint64_t seed) {
    if (2 * n <= kMaxTableBits) {
        const auto p = random_permutation(2 * n, seed);
        return EncryptionOracle(2 * n, [p](const BitString& m) { return p.forward(m); });
    }
    auto lazy = std::make_shared<LazyRandomOracle>(2 * n, seed);
    return EncryptionOracle(2 * n, [lazy](const BitString& m) { return (*lazy)(m); });
}

AdvantageEstimate estimate_advantage(int n, std::uint64_t q, std::uint64_t trials, std::uint64_t seed) {
    if (n < 1 || n > 12) throw std::invalid_argument("estimate_advantage supports 1 <= n <= 12");
    if (q < 1 || q > (std::uint64_t{1} << n)) throw std::invalid_argument("q must be in 1..2^n");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");

    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                             static_cast<unsigned>(std::min<std::uint64_t>(trials, 64))));
    std::vector<std::uint64_t> bpem_hits(workers, 0);
    std::vector<std::uint64_t> random_hits(workers, 0);
    auto work = [&](unsigned w) {
        for (std::uint64_t t = w; t < trials; t += workers) {
            if (trial_collides(make_bpem_oracle(n, derive_seed(seed, 2 * t)), n, q)) ++bpem_hits[w];
            if (trial_collides(make_random_oracle(n, derive_seed(seed, 2 * t + 1)), n, q)) ++random_hits[w];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }

    std::uint64_t bpem_total = 0, random_total = 0;
    for (unsigned w = 0; w < workers; ++w) {
        bpem_total += bpem_hits[w];
        random_total += random_hits[w];
    }
    AdvantageEstimate est;
    est.n = n;
    est.q = q;
    est.trials = trials;
    est.bpem_collision_rate = static_cast<double>(bpem_total) / static_cast<double>(trials);
    est.random_collision_rate = static_cast<double>(random_total) / static_cast<double>(trials);
    est.empirical_advantage = std::abs(est.bpem_collision_rate - est.random_collision_rate);
    est.analytic_lower_bound = attack_lower_bound(n, q);
    return est;
}

}  // namespace bpem
