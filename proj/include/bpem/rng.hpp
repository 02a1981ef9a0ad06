#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "bpem/bitstring.hpp"

namespace bpem {

/// Seeded generator used for every randomized construction in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded draws use rejection sampling on the raw 64-bit output
/// rather than std::uniform_int_distribution, whose algorithm is left to the
/// standard library vendor. Together these make every seeded table, key and
/// trial reproducible across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, bound). bound must be non-zero.
    std::uint64_t below(std::uint64_t bound) {
        // Reject the top partial bucket so every residue is equally likely.
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % bound;
    }

    /// Fills bytes from successive 64-bit outputs, most significant byte first.
    void fill(std::span<std::uint8_t> out) {
        std::uint64_t word = 0;
        int left = 0;
        for (auto& b : out) {
            if (left == 0) {
                word = engine_();
                left = 8;
            }
            b = static_cast<std::uint8_t>(word >> 56);
            word <<= 8;
            --left;
        }
    }

    BitString bits(int width);

private:
    std::mt19937_64 engine_;
};

/// Derives an independent child seed, e.g. one per Monte-Carlo trial.
/// SplitMix64 finalizer over (parent, index).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

}  // namespace bpem
