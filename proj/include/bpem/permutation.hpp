#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bpem/aes128.hpp"
#include "bpem/bitstring.hpp"
#include "bpem/gf2.hpp"
#include "bpem/rng.hpp"

namespace bpem {

/// Shared, immutable handle to an invertible map on width-n bit strings.
///
/// Copies are cheap and refer to the same underlying map. forward and
/// backward reject inputs of the wrong width.
class Permutation {
public:
    class Impl {
    public:
        virtual ~Impl() = default;
        virtual int width() const = 0;
        virtual BitString forward(const BitString& x) const = 0;
        virtual BitString backward(const BitString& y) const = 0;
        virtual std::string descriptor() const = 0;
    };

    explicit Permutation(std::shared_ptr<const Impl> impl);

    int width() const noexcept { return width_; }
    BitString forward(const BitString& x) const;
    BitString backward(const BitString& y) const;
    BitString operator()(const BitString& x) const { return forward(x); }
    /// Provenance, e.g. "table n=8", "gf2n n=3 a=2 poly=b", "aes128 key=...".
    std::string descriptor() const { return impl_->descriptor(); }

    /// True when both handles share one underlying map object.
    bool same_instance(const Permutation& other) const noexcept { return impl_ == other.impl_; }

private:
    std::shared_ptr<const Impl> impl_;
    int width_;
};

inline constexpr int kMaxTableBits = 16;

/// mapping[i] is the image of the input whose integer value is i.
/// Size must be 2^n with 1 <= n <= 16, and the mapping a bijection.
Permutation table_permutation(std::vector<std::uint32_t> mapping);

/// Fisher-Yates shuffle of the identity table on n bits.
std::vector<std::uint32_t> random_table(int n, Rng& rng);
/// Arbitrary (generally non-injective) function table on n bits.
std::vector<std::uint32_t> random_function_table(int n, Rng& rng);
Permutation random_permutation(int n, std::uint64_t seed);

/// Identity on any width up to 256.
Permutation identity_permutation(int width);

/// x -> A x over GF(2); A must be square and invertible, at most 64 columns.
Permutation linear_permutation(const Gf2Matrix& a);

/// x -> a * x in GF(2^n). `poly` has width n+1 and holds the coefficients of
/// the reduction polynomial, leading term first; it must be irreducible.
Permutation gf2n_mul_permutation(int n, const BitString& a, const BitString& poly);
/// Same, with the shipped default polynomial for n.
Permutation gf2n_mul_permutation(int n, const BitString& a);

/// AES-128 under `key` as a permutation of 128-bit strings.
Permutation aes_permutation(const BitString& key, Aes128::Backend backend = Aes128::Backend::Auto);

/// Text form: "perm n=<n>" followed by 2^n lines, each the hex integer value
/// of one output, zero-padded to two digits per byte.
void write_permutation_table(std::ostream& out, const Permutation& p);
Permutation read_permutation_table(std::istream& in);

}  // namespace bpem
