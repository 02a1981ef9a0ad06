#pragma once

#include <concepts>
#include <cstdint>
#include <map>
#include <span>

#include "bpem/bitstring.hpp"
#include "bpem/permutation.hpp"

namespace bpem {

template <class F>
concept RoundFunction = std::invocable<const F&, const BitString&> &&
                        std::same_as<std::invoke_result_t<const F&, const BitString&>, BitString>;

/// One Feistel round: w -> w_R * (w_L ^ f(w_R)).
///
/// `f` can be any function on half-width strings; the round is a permutation
/// of the full width whether or not f is.
template <RoundFunction F>
BitString lr_round(const F& f, const BitString& w) {
    auto [left, right] = split(w);
    left ^= f(right);
    return concat(right, left);
}

/// Inverse of lr_round: y -> (y_R ^ f(y_L)) * y_L.
template <RoundFunction F>
BitString lr_round_inverse(const F& f, const BitString& y) {
    auto [left, right] = split(y);
    right ^= f(left);
    return concat(right, left);
}

/// LR[f_1, ..., f_r]: rounds applied in list order, f_1 first.
BitString lr_chain(std::span<const Permutation> fs, const BitString& w);
BitString lr_chain_inverse(std::span<const Permutation> fs, const BitString& y);

/// LR^2[f] in closed form: (w_L ^ f(w_R)) * (w_R ^ f(w_L ^ f(w_R))).
BitString lr2(const Permutation& f, const BitString& w);

/// LR^2[f] as a permutation handle of width 2n. Forward uses the closed form,
/// backward two inverse Feistel rounds. Balanced whenever f is a permutation.
Permutation lr2_permutation(const Permutation& f);

/// Largest width swept exhaustively by is_balanced and xor_profile.
inline constexpr int kMaxSweepBits = 20;

/// True iff x -> x ^ P(x) is a bijection. Exhaustive over all 2^m inputs.
bool is_balanced(const Permutation& p);

/// Census of the multiset { x ^ P(x) } over all inputs.
struct XorProfile {
    int n = 0;
    std::uint64_t distinct_count = 0;
    /// multiplicity -> number of difference values occurring that often.
    std::map<std::uint64_t, std::uint64_t> histogram;

    bool balanced() const noexcept { return distinct_count == (std::uint64_t{1} << n); }
};

/// Rejects handles whose forward map turns out not to be injective.
XorProfile xor_profile(const Permutation& p);

}  // namespace bpem
