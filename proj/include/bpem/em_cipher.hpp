#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bpem/bitstring.hpp"
#include "bpem/gf2.hpp"
#include "bpem/permutation.hpp"
#include "bpem/rng.hpp"

namespace bpem {

/// Generic r-round Even-Mansour:
/// P_r(... P_2(P_1(m ^ K_0) ^ K_1) ...) ^ K_r. Needs keys.size() == perms.size() + 1.
BitString em_encrypt(std::span<const Permutation> perms, std::span<const BitString> keys, const BitString& msg);
BitString em_decrypt(std::span<const Permutation> perms, std::span<const BitString> keys, const BitString& ct);

/// f^{+K}: x -> f(x ^ K) ^ K, the one-round single-key Even-Mansour map.
BitString single_key_round(const Permutation& f, const BitString& key, const BitString& x);
Permutation single_key_permutation(const Permutation& f, const BitString& key);

enum class BpemVariant {
    ThreeKeyTwoPerm,  // K0, K1, K2 independent; f1, f2 independent
    ThreeKeyOnePerm,  // f1 = f2
    OneKeyTwoPerm,    // K0 = K1 = K2
    OneKeyOnePerm,    // K0 = K1 = K2 and f1 = f2
};

std::string_view to_string(BpemVariant v) noexcept;
/// Accepts the canonical names ("three-key/two-perm", ...) and the short
/// aliases "three-key" and "one-key" for the two-permutation forms.
std::optional<BpemVariant> parse_variant(std::string_view name) noexcept;
constexpr bool is_single_key(BpemVariant v) noexcept {
    return v == BpemVariant::OneKeyTwoPerm || v == BpemVariant::OneKeyOnePerm;
}
constexpr bool is_single_perm(BpemVariant v) noexcept {
    return v == BpemVariant::ThreeKeyOnePerm || v == BpemVariant::OneKeyOnePerm;
}

/// Secret keys of a two-round BPEM cipher on 2n-bit blocks.
class BpemKeySet {
public:
    /// `keys` holds K0, K1, K2 for three-key variants, or the single K.
    BpemKeySet(BpemVariant variant, std::vector<BitString> keys);

    static BpemKeySet random(BpemVariant variant, int n, Rng& rng);

    BpemVariant variant() const noexcept { return variant_; }
    /// Half-block width.
    int n() const noexcept { return keys_.front().width() / 2; }
    /// K_i for i in {0, 1, 2}; single-key sets expand their one key.
    const BitString& key(int i) const;
    std::vector<BitString> expanded() const { return {key(0), key(1), key(2)}; }
    std::span<const BitString> stored() const noexcept { return keys_; }

private:
    BpemVariant variant_;
    std::vector<BitString> keys_;
};

/// BPEM[K0, K1, K2; f1, f2] = EM with P_1 = LR^2[f1], P_2 = LR^2[f2].
/// Single-permutation variants require f1 and f2 to be the same handle.
BitString bpem_encrypt(const BpemKeySet& ks, const Permutation& f1, const Permutation& f2, const BitString& msg);
BitString bpem_decrypt(const BpemKeySet& ks, const Permutation& f1, const Permutation& f2, const BitString& ct);

/// Round keys of the equivalent keyed Luby-Rackoff form. Six keys for
/// independent K0, K1, K2; three for the single-key variants.
class DerivedKeySchedule {
public:
    explicit DerivedKeySchedule(std::vector<BitString> kprime);

    int n() const noexcept { return kprime_.front().width(); }
    bool single_key() const noexcept { return kprime_.size() == 3; }
    /// K'_i, 1-based as in the usual notation.
    const BitString& k(int i) const;
    std::span<const BitString> keys() const noexcept { return kprime_; }

private:
    std::vector<BitString> kprime_;
};

/// 6x6 lower-triangular map from ((K0)_R, (K0)_L, (K1)_R, (K1)_L, (K2)_R, (K2)_L)
/// to (K'1, ..., K'6).
const Gf2Matrix& lr_key_matrix();
/// 3x2 map from (K_R, K_L) to (K'1, K'2, K'3) when K0 = K1 = K2 = K.
const Gf2Matrix& single_key_lr_key_matrix();

/// Requires a three-key variant.
DerivedKeySchedule derive_lr_keys(const BpemKeySet& ks);
/// Requires a one-key variant.
DerivedKeySchedule derive_single_key_lr_keys(const BpemKeySet& ks);

/// Six keys: LR[f1^{+K'1}, f1^{+K'2}, f2^{+K'3}, f2^{+K'4}](m) ^ (K'6 * K'5).
/// Three keys: LR[f1^{+K'1}, f1^{+K'2}, f2^{+K'2}, f2^{+K'3}](m).
BitString bpem_via_lr(const DerivedKeySchedule& sched, const Permutation& f1, const Permutation& f2,
                      const BitString& msg);

/// One-round BPEM, EM^{LR^2[f]}_{K0,K1}. Not a secure cipher: equal right
/// halves leak the XOR of the left halves.
BitString bpem1_encrypt(const BitString& k0, const BitString& k1, const Permutation& f, const BitString& msg);
BitString bpem1_decrypt(const BitString& k0, const BitString& k1, const Permutation& f, const BitString& ct);

/// Key file contents. `perm_keys` optionally carries public AES keys for the
/// round permutations (ell1, ell2, or a single ell for one-perm variants).
struct KeyFile {
    BpemKeySet keys;
    std::vector<BitString> perm_keys;
};

void write_key_file(std::ostream& out, const KeyFile& kf);
KeyFile read_key_file(std::istream& in);

}  // namespace bpem
