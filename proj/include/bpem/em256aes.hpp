#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "bpem/aes128.hpp"
#include "bpem/bitstring.hpp"
#include "bpem/em_cipher.hpp"

namespace bpem {

/// 256-bit block cipher: two-round BPEM with n = 128 and AES-128 under the
/// public keys ell1, ell2 as the round permutations f1, f2.
///
/// Each block costs four AES encryptions; decryption also only runs AES
/// forward, since the LR^2 layers are inverted as Feistel rounds.
///
/// ell1 and ell2 are public per-instance parameters and may travel with the
/// ciphertext. K0, K1, K2 are the secrets. Nothing here rotates or tracks
/// keys; pick fresh K per session and keep the number of blocks under one
/// (ell, K) far below 2^64.
class Em256Aes {
public:
    static constexpr std::size_t kBlockBytes = 32;
    using Block = std::array<std::uint8_t, kBlockBytes>;

    enum class Mode { General, SingleKey };

    /// `keys` must have n = 128. One-perm variants take a single AES key
    /// (`ell2` is ignored and set equal to `ell1`).
    Em256Aes(const Aes128::Key& ell1, const Aes128::Key& ell2, BpemKeySet keys,
             Aes128::Backend backend = Aes128::Backend::Auto);

    static Em256Aes general(const Aes128::Key& ell1, const Aes128::Key& ell2, const Block& k0, const Block& k1,
                            const Block& k2, Aes128::Backend backend = Aes128::Backend::Auto);
    /// K0 = K1 = K2 = k and ell1 = ell2 = ell.
    static Em256Aes single_key(const Aes128::Key& ell, const Block& k,
                               Aes128::Backend backend = Aes128::Backend::Auto);
    /// Requires n = 128 and the permutation keys to be present.
    static Em256Aes from_key_file(const KeyFile& kf);

    Mode mode() const noexcept;
    const BpemKeySet& key_set() const noexcept { return keys_; }
    const Aes128::Key& ell1() const noexcept { return ell1_; }
    const Aes128::Key& ell2() const noexcept { return ell2_; }

    Block encrypt_block(const Block& pt) const noexcept;
    Block decrypt_block(const Block& ct) const noexcept;
    BitString encrypt_block(const BitString& pt) const;
    BitString decrypt_block(const BitString& ct) const;

    /// Independent blocks in place (ECB), eight at a time through AES.
    /// Size must be a multiple of 32.
    void encrypt_blocks(std::span<std::uint8_t> data) const;
    void decrypt_blocks(std::span<std::uint8_t> data) const;
    /// CBC-style chaining with a zero IV, in place. Serial benchmark only.
    void encrypt_chained(std::span<std::uint8_t> data) const;

    /// Raw AES-128 under ell1, used as the benchmark baseline.
    const Aes128& f1() const noexcept { return f1_; }

private:
    bool use_ni() const noexcept;

    Aes128::Key ell1_;
    Aes128::Key ell2_;
    BpemKeySet keys_;
    Aes128 f1_;
    Aes128 f2_;
    std::array<Block, 3> k_{};
    // First and last round keys of the four Feistel passes with the
    // whitening keys folded in; used by the AES-NI path.
    alignas(16) std::array<std::uint8_t, 8 * 16> edge_keys_{};
};

/// ECB over 32-byte blocks with PKCS#7-style padding: 1..32 bytes each equal
/// to the pad length, a full block when the input is already aligned.
/// Equal plaintext blocks give equal ciphertext blocks.
std::vector<std::uint8_t> encrypt_stream(const Em256Aes& cipher, std::span<const std::uint8_t> plaintext);
/// Throws PaddingError on a bad length or pad.
std::vector<std::uint8_t> decrypt_stream(const Em256Aes& cipher, std::span<const std::uint8_t> ciphertext);

struct KatVector {
    Aes128::Key ell1{};
    Aes128::Key ell2{};
    Em256Aes::Block k0{}, k1{}, k2{};
    Em256Aes::Block pt{}, ct{};
};

/// Lines "ell1=<hex> ell2=<hex> k0=<hex> k1=<hex> k2=<hex> pt=<hex> ct=<hex>";
/// blank lines and '#' comments are skipped.
std::vector<KatVector> read_kat_file(std::istream& in);

struct KatOutcome {
    std::size_t total = 0;
    std::vector<std::size_t> failures;  // 0-based vector indices
    bool ok() const noexcept { return failures.empty(); }
};

/// Checks encryption and decryption of each vector. Vectors with ell1 = ell2
/// and K0 = K1 = K2 run through the single-key instance.
KatOutcome verify_kats(std::span<const KatVector> vectors);

enum class BenchMode { Serial, Parallel };
std::string_view to_string(BenchMode m) noexcept;

struct ThroughputReport {
    BenchMode mode = BenchMode::Serial;
    std::size_t bytes = 0;
    double em256aes_bytes_per_second = 0.0;
    double aes_bytes_per_second = 0.0;
    /// aes / em256aes; about 2 when AES dominates the cost.
    double ratio = 0.0;
};

inline constexpr std::size_t kMinBenchBytes = std::size_t{1} << 20;

/// Times EM256AES and raw AES-128 (key ell1) over identical buffers.
/// Serial mode feeds each output into the next input (CBC-like) so block
/// latency is measured; parallel mode encrypts independent blocks spread
/// over the hardware threads. Passes alternate between the two ciphers, at
/// least `repetitions` of them and until each cipher has run for about a
/// quarter second; the best pass of each is reported.
ThroughputReport benchmark(const Em256Aes& cipher, BenchMode mode, std::size_t total_bytes, int repetitions = 5);

}  // namespace bpem
