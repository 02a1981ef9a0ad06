#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace bpem {

/// AES-128 block cipher with expanded round keys held by value.
///
/// Uses AES-NI when the CPU has it, otherwise a byte-oriented FIPS-197
/// implementation. The portable path is not constant-time.
class Aes128 {
public:
    static constexpr std::size_t kBlockBytes = 16;
    using Block = std::array<std::uint8_t, kBlockBytes>;
    using Key = std::array<std::uint8_t, 16>;

    enum class Backend { Auto, Portable, AesNi };

    explicit Aes128(const Key& key, Backend backend = Backend::Auto);

    static bool hardware_available() noexcept;

    Backend backend() const noexcept { return backend_; }

    void encrypt_block(const std::uint8_t* in, std::uint8_t* out) const noexcept;
    void decrypt_block(const std::uint8_t* in, std::uint8_t* out) const noexcept;
    Block encrypt(const Block& in) const noexcept {
        Block out;
        encrypt_block(in.data(), out.data());
        return out;
    }
    Block decrypt(const Block& in) const noexcept {
        Block out;
        decrypt_block(in.data(), out.data());
        return out;
    }

    /// Encrypts independent blocks; the hardware path keeps eight in flight.
    /// `in` and `out` may alias exactly. Sizes must be a multiple of 16.
    void encrypt_blocks(std::span<const std::uint8_t> in, std::span<std::uint8_t> out) const;
    /// CBC with a zero IV, in place: each block is XORed with the previous
    /// ciphertext block before encryption. Serial benchmark baseline.
    void encrypt_chained(std::span<std::uint8_t> data) const;

    /// Expanded encryption round keys, 11 x 16 bytes, 16-byte aligned.
    const std::uint8_t* round_keys() const noexcept { return enc_keys_.data(); }

private:
    Backend backend_;
    alignas(16) std::array<std::uint8_t, 176> enc_keys_{};
    alignas(16) std::array<std::uint8_t, 176> dec_keys_{};  // AES-NI only: InvMixColumns applied
};

}  // namespace bpem
