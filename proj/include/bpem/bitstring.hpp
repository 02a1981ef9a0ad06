#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bpem {

/// Fixed-width bit vector of 1..256 bits.
///
/// Bit 0 is the most significant bit of the first byte of the canonical
/// encoding. Widths that are not a multiple of 8 leave the low bits of the
/// final byte zero; every constructor enforces that.
///
/// When a width fits in 64 bits the string also has an integer value whose
/// most significant bit is bit 0, so "1101" has value 13.
class BitString {
public:
    static constexpr int kMaxWidth = 256;
    static constexpr std::size_t kMaxBytes = kMaxWidth / 8;

    static BitString zeros(int width);
    /// Low `width` bits of `value`; throws if value does not fit.
    static BitString from_uint(int width, std::uint64_t value);
    /// Parses a string of '0'/'1' characters; width is the string length.
    static BitString from_bits(std::string_view bits);
    /// Canonical encoding: exactly ceil(width/8) bytes, padding bits zero.
    static BitString from_bytes(int width, std::span<const std::uint8_t> bytes);
    static BitString from_hex(int width, std::string_view hex);

    int width() const noexcept { return width_; }
    std::size_t byte_size() const noexcept { return (static_cast<std::size_t>(width_) + 7) / 8; }

    bool bit(int index) const;

    std::span<const std::uint8_t> bytes() const noexcept { return {bytes_.data(), byte_size()}; }
    std::string to_hex() const;
    std::string to_bits() const;
    /// Requires width <= 64.
    std::uint64_t to_uint() const;

    BitString& operator^=(const BitString& other);

    friend bool operator==(const BitString&, const BitString&) = default;
    friend std::strong_ordering operator<=>(const BitString&, const BitString&) = default;

private:
    BitString(int width);

    // width_ before bytes_ so ordering groups by width first.
    int width_ = 0;
    std::array<std::uint8_t, kMaxBytes> bytes_{};
};

BitString operator^(BitString a, const BitString& b);

/// ω_L: the first half of an even-width string.
BitString left_half(const BitString& w);
/// ω_R: the second half of an even-width string.
BitString right_half(const BitString& w);
std::pair<BitString, BitString> split(const BitString& w);
/// a * b. Both halves must have the same width.
BitString concat(const BitString& left, const BitString& right);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Lowercase or uppercase hex, even length, no separators.
std::vector<std::uint8_t> hex_to_bytes(std::string_view hex);

}  // namespace bpem

template <>
struct std::hash<bpem::BitString> {
    std::size_t operator()(const bpem::BitString& w) const noexcept;
};
