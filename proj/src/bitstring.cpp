#include "bpem/bitstring.hpp"

#include <algorithm>
#include <stdexcept>

#include "bpem/error.hpp"

namespace bpem {

namespace {

void check_width(int width) {
    if (width < 1 || width > BitString::kMaxWidth) {
        throw std::invalid_argument("bit width " + std::to_string(width) + " outside 1..256");
    }
}

void require_same_width(const BitString& a, const BitString& b, const char* what) {
    if (a.width() != b.width()) {
        throw std::invalid_argument(std::string(what) + ": width mismatch (" + std::to_string(a.width()) +
                                    " vs " + std::to_string(b.width()) + ")");
    }
}

std::uint8_t padding_mask(int width) {
    const int used = width % 8;
    return used == 0 ? 0 : static_cast<std::uint8_t>(0xFFu >> used);
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

BitString::BitString(int width) : width_(width) { check_width(width); }

BitString BitString::zeros(int width) { return BitString(width); }

BitString BitString::from_uint(int width, std::uint64_t value) {
    check_width(width);
    if (width > 64) {
        BitString out(width);
        const std::size_t n = out.byte_size();
        // Right-align the value, then shift the whole string left so that the
        // integer's least significant bit is the last bit of the string.
        std::array<std::uint8_t, kMaxBytes + 1> tmp{};
        for (int i = 0; i < 8; ++i) tmp[n - 1 - i] = static_cast<std::uint8_t>(value >> (8 * i));
        const int shift = static_cast<int>(n * 8) - width;
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned hi = static_cast<unsigned>(tmp[i]) << shift;
            const unsigned lo = shift ? (static_cast<unsigned>(tmp[i + 1]) >> (8 - shift)) : 0u;
            out.bytes_[i] = static_cast<std::uint8_t>(hi | lo);
        }
        return out;
    }
    if (width < 64 && (value >> width) != 0) {
        throw std::invalid_argument("value does not fit in " + std::to_string(width) + " bits");
    }
    BitString out(width);
    const std::uint64_t aligned = value << (64 - width);
    for (std::size_t i = 0; i < out.byte_size(); ++i) {
        out.bytes_[i] = static_cast<std::uint8_t>(aligned >> (56 - 8 * i));
    }
    return out;
}

BitString BitString::from_bits(std::string_view bits) {
    BitString out(static_cast<int>(bits.size()));
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            out.bytes_[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
        } else if (bits[i] != '0') {
            throw FormatError("bit string contains '" + std::string(1, bits[i]) + "'");
        }
    }
    return out;
}

BitString BitString::from_bytes(int width, std::span<const std::uint8_t> bytes) {
    BitString out(width);
    if (bytes.size() != out.byte_size()) {
        throw std::invalid_argument("expected " + std::to_string(out.byte_size()) + " bytes for width " +
                                    std::to_string(width) + ", got " + std::to_string(bytes.size()));
    }
    std::copy(bytes.begin(), bytes.end(), out.bytes_.begin());
    if (out.bytes_[out.byte_size() - 1] & padding_mask(width)) {
        throw std::invalid_argument("non-zero padding bits in final byte");
    }
    return out;
}

BitString BitString::from_hex(int width, std::string_view hex) {
    check_width(width);
    const std::size_t expected = 2 * ((static_cast<std::size_t>(width) + 7) / 8);
    if (hex.size() != expected) {
        throw FormatError("expected " + std::to_string(expected) + " hex digits for width " +
                          std::to_string(width) + ", got " + std::to_string(hex.size()));
    }
    const auto bytes = hex_to_bytes(hex);
    if (bytes.back() & padding_mask(width)) {
        throw FormatError("hex value sets padding bits beyond width " + std::to_string(width));
    }
    return from_bytes(width, bytes);
}

bool BitString::bit(int index) const {
    if (index < 0 || index >= width_) throw std::out_of_range("bit index out of range");
    return (bytes_[static_cast<std::size_t>(index) / 8] >> (7 - index % 8)) & 1u;
}

std::string BitString::to_hex() const { return bpem::to_hex(bytes()); }

std::string BitString::to_bits() const {
    std::string out(static_cast<std::size_t>(width_), '0');
    for (int i = 0; i < width_; ++i) {
        if (bit(i)) out[static_cast<std::size_t>(i)] = '1';
    }
    return out;
}

std::uint64_t BitString::to_uint() const {
    if (width_ > 64) throw std::invalid_argument("to_uint needs width <= 64");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < byte_size(); ++i) acc = (acc << 8) | bytes_[i];
    return acc >> (8 * byte_size() - static_cast<std::size_t>(width_));
}

BitString& BitString::operator^=(const BitString& other) {
    require_same_width(*this, other, "xor");
    for (std::size_t i = 0; i < byte_size(); ++i) bytes_[i] ^= other.bytes_[i];
    return *this;
}

BitString operator^(BitString a, const BitString& b) {
    a ^= b;
    return a;
}

namespace {

// Copies `count` bits starting at bit `from` of `src` into a new string.
BitString extract(const BitString& src, int from, int count) {
    if (from % 8 == 0) {
        const auto bytes = src.bytes().subspan(static_cast<std::size_t>(from / 8), static_cast<std::size_t>((count + 7) / 8));
        std::array<std::uint8_t, BitString::kMaxBytes> buf{};
        std::copy(bytes.begin(), bytes.end(), buf.begin());
        buf[bytes.size() - 1] &= static_cast<std::uint8_t>(~padding_mask(count));
        return BitString::from_bytes(count, std::span(buf.data(), bytes.size()));
    }
    std::array<std::uint8_t, BitString::kMaxBytes> buf{};
    for (int i = 0; i < count; ++i) {
        if (src.bit(from + i)) buf[static_cast<std::size_t>(i) / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
    return BitString::from_bytes(count, std::span(buf.data(), static_cast<std::size_t>((count + 7) / 8)));
}

}  // namespace

BitString left_half(const BitString& w) {
    if (w.width() % 2 != 0) throw std::invalid_argument("split: odd width " + std::to_string(w.width()));
    return extract(w, 0, w.width() / 2);
}

BitString right_half(const BitString& w) {
    if (w.width() % 2 != 0) throw std::invalid_argument("split: odd width " + std::to_string(w.width()));
    return extract(w, w.width() / 2, w.width() / 2);
}

std::pair<BitString, BitString> split(const BitString& w) { return {left_half(w), right_half(w)}; }

BitString concat(const BitString& left, const BitString& right) {
    require_same_width(left, right, "concat");
    const int half = left.width();
    if (2 * half > BitString::kMaxWidth) throw std::invalid_argument("concat: result wider than 256 bits");
    std::array<std::uint8_t, BitString::kMaxBytes> buf{};
    const auto lb = left.bytes();
    std::copy(lb.begin(), lb.end(), buf.begin());
    if (half % 8 == 0) {
        const auto rb = right.bytes();
        std::copy(rb.begin(), rb.end(), buf.begin() + static_cast<std::ptrdiff_t>(lb.size()));
    } else {
        for (int i = 0; i < half; ++i) {
            const int pos = half + i;
            if (right.bit(i)) buf[static_cast<std::size_t>(pos) / 8] |= static_cast<std::uint8_t>(0x80u >> (pos % 8));
        }
    }
    return BitString::from_bytes(2 * half, std::span(buf.data(), static_cast<std::size_t>((2 * half + 7) / 8)));
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (const auto b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0xF]);
    }
    return out;
}

std::vector<std::uint8_t> hex_to_bytes(std::string_view hex) {
    if (hex.size() % 2 != 0) throw FormatError("hex string has odd length");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw FormatError("invalid hex digit in '" + std::string(hex) + "'");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

}  // namespace bpem

std::size_t std::hash<bpem::BitString>::operator()(const bpem::BitString& w) const noexcept {
    // FNV-1a over width and canonical bytes.
    std::uint64_t h = 0xcbf29ce484222325ull ^ static_cast<std::uint64_t>(w.width());
    for (const auto b : w.bytes()) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
}
