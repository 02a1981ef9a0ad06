#include "bpem/rng.hpp"

#include <array>

namespace bpem {

BitString Rng::bits(int width) {
    auto w = BitString::zeros(width);  // validates width
    std::array<std::uint8_t, BitString::kMaxBytes> buf{};
    const auto n = w.byte_size();
    fill(std::span(buf.data(), n));
    if (width % 8 != 0) buf[n - 1] &= static_cast<std::uint8_t>(0xFFu << (8 - width % 8));
    return BitString::from_bytes(width, std::span(buf.data(), n));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    std::uint64_t z = parent + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace bpem
