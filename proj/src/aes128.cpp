#include "bpem/aes128.hpp"

#include <cstring>
#include <stdexcept>

#include "aes_ni.hpp"

namespace bpem {

namespace {

constexpr std::uint8_t xtime(std::uint8_t x) {
    return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1B : 0x00));
}

constexpr std::uint8_t gmul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t p = 0;
    while (b) {
        if (b & 1) p ^= a;
        a = xtime(a);
        b >>= 1;
    }
    return p;
}

constexpr std::uint8_t rotl8(std::uint8_t x, int s) {
    return static_cast<std::uint8_t>((x << s) | (x >> (8 - s)));
}

struct SBoxes {
    std::array<std::uint8_t, 256> fwd{};
    std::array<std::uint8_t, 256> inv{};
};

constexpr SBoxes make_sboxes() {
    SBoxes t;
    for (int x = 0; x < 256; ++x) {
        std::uint8_t inv = 0;
        if (x != 0) {
            for (int y = 1; y < 256; ++y) {
                if (gmul(static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)) == 1) {
                    inv = static_cast<std::uint8_t>(y);
                    break;
                }
            }
        }
        const auto s = static_cast<std::uint8_t>(inv ^ rotl8(inv, 1) ^ rotl8(inv, 2) ^ rotl8(inv, 3) ^
                                                 rotl8(inv, 4) ^ 0x63);
        t.fwd[static_cast<std::size_t>(x)] = s;
        t.inv[s] = static_cast<std::uint8_t>(x);
    }
    return t;
}

constexpr SBoxes kSBoxes = make_sboxes();
static_assert(kSBoxes.fwd[0x00] == 0x63 && kSBoxes.fwd[0x53] == 0xED);

void expand_key_portable(const Aes128::Key& key, std::uint8_t* rk) {
    std::memcpy(rk, key.data(), 16);
    std::uint8_t rcon = 0x01;
    for (int i = 4; i < 44; ++i) {
        std::uint8_t t[4];
        std::memcpy(t, rk + 4 * (i - 1), 4);
        if (i % 4 == 0) {
            const std::uint8_t first = t[0];
            t[0] = static_cast<std::uint8_t>(kSBoxes.fwd[t[1]] ^ rcon);
            t[1] = kSBoxes.fwd[t[2]];
            t[2] = kSBoxes.fwd[t[3]];
            t[3] = kSBoxes.fwd[first];
            rcon = xtime(rcon);
        }
        for (int j = 0; j < 4; ++j) rk[4 * i + j] = static_cast<std::uint8_t>(rk[4 * (i - 4) + j] ^ t[j]);
    }
}

void add_round_key(std::uint8_t* s, const std::uint8_t* rk) {
    for (int i = 0; i < 16; ++i) s[i] ^= rk[i];
}

// State byte (row r, column c) lives at index r + 4c.
void shift_rows(std::uint8_t* s, bool inverse) {
    std::uint8_t t[16];
    for (int c = 0; c < 4; ++c) {
        for (int r = 0; r < 4; ++r) {
            const int src = inverse ? (c - r + 4) % 4 : (c + r) % 4;
            t[r + 4 * c] = s[r + 4 * src];
        }
    }
    std::memcpy(s, t, 16);
}

void mix_columns(std::uint8_t* s, bool inverse) {
    const std::uint8_t m0 = inverse ? 14 : 2;
    const std::uint8_t m1 = inverse ? 11 : 3;
    const std::uint8_t m2 = inverse ? 13 : 1;
    const std::uint8_t m3 = inverse ? 9 : 1;
    for (int c = 0; c < 4; ++c) {
        std::uint8_t* col = s + 4 * c;
        const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        col[0] = gmul(a0, m0) ^ gmul(a1, m1) ^ gmul(a2, m2) ^ gmul(a3, m3);
        col[1] = gmul(a0, m3) ^ gmul(a1, m0) ^ gmul(a2, m1) ^ gmul(a3, m2);
        col[2] = gmul(a0, m2) ^ gmul(a1, m3) ^ gmul(a2, m0) ^ gmul(a3, m1);
        col[3] = gmul(a0, m1) ^ gmul(a1, m2) ^ gmul(a2, m3) ^ gmul(a3, m0);
    }
}

void encrypt_portable(const std::uint8_t* rk, const std::uint8_t* in, std::uint8_t* out) {
    std::uint8_t s[16];
    std::memcpy(s, in, 16);
    add_round_key(s, rk);
    for (int round = 1; round <= 10; ++round) {
        for (auto& b : s) b = kSBoxes.fwd[b];
        shift_rows(s, false);
        if (round != 10) mix_columns(s, false);
        add_round_key(s, rk + 16 * round);
    }
    std::memcpy(out, s, 16);
}

void decrypt_portable(const std::uint8_t* rk, const std::uint8_t* in, std::uint8_t* out) {
    std::uint8_t s[16];
    std::memcpy(s, in, 16);
    add_round_key(s, rk + 160);
    for (int round = 9; round >= 0; --round) {
        shift_rows(s, true);
        for (auto& b : s) b = kSBoxes.inv[b];
        add_round_key(s, rk + 16 * round);
        if (round != 0) mix_columns(s, true);
    }
    std::memcpy(out, s, 16);
}

#ifdef BPEM_HAVE_X86

template <int Rcon>
BPEM_AESNI __m128i expand_step(__m128i key) {
    __m128i t = _mm_aeskeygenassist_si128(key, Rcon);
    t = _mm_shuffle_epi32(t, 0xFF);
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    key = _mm_xor_si128(key, _mm_slli_si128(key, 4));
    return _mm_xor_si128(key, t);
}

BPEM_AESNI void expand_key_ni(const Aes128::Key& key, std::uint8_t* enc, std::uint8_t* dec) {
    __m128i k[11];
    k[0] = _mm_loadu_si128(reinterpret_cast<const __m128i*>(key.data()));
    k[1] = expand_step<0x01>(k[0]);
    k[2] = expand_step<0x02>(k[1]);
    k[3] = expand_step<0x04>(k[2]);
    k[4] = expand_step<0x08>(k[3]);
    k[5] = expand_step<0x10>(k[4]);
    k[6] = expand_step<0x20>(k[5]);
    k[7] = expand_step<0x40>(k[6]);
    k[8] = expand_step<0x80>(k[7]);
    k[9] = expand_step<0x1B>(k[8]);
    k[10] = expand_step<0x36>(k[9]);
    for (int i = 0; i < 11; ++i) _mm_store_si128(reinterpret_cast<__m128i*>(enc + 16 * i), k[i]);
    // Equivalent inverse cipher: reversed order, InvMixColumns on the middle keys.
    _mm_store_si128(reinterpret_cast<__m128i*>(dec), k[10]);
    for (int i = 1; i < 10; ++i) {
        _mm_store_si128(reinterpret_cast<__m128i*>(dec + 16 * i), _mm_aesimc_si128(k[10 - i]));
    }
    _mm_store_si128(reinterpret_cast<__m128i*>(dec + 160), k[0]);
}

BPEM_AESNI void encrypt_ni(const std::uint8_t* rk, const std::uint8_t* in, std::uint8_t* out) {
    ni::store(out, ni::encrypt(ni::load(in), rk));
}

BPEM_AESNI void decrypt_ni(const std::uint8_t* rk, const std::uint8_t* in, std::uint8_t* out) {
    const auto* k = reinterpret_cast<const __m128i*>(rk);
    __m128i s = _mm_xor_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(in)), _mm_load_si128(k));
    for (int i = 1; i < 10; ++i) s = _mm_aesdec_si128(s, _mm_load_si128(k + i));
    s = _mm_aesdeclast_si128(s, _mm_load_si128(k + 10));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out), s);
}

BPEM_AESNI void encrypt8_ni(const std::uint8_t* rk, const std::uint8_t* in, std::uint8_t* out) {
    __m128i s[8];
    for (int j = 0; j < 8; ++j) s[j] = ni::load(in + 16 * j);
    ni::encrypt_n<8>(s, rk);
    for (int j = 0; j < 8; ++j) ni::store(out + 16 * j, s[j]);
}

BPEM_AESNI void encrypt_chained_ni(const std::uint8_t* rk, std::uint8_t* data, std::size_t size) {
    __m128i prev = _mm_setzero_si128();
    for (std::size_t off = 0; off < size; off += 16) {
        prev = ni::encrypt(_mm_xor_si128(ni::load(data + off), prev), rk);
        ni::store(data + off, prev);
    }
}

#endif

}  // namespace

bool Aes128::hardware_available() noexcept {
#ifdef BPEM_HAVE_X86
    return __builtin_cpu_supports("aes") && __builtin_cpu_supports("sse2");
#else
    return false;
#endif
}

Aes128::Aes128(const Key& key, Backend backend) : backend_(backend) {
    if (backend_ == Backend::Auto) backend_ = hardware_available() ? Backend::AesNi : Backend::Portable;
    if (backend_ == Backend::AesNi) {
        if (!hardware_available()) throw std::invalid_argument("AES-NI requested but not available");
#ifdef BPEM_HAVE_X86
        expand_key_ni(key, enc_keys_.data(), dec_keys_.data());
#endif
    } else {
        expand_key_portable(key, enc_keys_.data());
    }
}

void Aes128::encrypt_block(const std::uint8_t* in, std::uint8_t* out) const noexcept {
#ifdef BPEM_HAVE_X86
    if (backend_ == Backend::AesNi) return encrypt_ni(enc_keys_.data(), in, out);
#endif
    encrypt_portable(enc_keys_.data(), in, out);
}

void Aes128::decrypt_block(const std::uint8_t* in, std::uint8_t* out) const noexcept {
#ifdef BPEM_HAVE_X86
    if (backend_ == Backend::AesNi) return decrypt_ni(dec_keys_.data(), in, out);
#endif
    decrypt_portable(enc_keys_.data(), in, out);
}

void Aes128::encrypt_blocks(std::span<const std::uint8_t> in, std::span<std::uint8_t> out) const {
    if (in.size() != out.size() || in.size() % kBlockBytes != 0) {
        throw std::invalid_argument("Aes128::encrypt_blocks: sizes must match and be a multiple of 16");
    }
    std::size_t off = 0;
#ifdef BPEM_HAVE_X86
    if (backend_ == Backend::AesNi) {
        for (; off + 8 * kBlockBytes <= in.size(); off += 8 * kBlockBytes) {
            encrypt8_ni(enc_keys_.data(), in.data() + off, out.data() + off);
        }
    }
#endif
    for (; off < in.size(); off += kBlockBytes) encrypt_block(in.data() + off, out.data() + off);
}

void Aes128::encrypt_chained(std::span<std::uint8_t> data) const {
    if (data.size() % kBlockBytes != 0) throw std::invalid_argument("Aes128::encrypt_chained: size must be a multiple of 16");
#ifdef BPEM_HAVE_X86
    if (backend_ == Backend::AesNi) return encrypt_chained_ni(enc_keys_.data(), data.data(), data.size());
#endif
    std::uint8_t prev[kBlockBytes] = {};
    for (std::size_t off = 0; off < data.size(); off += kBlockBytes) {
        std::uint8_t* b = data.data() + off;
        for (std::size_t i = 0; i < kBlockBytes; ++i) b[i] ^= prev[i];
        encrypt_block(b, b);
        std::memcpy(prev, b, kBlockBytes);
    }
}

}  // namespace bpem
