#pragma once

// AES-NI building blocks shared by the AES and EM256AES translation units.
// Everything here is compiled for the aes target only and must be reached
// through a runtime check of Aes128::hardware_available().

#if defined(__x86_64__) || defined(__i386__)
#define BPEM_HAVE_X86 1
#include <immintrin.h>

#include <cstdint>

#define BPEM_AESNI __attribute__((target("aes,sse2")))

namespace bpem::ni {

BPEM_AESNI inline __m128i load(const std::uint8_t* p) { return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p)); }
BPEM_AESNI inline void store(std::uint8_t* p, __m128i v) { _mm_storeu_si128(reinterpret_cast<__m128i*>(p), v); }

// rk: 11 round keys, 16-byte aligned.
BPEM_AESNI inline __m128i encrypt(__m128i s, const std::uint8_t* rk) {
    const auto* k = reinterpret_cast<const __m128i*>(rk);
    s = _mm_xor_si128(s, _mm_load_si128(k));
    for (int i = 1; i < 10; ++i) s = _mm_aesenc_si128(s, _mm_load_si128(k + i));
    return _mm_aesenclast_si128(s, _mm_load_si128(k + 10));
}

template <int N>
BPEM_AESNI inline void encrypt_n(__m128i* s, const std::uint8_t* rk) {
    const auto* k = reinterpret_cast<const __m128i*>(rk);
    const __m128i k0 = _mm_load_si128(k);
    for (int j = 0; j < N; ++j) s[j] = _mm_xor_si128(s[j], k0);
    for (int i = 1; i < 10; ++i) {
        const __m128i ki = _mm_load_si128(k + i);
        for (int j = 0; j < N; ++j) s[j] = _mm_aesenc_si128(s[j], ki);
    }
    const __m128i k10 = _mm_load_si128(k + 10);
    for (int j = 0; j < N; ++j) s[j] = _mm_aesenclast_si128(s[j], k10);
}

}  // namespace bpem::ni

#endif
