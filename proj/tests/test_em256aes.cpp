#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bpem/em256aes.hpp"
#include "bpem/error.hpp"
#include "reference_em256aes.hpp"

using bpem::BitString;
using bpem::Em256Aes;

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> random_bytes(bpem::Rng& rng) {
    std::array<std::uint8_t, N> a{};
    rng.fill(a);
    return a;
}

BitString bits256(const Em256Aes::Block& b) { return BitString::from_bytes(256, b); }

struct RandomInstance {
    bpem::Aes128::Key ell1, ell2;
    Em256Aes::Block k0, k1, k2;
};

RandomInstance random_instance(bpem::Rng& rng) {
    return {random_bytes<16>(rng), random_bytes<16>(rng), random_bytes<32>(rng), random_bytes<32>(rng),
            random_bytes<32>(rng)};
}

}  // namespace

TEST_CASE("KAT-0 is pinned") {
    const Em256Aes::Block zero{};
    const auto c = Em256Aes::general({}, {}, zero, zero, zero).encrypt_block(zero);
    CHECK(bpem::to_hex(c) == "c7e5bdb9e057df7bdb3c4ee647c1949d1af83b152d5ff28e3509564b3028de91");
    CHECK(reference::em256aes_encrypt({}, {}, zero, zero, zero, zero) == c);
    CHECK(Em256Aes::single_key({}, zero).encrypt_block(zero) == c);
}

TEST_CASE("shipped KAT file verifies") {
    std::ifstream in(BPEM_TEST_DATA_DIR "/em256aes_kat.txt");
    REQUIRE(in);
    const auto vectors = bpem::read_kat_file(in);
    CHECK(vectors.size() >= 8);
    const auto outcome = bpem::verify_kats(vectors);
    CHECK(outcome.total == vectors.size());
    CHECK(outcome.ok());

    auto broken = vectors;
    broken[3].ct[0] ^= 1;
    const auto bad = bpem::verify_kats(broken);
    CHECK(bad.failures == std::vector<std::size_t>{3});

    const bool has_single = std::any_of(vectors.begin(), vectors.end(), [](const auto& v) {
        return v.ell1 == v.ell2 && v.k0 == v.k1 && v.k1 == v.k2 && v.k0 != Em256Aes::Block{};
    });
    CHECK(has_single);
}

TEST_CASE("KAT parser errors") {
    const char* bad[] = {
        "ell1=00 ell2=00\n",
        "ell1=00000000000000000000000000000000 ell2=00000000000000000000000000000000 k0=00 k1=00 k2=00 pt=00 ct=00\n",
        "garbage\n",
    };
    for (const char* text : bad) {
        std::istringstream in(text);
        CHECK_THROWS_AS(bpem::read_kat_file(in), bpem::FormatError);
    }
}

TEST_CASE("library matches the reference on random instances") {
    bpem::Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const auto r = random_instance(rng);
        const auto pt = random_bytes<32>(rng);
        const auto ours = Em256Aes::general(r.ell1, r.ell2, r.k0, r.k1, r.k2).encrypt_block(pt);
        REQUIRE(ours == reference::em256aes_encrypt(r.ell1, r.ell2, r.k0, r.k1, r.k2, pt));
    }
    for (int i = 0; i < 50; ++i) {
        const auto ell = random_bytes<16>(rng);
        const auto k = random_bytes<32>(rng);
        const auto pt = random_bytes<32>(rng);
        REQUIRE(Em256Aes::single_key(ell, k).encrypt_block(pt) == reference::em256aes_encrypt(ell, ell, k, k, k, pt));
    }
}

TEST_CASE("portable and hardware AES give the same cipher") {
    bpem::Rng rng(22);
    const auto r = random_instance(rng);
    const bpem::BpemKeySet ks(bpem::BpemVariant::ThreeKeyTwoPerm, {bits256(r.k0), bits256(r.k1), bits256(r.k2)});
    const Em256Aes portable(r.ell1, r.ell2, ks, bpem::Aes128::Backend::Portable);
    const Em256Aes fast(r.ell1, r.ell2, ks);
    std::vector<std::uint8_t> a(32 * 37);
    rng.fill(a);
    auto b = a;
    const auto orig = a;
    portable.encrypt_blocks(a);
    fast.encrypt_blocks(b);
    CHECK(a == b);
    fast.decrypt_blocks(a);
    portable.decrypt_blocks(b);
    CHECK(a == orig);
    CHECK(b == orig);
    for (int i = 0; i < 100; ++i) {
        const auto x = random_bytes<32>(rng);
        REQUIRE(portable.encrypt_block(x) == fast.encrypt_block(x));
        REQUIRE(portable.decrypt_block(x) == fast.decrypt_block(x));
    }
    auto chain_a = orig, chain_b = orig;
    portable.encrypt_chained(chain_a);
    fast.encrypt_chained(chain_b);
    CHECK(chain_a == chain_b);
    // Chaining: block i is encrypted after XOR with ciphertext block i-1.
    Em256Aes::Block prev{}, x{};
    std::copy_n(orig.begin() + 32, 32, x.begin());
    std::copy_n(chain_a.begin(), 32, prev.begin());
    for (std::size_t j = 0; j < 32; ++j) x[j] ^= prev[j];
    CHECK(std::equal(chain_a.begin() + 32, chain_a.begin() + 64, fast.encrypt_block(x).begin()));

    bpem::Aes128 aes_p(r.ell1, bpem::Aes128::Backend::Portable), aes_f(r.ell1);
    auto ca = orig, cb = orig;
    aes_p.encrypt_chained(ca);
    aes_f.encrypt_chained(cb);
    CHECK(ca == cb);
}

TEST_CASE("block round trip") {
    bpem::Rng rng(23);
    const auto r = random_instance(rng);
    const auto c = Em256Aes::general(r.ell1, r.ell2, r.k0, r.k1, r.k2);
    CHECK(c.mode() == Em256Aes::Mode::General);
    for (int i = 0; i < 10000; ++i) {
        const auto x = random_bytes<32>(rng);
        REQUIRE(c.decrypt_block(c.encrypt_block(x)) == x);
    }
    const auto x = rng.bits(256);
    CHECK(c.decrypt_block(c.encrypt_block(x)) == x);
    CHECK_THROWS_AS(c.encrypt_block(rng.bits(128)), std::invalid_argument);

    std::vector<std::uint8_t> buf(32 * 19);
    rng.fill(buf);
    const auto orig = buf;
    c.encrypt_blocks(buf);
    for (std::size_t off = 0; off < buf.size(); off += 32) {
        Em256Aes::Block in{}, out{};
        std::copy_n(orig.begin() + static_cast<std::ptrdiff_t>(off), 32, in.begin());
        std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(off), 32, out.begin());
        REQUIRE(c.encrypt_block(in) == out);
    }
    c.decrypt_blocks(buf);
    CHECK(buf == orig);
    std::vector<std::uint8_t> ragged(33);
    CHECK_THROWS_AS(c.encrypt_blocks(ragged), std::invalid_argument);
}

TEST_CASE("concrete cipher is plain BPEM with AES round functions") {
    bpem::Rng rng(24);
    for (int i = 0; i < 1000; ++i) {
        const auto r = random_instance(rng);
        const auto c = Em256Aes::general(r.ell1, r.ell2, r.k0, r.k1, r.k2);
        const auto f1 = bpem::aes_permutation(BitString::from_bytes(128, r.ell1));
        const auto f2 = bpem::aes_permutation(BitString::from_bytes(128, r.ell2));
        const auto m = rng.bits(256);
        const auto expect = bpem::bpem_encrypt(c.key_set(), f1, f2, m);
        REQUIRE(c.encrypt_block(m) == expect);
        REQUIRE(bpem::bpem_via_lr(bpem::derive_lr_keys(c.key_set()), f1, f2, m) == expect);
    }
}

TEST_CASE("single-key mode") {
    bpem::Rng rng(25);
    const auto ell = random_bytes<16>(rng);
    const auto k = random_bytes<32>(rng);
    const auto s = Em256Aes::single_key(ell, k);
    CHECK(s.mode() == Em256Aes::Mode::SingleKey);
    CHECK(s.ell1() == s.ell2());
    CHECK(s.key_set().stored().size() == 1);
    const auto g = Em256Aes::general(ell, ell, k, k, k);
    const auto f = bpem::aes_permutation(BitString::from_bytes(128, ell));
    for (int i = 0; i < 100; ++i) {
        const auto m = rng.bits(256);
        REQUIRE(s.encrypt_block(m) == g.encrypt_block(m));
        REQUIRE(bpem::bpem_via_lr(bpem::derive_single_key_lr_keys(s.key_set()), f, f, m) == s.encrypt_block(m));
    }
    CHECK_THROWS_AS(Em256Aes({}, {}, bpem::BpemKeySet(bpem::BpemVariant::OneKeyOnePerm, {BitString::zeros(16)})),
                    std::invalid_argument);
}

TEST_CASE("key file instances") {
    bpem::Rng rng(26);
    bpem::KeyFile kf{bpem::BpemKeySet::random(bpem::BpemVariant::ThreeKeyTwoPerm, 128, rng), {}};
    CHECK_THROWS_AS(Em256Aes::from_key_file(kf), std::invalid_argument);
    kf.perm_keys = {rng.bits(128), rng.bits(128)};
    const auto c = Em256Aes::from_key_file(kf);
    const auto m = rng.bits(256);
    CHECK(c.encrypt_block(m) == bpem::bpem_encrypt(kf.keys, bpem::aes_permutation(kf.perm_keys[0]),
                                                   bpem::aes_permutation(kf.perm_keys[1]), m));
}

TEST_CASE("stream mode") {
    bpem::Rng rng(27);
    const auto r = random_instance(rng);
    const auto c = Em256Aes::general(r.ell1, r.ell2, r.k0, r.k1, r.k2);

    const auto empty = bpem::encrypt_stream(c, {});
    REQUIRE(empty.size() == 32);
    Em256Aes::Block pad_block;
    pad_block.fill(0x20);
    CHECK(std::equal(empty.begin(), empty.end(), c.encrypt_block(pad_block).begin()));
    CHECK(bpem::decrypt_stream(c, empty).empty());

    for (std::size_t len = 0; len <= 100; ++len) {
        std::vector<std::uint8_t> pt(len);
        rng.fill(pt);
        const auto ct = bpem::encrypt_stream(c, pt);
        REQUIRE(ct.size() == (len / 32 + 1) * 32);
        REQUIRE(bpem::decrypt_stream(c, ct) == pt);
    }
    std::vector<std::uint8_t> pt31(31, 7);
    CHECK(bpem::encrypt_stream(c, pt31).size() == 32);

    // Aligned input: block path output followed by the encrypted pad block.
    std::vector<std::uint8_t> two(64);
    rng.fill(two);
    std::copy_n(two.begin(), 32, two.begin() + 32);
    const auto ct = bpem::encrypt_stream(c, two);
    REQUIRE(ct.size() == 96);
    CHECK(std::equal(ct.begin(), ct.begin() + 32, ct.begin() + 32));
    auto blocks = two;
    c.encrypt_blocks(blocks);
    CHECK(std::equal(blocks.begin(), blocks.end(), ct.begin()));
    CHECK(std::equal(empty.begin(), empty.end(), ct.begin() + 64));

    CHECK_THROWS_AS(bpem::decrypt_stream(c, std::vector<std::uint8_t>(31)), bpem::PaddingError);
    CHECK_THROWS_AS(bpem::decrypt_stream(c, std::vector<std::uint8_t>{}), bpem::PaddingError);
    Em256Aes::Block bad{};
    bad[31] = 0;
    auto enc = c.encrypt_block(bad);
    CHECK_THROWS_AS(bpem::decrypt_stream(c, enc), bpem::PaddingError);
    bad[31] = 33;
    enc = c.encrypt_block(bad);
    CHECK_THROWS_AS(bpem::decrypt_stream(c, enc), bpem::PaddingError);
    bad.fill(4);
    bad[29] = 5;
    enc = c.encrypt_block(bad);
    CHECK_THROWS_AS(bpem::decrypt_stream(c, enc), bpem::PaddingError);
}

TEST_CASE("benchmark preconditions and shape") {
    const auto c = Em256Aes::single_key({}, {});
    CHECK_THROWS_AS(bpem::benchmark(c, bpem::BenchMode::Serial, 1000), std::invalid_argument);
    CHECK_THROWS_AS(bpem::benchmark(c, bpem::BenchMode::Serial, bpem::kMinBenchBytes, 0), std::invalid_argument);
    const auto r = bpem::benchmark(c, bpem::BenchMode::Parallel, bpem::kMinBenchBytes, 1);
    CHECK(r.mode == bpem::BenchMode::Parallel);
    CHECK(r.bytes == bpem::kMinBenchBytes);
    CHECK(r.em256aes_bytes_per_second > 0);
    CHECK(r.aes_bytes_per_second > 0);
    CHECK(r.ratio == doctest::Approx(r.aes_bytes_per_second / r.em256aes_bytes_per_second));
    CHECK(bpem::to_string(bpem::BenchMode::Serial) == "serial");
    CHECK(bpem::to_string(bpem::BenchMode::Parallel) == "parallel");
}

TEST_CASE("benchmark properties") {
    bpem::Rng rng(28);
    const auto r = random_instance(rng);
    const auto c = Em256Aes::general(r.ell1, r.ell2, r.k0, r.k1, r.k2);
    const auto serial = bpem::benchmark(c, bpem::BenchMode::Serial, std::size_t{2} << 20);
    const auto parallel = bpem::benchmark(c, bpem::BenchMode::Parallel, std::size_t{2} << 20);
    const auto parallel_big = bpem::benchmark(c, bpem::BenchMode::Parallel, std::size_t{4} << 20);
    MESSAGE("serial ratio " << serial.ratio << ", parallel ratio " << parallel.ratio);

    CHECK(parallel.em256aes_bytes_per_second >= serial.em256aes_bytes_per_second);
    const double drift = parallel_big.em256aes_bytes_per_second / parallel.em256aes_bytes_per_second;
    CHECK(std::abs(drift - 1.0) < 0.15);
    if (bpem::Aes128::hardware_available()) {
        CHECK(serial.ratio >= 1.6);
        CHECK(serial.ratio <= 3.0);
        CHECK(parallel.ratio >= 1.6);
        CHECK(parallel.ratio <= 3.0);
    } else {
        MESSAGE("no AES acceleration: throughput ratio is informational only");
    }
}
