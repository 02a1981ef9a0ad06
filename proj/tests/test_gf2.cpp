#include <doctest.h>

#include <string>
#include <vector>

#include "bpem/gf2.hpp"
#include "bpem/rng.hpp"

using bpem::Gf2Matrix;

namespace {

// Row-by-row dot product written out from the characters; independent of
// the packed representation.
std::string matvec_by_hand(const std::vector<std::string>& rows, const std::string& x) {
    std::string y;
    for (const auto& row : rows) {
        int acc = 0;
        for (std::size_t j = 0; j < x.size(); ++j) acc ^= (row[j] - '0') & (x[j] - '0');
        y += static_cast<char>('0' + acc);
    }
    return y;
}

}  // namespace

TEST_CASE("matrix-vector product agrees with the hand oracle") {
    const std::vector<std::string> rows = {"110", "011", "100"};
    CHECK(matvec_by_hand(rows, "101") == "111");
    const auto a = Gf2Matrix::from_rows({"110", "011", "100"});
    CHECK(a.apply(bpem::BitString::from_bits("101")).to_bits() == "111");
    CHECK(a == Gf2Matrix::shifted_bidiagonal(3));
}

TEST_CASE("rank, inverse and singularity") {
    CHECK(Gf2Matrix::identity(5).is_invertible());
    CHECK_FALSE(Gf2Matrix(3, 3).is_invertible());
    CHECK_FALSE(Gf2Matrix::from_rows({"110", "011", "101"}).is_invertible());
    for (int n = 2; n <= 12; ++n) {
        const auto a = Gf2Matrix::shifted_bidiagonal(n);
        REQUIRE(a.is_invertible());
        CHECK((a + Gf2Matrix::identity(n)).is_invertible());
        const auto inv = a.inverse();
        REQUIRE(inv.has_value());
        CHECK(a * *inv == Gf2Matrix::identity(n));
    }
}

TEST_CASE("apply_blocks is the matrix acting on vectors of strings") {
    const auto m = Gf2Matrix::from_rows({"10", "11", "01"});
    const auto a = bpem::BitString::from_bits("1010");
    const auto b = bpem::BitString::from_bits("0110");
    const std::vector<bpem::BitString> in = {a, b};
    const auto out = m.apply_blocks(in);
    REQUIRE(out.size() == 3);
    CHECK(out[0] == a);
    CHECK(out[1] == (a ^ b));
    CHECK(out[2] == b);
}

TEST_CASE("GF(2^n) arithmetic") {
    namespace g = bpem::gf2n;
    // x * (x^2 + x) = x^3 + x^2 = x^2 + x + 1 mod x^3 + x + 1
    CHECK(g::multiply(0b010, 0b110, 0b1011, 3) == 0b111);
    // AES field: {57} * {83} = {c1}
    CHECK(g::multiply(0x57, 0x83, 0x11B, 8) == 0xC1);
    for (int n = 2; n <= 16; ++n) {
        const auto p = g::default_polynomial(n);
        CHECK(g::is_irreducible(p));
        for (std::uint64_t a : {std::uint64_t{2}, std::uint64_t{3}, (std::uint64_t{1} << n) - 1}) {
            CHECK(g::multiply(a, g::inverse(a, p, n), p, n) == 1);
        }
    }
    CHECK_FALSE(g::is_irreducible(0b101));    // x^2 + 1 = (x + 1)^2
    CHECK_FALSE(g::is_irreducible(0b10101));  // x^4 + x^2 + 1 = (x^2 + x + 1)^2
    CHECK(g::is_irreducible(0b11111));        // x^4 + x^3 + x^2 + x + 1
}
