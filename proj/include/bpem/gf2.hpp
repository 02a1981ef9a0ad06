#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bpem/bitstring.hpp"

namespace bpem {

/// Dense matrix over GF(2) with at most 64 columns.
///
/// Row i is stored as an integer whose most significant used bit is column 0,
/// so a row written "110" has value 6. Vectors use the same convention as
/// BitString::to_uint: component 0 is bit 0 of the string.
class Gf2Matrix {
public:
    Gf2Matrix(int rows, int cols);

    static Gf2Matrix identity(int n);
    /// Each entry a string of '0'/'1' of equal length.
    static Gf2Matrix from_rows(std::span<const std::string_view> rows);
    static Gf2Matrix from_rows(std::initializer_list<std::string_view> rows);
    /// A(i,i) = A(i,i+1) = 1 for i < n-1 and A(n-1,0) = 1; both A and I+A are
    /// invertible for n >= 2, which makes x -> Ax a balanced permutation.
    static Gf2Matrix shifted_bidiagonal(int n);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    bool at(int r, int c) const;
    void set(int r, int c, bool v);
    std::uint64_t row(int r) const { return data_.at(static_cast<std::size_t>(r)); }

    int rank() const;
    bool is_invertible() const { return rows_ == cols_ && rank() == rows_; }
    std::optional<Gf2Matrix> inverse() const;

    /// y = A x over GF(2).
    std::uint64_t apply(std::uint64_t x) const;
    BitString apply(const BitString& x) const;
    /// Treats each input as one vector component drawn from (GF(2))^w:
    /// out[i] = XOR of in[j] over columns j with A(i,j) = 1.
    std::vector<BitString> apply_blocks(std::span<const BitString> in) const;

    friend Gf2Matrix operator*(const Gf2Matrix& a, const Gf2Matrix& b);
    friend Gf2Matrix operator+(const Gf2Matrix& a, const Gf2Matrix& b);
    friend bool operator==(const Gf2Matrix&, const Gf2Matrix&) = default;

private:
    int rows_;
    int cols_;
    std::vector<std::uint64_t> data_;
};

/// Arithmetic in GF(2^n) for n <= 32. Polynomials are integers with bit k as
/// the coefficient of x^k, so x^3+x+1 is 0b1011.
namespace gf2n {

/// Carry-less product reduced modulo `poly` (degree n).
std::uint64_t multiply(std::uint64_t a, std::uint64_t b, std::uint64_t poly, int n);
std::uint64_t inverse(std::uint64_t a, std::uint64_t poly, int n);
/// Trial division by every polynomial of degree 1..n/2.
bool is_irreducible(std::uint64_t poly);
/// Shipped irreducible polynomial for 2 <= n <= 16.
std::uint64_t default_polynomial(int n);

}  // namespace gf2n

}  // namespace bpem
