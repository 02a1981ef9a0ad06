#include "bpem/gf2.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <stdexcept>
#include <string>

namespace bpem {

Gf2Matrix::Gf2Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1 || cols > 64) throw std::invalid_argument("Gf2Matrix: unsupported shape");
    data_.assign(static_cast<std::size_t>(rows), 0);
}

Gf2Matrix Gf2Matrix::identity(int n) {
    Gf2Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

Gf2Matrix Gf2Matrix::from_rows(std::span<const std::string_view> rows) {
    if (rows.empty()) throw std::invalid_argument("Gf2Matrix: no rows");
    Gf2Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.rows_; ++r) {
        const auto& text = rows[static_cast<std::size_t>(r)];
        if (static_cast<int>(text.size()) != m.cols_) throw std::invalid_argument("Gf2Matrix: ragged rows");
        for (int c = 0; c < m.cols_; ++c) {
            const char ch = text[static_cast<std::size_t>(c)];
            if (ch != '0' && ch != '1') throw std::invalid_argument("Gf2Matrix: row is not a bit string");
            m.set(r, c, ch == '1');
        }
    }
    return m;
}

Gf2Matrix Gf2Matrix::from_rows(std::initializer_list<std::string_view> rows) {
    return from_rows(std::span(rows.begin(), rows.size()));
}

Gf2Matrix Gf2Matrix::shifted_bidiagonal(int n) {
    Gf2Matrix m(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        m.set(i, i, true);
        m.set(i, i + 1, true);
    }
    m.set(n - 1, 0, true);
    return m;
}

bool Gf2Matrix::at(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("Gf2Matrix index");
    return (data_[static_cast<std::size_t>(r)] >> (cols_ - 1 - c)) & 1u;
}

void Gf2Matrix::set(int r, int c, bool v) {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("Gf2Matrix index");
    const std::uint64_t mask = std::uint64_t{1} << (cols_ - 1 - c);
    auto& row = data_[static_cast<std::size_t>(r)];
    row = v ? (row | mask) : (row & ~mask);
}

int Gf2Matrix::rank() const {
    auto rows = data_;
    int rank = 0;
    for (int c = 0; c < cols_ && rank < rows_; ++c) {
        const std::uint64_t mask = std::uint64_t{1} << (cols_ - 1 - c);
        auto pivot = std::find_if(rows.begin() + rank, rows.end(), [&](std::uint64_t r) { return r & mask; });
        if (pivot == rows.end()) continue;
        std::iter_swap(rows.begin() + rank, pivot);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<int>(r) != rank && (rows[r] & mask)) rows[r] ^= rows[static_cast<std::size_t>(rank)];
        }
        ++rank;
    }
    return rank;
}

std::optional<Gf2Matrix> Gf2Matrix::inverse() const {
    if (rows_ != cols_) return std::nullopt;
    const int n = rows_;
    auto left = data_;
    auto right = identity(n).data_;
    for (int c = 0; c < n; ++c) {
        const std::uint64_t mask = std::uint64_t{1} << (n - 1 - c);
        int pivot = -1;
        for (int r = c; r < n; ++r) {
            if (left[static_cast<std::size_t>(r)] & mask) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) return std::nullopt;
        std::swap(left[static_cast<std::size_t>(c)], left[static_cast<std::size_t>(pivot)]);
        std::swap(right[static_cast<std::size_t>(c)], right[static_cast<std::size_t>(pivot)]);
        for (int r = 0; r < n; ++r) {
            const auto ur = static_cast<std::size_t>(r);
            const auto uc = static_cast<std::size_t>(c);
            if (r != c && (left[ur] & mask)) {
                left[ur] ^= left[uc];
                right[ur] ^= right[uc];
            }
        }
    }
    Gf2Matrix inv(n, n);
    inv.data_ = std::move(right);
    return inv;
}

std::uint64_t Gf2Matrix::apply(std::uint64_t x) const {
    if (cols_ < 64 && (x >> cols_) != 0) throw std::invalid_argument("Gf2Matrix::apply: vector too wide");
    std::uint64_t y = 0;
    for (const auto row : data_) y = (y << 1) | static_cast<std::uint64_t>(std::popcount(row & x) & 1);
    return y;
}

BitString Gf2Matrix::apply(const BitString& x) const {
    if (x.width() != cols_) throw std::invalid_argument("Gf2Matrix::apply: width mismatch");
    return BitString::from_uint(rows_, apply(x.to_uint()));
}

std::vector<BitString> Gf2Matrix::apply_blocks(std::span<const BitString> in) const {
    if (static_cast<int>(in.size()) != cols_) throw std::invalid_argument("Gf2Matrix::apply_blocks: arity mismatch");
    std::vector<BitString> out;
    out.reserve(static_cast<std::size_t>(rows_));
    for (int r = 0; r < rows_; ++r) {
        auto acc = BitString::zeros(in[0].width());
        for (int c = 0; c < cols_; ++c) {
            if (at(r, c)) acc ^= in[static_cast<std::size_t>(c)];
        }
        out.push_back(acc);
    }
    return out;
}

Gf2Matrix operator*(const Gf2Matrix& a, const Gf2Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("Gf2Matrix product: shape mismatch");
    Gf2Matrix out(a.rows_, b.cols_);
    for (int r = 0; r < a.rows_; ++r) {
        std::uint64_t acc = 0;
        for (int k = 0; k < a.cols_; ++k) {
            if (a.at(r, k)) acc ^= b.data_[static_cast<std::size_t>(k)];
        }
        out.data_[static_cast<std::size_t>(r)] = acc;
    }
    return out;
}

Gf2Matrix operator+(const Gf2Matrix& a, const Gf2Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("Gf2Matrix sum: shape mismatch");
    Gf2Matrix out = a;
    for (std::size_t r = 0; r < out.data_.size(); ++r) out.data_[r] ^= b.data_[r];
    return out;
}

namespace gf2n {

namespace {

int degree(std::uint64_t p) { return p == 0 ? -1 : 63 - std::countl_zero(p); }

std::uint64_t poly_mod(std::uint64_t a, std::uint64_t m) {
    const int dm = degree(m);
    for (int d = degree(a); d >= dm; d = degree(a)) a ^= m << (d - dm);
    return a;
}

}  // namespace

std::uint64_t multiply(std::uint64_t a, std::uint64_t b, std::uint64_t poly, int n) {
    if (n < 1 || n > 32 || degree(poly) != n) throw std::invalid_argument("gf2n::multiply: bad modulus");
    std::uint64_t acc = 0;
    for (int i = 0; i < n; ++i) {
        if ((b >> i) & 1u) acc ^= a << i;
    }
    return poly_mod(acc, poly);
}

std::uint64_t inverse(std::uint64_t a, std::uint64_t poly, int n) {
    if (a == 0) throw std::invalid_argument("gf2n::inverse: zero has no inverse");
    // a^(2^n - 2) by square-and-multiply.
    std::uint64_t result = 1;
    std::uint64_t base = a;
    std::uint64_t e = (std::uint64_t{1} << n) - 2;
    while (e) {
        if (e & 1u) result = multiply(result, base, poly, n);
        base = multiply(base, base, poly, n);
        e >>= 1;
    }
    return result;
}

bool is_irreducible(std::uint64_t poly) {
    const int n = degree(poly);
    if (n < 1) return false;
    for (int d = 1; 2 * d <= n; ++d) {
        for (std::uint64_t f = std::uint64_t{1} << d; f < (std::uint64_t{1} << (d + 1)); ++f) {
            if (poly_mod(poly, f) == 0) return false;
        }
    }
    return true;
}

std::uint64_t default_polynomial(int n) {
    static constexpr std::array<std::uint64_t, 17> kTable = {
        0,       0,
        0x7,      // x^2+x+1
        0xB,      // x^3+x+1
        0x13,     // x^4+x+1
        0x25,     // x^5+x^2+1
        0x43,     // x^6+x+1
        0x83,     // x^7+x+1
        0x11B,    // x^8+x^4+x^3+x+1
        0x211,    // x^9+x^4+1
        0x409,    // x^10+x^3+1
        0x805,    // x^11+x^2+1
        0x1053,   // x^12+x^6+x^4+x+1
        0x201B,   // x^13+x^4+x^3+x+1
        0x4443,   // x^14+x^10+x^6+x+1
        0x8003,   // x^15+x+1
        0x1100B,  // x^16+x^12+x^3+x+1
    };
    if (n < 2 || n > 16) throw std::invalid_argument("no default polynomial for n=" + std::to_string(n));
    return kTable[static_cast<std::size_t>(n)];
}

}  // namespace gf2n

}  // namespace bpem
