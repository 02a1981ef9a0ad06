#include "bpem/permutation.hpp"

#include <bit>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bpem/error.hpp"

namespace bpem {

Permutation::Permutation(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
    if (!impl_) throw std::invalid_argument("Permutation: null implementation");
    width_ = impl_->width();
}

BitString Permutation::forward(const BitString& x) const {
    if (x.width() != width_) {
        throw std::invalid_argument("permutation on " + std::to_string(width_) + " bits applied to width " +
                                    std::to_string(x.width()));
    }
    return impl_->forward(x);
}

BitString Permutation::backward(const BitString& y) const {
    if (y.width() != width_) {
        throw std::invalid_argument("permutation on " + std::to_string(width_) + " bits inverted at width " +
                                    std::to_string(y.width()));
    }
    return impl_->backward(y);
}

namespace {

class TableImpl final : public Permutation::Impl {
public:
    TableImpl(int n, std::vector<std::uint32_t> fwd, std::vector<std::uint32_t> inv)
        : n_(n), fwd_(std::move(fwd)), inv_(std::move(inv)) {}

    int width() const override { return n_; }
    BitString forward(const BitString& x) const override {
        return BitString::from_uint(n_, fwd_[static_cast<std::size_t>(x.to_uint())]);
    }
    BitString backward(const BitString& y) const override {
        return BitString::from_uint(n_, inv_[static_cast<std::size_t>(y.to_uint())]);
    }
    std::string descriptor() const override { return "table n=" + std::to_string(n_); }

private:
    int n_;
    std::vector<std::uint32_t> fwd_;
    std::vector<std::uint32_t> inv_;
};

class IdentityImpl final : public Permutation::Impl {
public:
    explicit IdentityImpl(int width) : width_(width) {}
    int width() const override { return width_; }
    BitString forward(const BitString& x) const override { return x; }
    BitString backward(const BitString& y) const override { return y; }
    std::string descriptor() const override { return "identity n=" + std::to_string(width_); }

private:
    int width_;
};

class LinearImpl final : public Permutation::Impl {
public:
    LinearImpl(Gf2Matrix a, Gf2Matrix inv) : a_(std::move(a)), inv_(std::move(inv)) {}
    int width() const override { return a_.cols(); }
    BitString forward(const BitString& x) const override { return a_.apply(x); }
    BitString backward(const BitString& y) const override { return inv_.apply(y); }
    std::string descriptor() const override {
        std::string d = "linear n=" + std::to_string(a_.cols()) + " rows=";
        for (int r = 0; r < a_.rows(); ++r) {
            if (r) d += ',';
            for (int c = 0; c < a_.cols(); ++c) d += a_.at(r, c) ? '1' : '0';
        }
        return d;
    }

private:
    Gf2Matrix a_;
    Gf2Matrix inv_;
};

class Gf2nMulImpl final : public Permutation::Impl {
public:
    Gf2nMulImpl(int n, std::uint64_t a, std::uint64_t poly)
        : n_(n), a_(a), a_inv_(gf2n::inverse(a, poly, n)), poly_(poly) {}
    int width() const override { return n_; }
    BitString forward(const BitString& x) const override {
        return BitString::from_uint(n_, gf2n::multiply(a_, x.to_uint(), poly_, n_));
    }
    BitString backward(const BitString& y) const override {
        return BitString::from_uint(n_, gf2n::multiply(a_inv_, y.to_uint(), poly_, n_));
    }
    std::string descriptor() const override {
        std::ostringstream os;
        os << "gf2n n=" << n_ << " a=" << std::hex << a_ << " poly=" << poly_;
        return os.str();
    }

private:
    int n_;
    std::uint64_t a_;
    std::uint64_t a_inv_;
    std::uint64_t poly_;
};

class AesImpl final : public Permutation::Impl {
public:
    AesImpl(const Aes128::Key& key, Aes128::Backend backend) : key_(key), aes_(key, backend) {}
    int width() const override { return 128; }
    BitString forward(const BitString& x) const override {
        Aes128::Block out;
        aes_.encrypt_block(x.bytes().data(), out.data());
        return BitString::from_bytes(128, out);
    }
    BitString backward(const BitString& y) const override {
        Aes128::Block out;
        aes_.decrypt_block(y.bytes().data(), out.data());
        return BitString::from_bytes(128, out);
    }
    std::string descriptor() const override { return "aes128 key=" + to_hex(key_); }

private:
    Aes128::Key key_;
    Aes128 aes_;
};

int table_bits(std::size_t size) {
    if (size < 2 || !std::has_single_bit(size)) {
        throw std::invalid_argument("table size " + std::to_string(size) + " is not 2^n with n >= 1");
    }
    const int n = std::countr_zero(size);
    if (n > kMaxTableBits) throw std::invalid_argument("table permutations are limited to n <= 16");
    return n;
}

void check_table_bits(int n) {
    if (n < 1 || n > kMaxTableBits) throw std::invalid_argument("table bit count must be in 1..16");
}

}  // namespace

Permutation table_permutation(std::vector<std::uint32_t> mapping) {
    const int n = table_bits(mapping.size());
    std::vector<std::uint32_t> inv(mapping.size(), 0);
    std::vector<bool> seen(mapping.size(), false);
    for (std::size_t x = 0; x < mapping.size(); ++x) {
        const auto y = mapping[x];
        if (y >= mapping.size()) throw std::invalid_argument("table entry " + std::to_string(y) + " out of range");
        if (seen[y]) throw std::invalid_argument("table is not a bijection: output " + std::to_string(y) + " repeats");
        seen[y] = true;
        inv[y] = static_cast<std::uint32_t>(x);
    }
    return Permutation(std::make_shared<TableImpl>(n, std::move(mapping), std::move(inv)));
}

std::vector<std::uint32_t> random_table(int n, Rng& rng) {
    check_table_bits(n);
    std::vector<std::uint32_t> t(std::size_t{1} << n);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<std::uint32_t>(i);
    for (std::size_t i = t.size() - 1; i > 0; --i) {
        std::swap(t[i], t[static_cast<std::size_t>(rng.below(i + 1))]);
    }
    return t;
}

std::vector<std::uint32_t> random_function_table(int n, Rng& rng) {
    check_table_bits(n);
    std::vector<std::uint32_t> t(std::size_t{1} << n);
    for (auto& v : t) v = static_cast<std::uint32_t>(rng.below(t.size()));
    return t;
}

Permutation random_permutation(int n, std::uint64_t seed) {
    Rng rng(seed);
    return table_permutation(random_table(n, rng));
}

Permutation identity_permutation(int width) {
    (void)BitString::zeros(width);  // validates width
    return Permutation(std::make_shared<IdentityImpl>(width));
}

Permutation linear_permutation(const Gf2Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("linear permutation needs a square matrix");
    auto inv = a.inverse();
    if (!inv) throw std::invalid_argument("linear permutation: matrix is singular over GF(2)");
    return Permutation(std::make_shared<LinearImpl>(a, *inv));
}

Permutation gf2n_mul_permutation(int n, const BitString& a, const BitString& poly) {
    if (n < 2 || n > 16) throw std::invalid_argument("GF(2^n) multiplication supports 2 <= n <= 16");
    if (a.width() != n) throw std::invalid_argument("field element width does not match n");
    if (poly.width() != n + 1) throw std::invalid_argument("reduction polynomial must have width n+1");
    const auto p = poly.to_uint();
    if (!((p >> n) & 1u) || !gf2n::is_irreducible(p)) {
        throw std::invalid_argument("reduction polynomial is not an irreducible polynomial of degree n");
    }
    const auto av = a.to_uint();
    if (av <= 1) throw std::invalid_argument("multiplier must not be 0 or 1");
    return Permutation(std::make_shared<Gf2nMulImpl>(n, av, p));
}

Permutation gf2n_mul_permutation(int n, const BitString& a) {
    return gf2n_mul_permutation(n, a, BitString::from_uint(n + 1, gf2n::default_polynomial(n)));
}

Permutation aes_permutation(const BitString& key, Aes128::Backend backend) {
    if (key.width() != 128) throw std::invalid_argument("AES-128 key must be 128 bits");
    Aes128::Key k;
    std::copy(key.bytes().begin(), key.bytes().end(), k.begin());
    return Permutation(std::make_shared<AesImpl>(k, backend));
}

void write_permutation_table(std::ostream& out, const Permutation& p) {
    const int n = p.width();
    check_table_bits(n);
    const int digits = 2 * ((n + 7) / 8);
    out << "perm n=" << n << '\n';
    const std::uint64_t size = std::uint64_t{1} << n;
    for (std::uint64_t x = 0; x < size; ++x) {
        const auto y = p.forward(BitString::from_uint(n, x)).to_uint();
        std::ostringstream line;
        line << std::hex;
        line.width(digits);
        line.fill('0');
        line << y;
        out << line.str() << '\n';
    }
}

Permutation read_permutation_table(std::istream& in) {
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("perm n=", 0) != 0) throw FormatError("permutation file must start with 'perm n=<n>'");
        try {
            std::size_t used = 0;
            n = std::stoi(line.substr(7), &used);
            if (7 + used != line.size()) throw FormatError("trailing text after n");
        } catch (const std::logic_error&) {
            throw FormatError("bad header '" + line + "'");
        }
        break;
    }
    if (n < 1 || n > kMaxTableBits) throw FormatError("permutation header missing or n outside 1..16");
    const std::size_t size = std::size_t{1} << n;
    const std::size_t max_digits = 2 * static_cast<std::size_t>((n + 7) / 8);
    std::vector<std::uint32_t> mapping;
    mapping.reserve(size);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.size() > max_digits) throw FormatError("table entry '" + line + "' too long for n=" + std::to_string(n));
        std::uint32_t v = 0;
        for (const char c : line) {
            int d;
            if (c >= '0' && c <= '9') d = c - '0';
            else if (c >= 'a' && c <= 'f') d = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') d = c - 'A' + 10;
            else throw FormatError("invalid hex digit in table entry '" + line + "'");
            v = (v << 4) | static_cast<std::uint32_t>(d);
        }
        mapping.push_back(v);
    }
    if (mapping.size() != size) {
        throw FormatError("expected " + std::to_string(size) + " table entries, found " + std::to_string(mapping.size()));
    }
    try {
        return table_permutation(std::move(mapping));
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
}

}  // namespace bpem
