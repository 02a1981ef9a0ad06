#include "bpem/balanced.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpem {

namespace {

void check_round_widths(std::span<const Permutation> fs, const BitString& w) {
    if (fs.empty()) throw std::invalid_argument("lr_chain: empty round list");
    for (const auto& f : fs) {
        if (2 * f.width() != w.width()) {
            throw std::invalid_argument("lr_chain: round function width " + std::to_string(f.width()) +
                                        " does not halve block width " + std::to_string(w.width()));
        }
    }
}

class Lr2Impl final : public Permutation::Impl {
public:
    explicit Lr2Impl(Permutation f) : f_(std::move(f)) {}
    int width() const override { return 2 * f_.width(); }
    BitString forward(const BitString& x) const override { return lr2(f_, x); }
    BitString backward(const BitString& y) const override {
        return lr_round_inverse(f_, lr_round_inverse(f_, y));
    }
    std::string descriptor() const override { return "lr2[" + f_.descriptor() + "]"; }

private:
    Permutation f_;
};

int check_sweep_width(const Permutation& p) {
    const int m = p.width();
    if (m > kMaxSweepBits) {
        throw std::invalid_argument("exhaustive sweep limited to " + std::to_string(kMaxSweepBits) +
                                    " bits, got " + std::to_string(m));
    }
    return m;
}

}  // namespace

BitString lr_chain(std::span<const Permutation> fs, const BitString& w) {
    check_round_widths(fs, w);
    BitString state = w;
    for (const auto& f : fs) state = lr_round(f, state);
    return state;
}

BitString lr_chain_inverse(std::span<const Permutation> fs, const BitString& y) {
    check_round_widths(fs, y);
    BitString state = y;
    for (auto it = fs.rbegin(); it != fs.rend(); ++it) state = lr_round_inverse(*it, state);
    return state;
}

BitString lr2(const Permutation& f, const BitString& w) {
    if (2 * f.width() != w.width()) throw std::invalid_argument("lr2: block width must be twice f's width");
    const auto [left, right] = split(w);
    const BitString mid = left ^ f(right);
    return concat(mid, right ^ f(mid));
}

Permutation lr2_permutation(const Permutation& f) {
    if (2 * f.width() > BitString::kMaxWidth) throw std::invalid_argument("lr2: block wider than 256 bits");
    return Permutation(std::make_shared<Lr2Impl>(f));
}

bool is_balanced(const Permutation& p) {
    const int m = check_sweep_width(p);
    const std::uint64_t size = std::uint64_t{1} << m;
    std::vector<bool> hit(size, false);
    for (std::uint64_t x = 0; x < size; ++x) {
        const auto xs = BitString::from_uint(m, x);
        const auto d = (xs ^ p.forward(xs)).to_uint();
        if (hit[d]) return false;
        hit[d] = true;
    }
    return true;
}

XorProfile xor_profile(const Permutation& p) {
    const int m = check_sweep_width(p);
    const std::uint64_t size = std::uint64_t{1} << m;
    std::vector<std::uint32_t> counts(size, 0);
    std::vector<bool> image(size, false);
    for (std::uint64_t x = 0; x < size; ++x) {
        const auto xs = BitString::from_uint(m, x);
        const auto y = p.forward(xs);
        const auto yv = y.to_uint();
        if (image[yv]) throw std::invalid_argument("xor_profile: map is not a permutation (" + p.descriptor() + ")");
        image[yv] = true;
        ++counts[(xs ^ y).to_uint()];
    }
    XorProfile prof;
    prof.n = m;
    for (const auto c : counts) {
        if (c == 0) continue;
        ++prof.distinct_count;
        ++prof.histogram[c];
    }
    return prof;
}

}  // namespace bpem
