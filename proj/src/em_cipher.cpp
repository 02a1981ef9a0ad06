#include "bpem/em_cipher.hpp"

#include <array>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "bpem/balanced.hpp"
#include "bpem/error.hpp"

namespace bpem {

namespace {

void check_em_shape(std::span<const Permutation> perms, std::span<const BitString> keys, const BitString& block) {
    if (perms.empty()) throw std::invalid_argument("Even-Mansour needs at least one round");
    if (keys.size() != perms.size() + 1) throw std::invalid_argument("Even-Mansour needs r+1 keys for r rounds");
    for (const auto& p : perms) {
        if (p.width() != block.width()) throw std::invalid_argument("Even-Mansour: permutation width mismatch");
    }
    for (const auto& k : keys) {
        if (k.width() != block.width()) throw std::invalid_argument("Even-Mansour: key width mismatch");
    }
}

class SingleKeyRoundImpl final : public Permutation::Impl {
public:
    SingleKeyRoundImpl(Permutation f, BitString key) : f_(std::move(f)), key_(std::move(key)) {}
    int width() const override { return f_.width(); }
    BitString forward(const BitString& x) const override { return f_.forward(x ^ key_) ^ key_; }
    BitString backward(const BitString& y) const override { return f_.backward(y ^ key_) ^ key_; }
    std::string descriptor() const override { return "xor-key[" + f_.descriptor() + "]"; }

private:
    Permutation f_;
    BitString key_;
};

void check_bpem_args(const BpemKeySet& ks, const Permutation& f1, const Permutation& f2, const BitString& block) {
    if (f1.width() != ks.n() || f2.width() != ks.n()) {
        throw std::invalid_argument("BPEM: round permutations must have width n=" + std::to_string(ks.n()));
    }
    if (block.width() != 2 * ks.n()) throw std::invalid_argument("BPEM: block width must be 2n");
    if (is_single_perm(ks.variant()) && !f1.same_instance(f2)) {
        throw std::invalid_argument("BPEM: variant " + std::string(to_string(ks.variant())) +
                                    " requires f1 and f2 to be the same permutation");
    }
}

}  // namespace

BitString em_encrypt(std::span<const Permutation> perms, std::span<const BitString> keys, const BitString& msg) {
    check_em_shape(perms, keys, msg);
    BitString state = msg ^ keys[0];
    for (std::size_t i = 0; i < perms.size(); ++i) state = perms[i].forward(state) ^ keys[i + 1];
    return state;
}

BitString em_decrypt(std::span<const Permutation> perms, std::span<const BitString> keys, const BitString& ct) {
    check_em_shape(perms, keys, ct);
    BitString state = ct;
    for (std::size_t i = perms.size(); i-- > 0;) state = perms[i].backward(state ^ keys[i + 1]);
    return state ^ keys[0];
}

BitString single_key_round(const Permutation& f, const BitString& key, const BitString& x) {
    return f.forward(x ^ key) ^ key;
}

Permutation single_key_permutation(const Permutation& f, const BitString& key) {
    if (key.width() != f.width()) throw std::invalid_argument("single-key round: key width mismatch");
    return Permutation(std::make_shared<SingleKeyRoundImpl>(f, key));
}

std::string_view to_string(BpemVariant v) noexcept {
    switch (v) {
        case BpemVariant::ThreeKeyTwoPerm: return "three-key/two-perm";
        case BpemVariant::ThreeKeyOnePerm: return "three-key/one-perm";
        case BpemVariant::OneKeyTwoPerm: return "one-key/two-perm";
        case BpemVariant::OneKeyOnePerm: return "one-key/one-perm";
    }
    return "unknown";
}

std::optional<BpemVariant> parse_variant(std::string_view name) noexcept {
    static const std::map<std::string_view, BpemVariant> kNames = {
        {"three-key/two-perm", BpemVariant::ThreeKeyTwoPerm},
        {"three-key/one-perm", BpemVariant::ThreeKeyOnePerm},
        {"one-key/two-perm", BpemVariant::OneKeyTwoPerm},
        {"one-key/one-perm", BpemVariant::OneKeyOnePerm},
        {"three-key", BpemVariant::ThreeKeyTwoPerm},
        {"one-key", BpemVariant::OneKeyTwoPerm},
    };
    const auto it = kNames.find(name);
    if (it == kNames.end()) return std::nullopt;
    return it->second;
}

BpemKeySet::BpemKeySet(BpemVariant variant, std::vector<BitString> keys)
    : variant_(variant), keys_(std::move(keys)) {
    const std::size_t expected = is_single_key(variant) ? 1 : 3;
    if (keys_.size() != expected) {
        throw std::invalid_argument("variant " + std::string(to_string(variant)) + " stores " +
                                    std::to_string(expected) + " key(s), got " + std::to_string(keys_.size()));
    }
    const int width = keys_.front().width();
    if (width % 2 != 0) throw std::invalid_argument("BPEM keys must have even width 2n");
    for (const auto& k : keys_) {
        if (k.width() != width) throw std::invalid_argument("BPEM keys must all have the same width");
    }
}

BpemKeySet BpemKeySet::random(BpemVariant variant, int n, Rng& rng) {
    std::vector<BitString> keys;
    const int count = is_single_key(variant) ? 1 : 3;
    for (int i = 0; i < count; ++i) keys.push_back(rng.bits(2 * n));
    return BpemKeySet(variant, std::move(keys));
}

const BitString& BpemKeySet::key(int i) const {
    if (i < 0 || i > 2) throw std::out_of_range("BPEM key index must be 0, 1 or 2");
    return is_single_key(variant_) ? keys_.front() : keys_[static_cast<std::size_t>(i)];
}

BitString bpem_encrypt(const BpemKeySet& ks, const Permutation& f1, const Permutation& f2, const BitString& msg) {
    check_bpem_args(ks, f1, f2, msg);
    BitString state = lr2(f1, msg ^ ks.key(0)) ^ ks.key(1);
    return lr2(f2, state) ^ ks.key(2);
}

BitString bpem_decrypt(const BpemKeySet& ks, const Permutation& f1, const Permutation& f2, const BitString& ct) {
    check_bpem_args(ks, f1, f2, ct);
    BitString state = ct ^ ks.key(2);
    state = lr_round_inverse(f2, lr_round_inverse(f2, state)) ^ ks.key(1);
    return lr_round_inverse(f1, lr_round_inverse(f1, state)) ^ ks.key(0);
}

DerivedKeySchedule::DerivedKeySchedule(std::vector<BitString> kprime) : kprime_(std::move(kprime)) {
    if (kprime_.size() != 6 && kprime_.size() != 3) {
        throw std::invalid_argument("derived key schedule must hold 6 or 3 keys, got " +
                                    std::to_string(kprime_.size()));
    }
    for (const auto& k : kprime_) {
        if (k.width() != kprime_.front().width()) throw std::invalid_argument("derived keys differ in width");
    }
}

const BitString& DerivedKeySchedule::k(int i) const {
    if (i < 1 || i > static_cast<int>(kprime_.size())) throw std::out_of_range("derived key index");
    return kprime_[static_cast<std::size_t>(i - 1)];
}

const Gf2Matrix& lr_key_matrix() {
    static const Gf2Matrix m = Gf2Matrix::from_rows({
        "100000",
        "110000",
        "011000",
        "101100",
        "110110",
        "101101",
    });
    return m;
}

const Gf2Matrix& single_key_lr_key_matrix() {
    static const Gf2Matrix m = Gf2Matrix::from_rows({"10", "11", "01"});
    return m;
}

DerivedKeySchedule derive_lr_keys(const BpemKeySet& ks) {
    if (is_single_key(ks.variant())) {
        throw std::invalid_argument("derive_lr_keys needs a three-key variant; use derive_single_key_lr_keys");
    }
    // Order is R before L for each key.
    const std::array<BitString, 6> halves = {
        right_half(ks.key(0)), left_half(ks.key(0)), right_half(ks.key(1)),
        left_half(ks.key(1)),  right_half(ks.key(2)), left_half(ks.key(2)),
    };
    return DerivedKeySchedule(lr_key_matrix().apply_blocks(halves));
}

DerivedKeySchedule derive_single_key_lr_keys(const BpemKeySet& ks) {
    if (!is_single_key(ks.variant())) {
        throw std::invalid_argument("derive_single_key_lr_keys needs a one-key variant");
    }
    const std::array<BitString, 2> halves = {right_half(ks.key(0)), left_half(ks.key(0))};
    return DerivedKeySchedule(single_key_lr_key_matrix().apply_blocks(halves));
}

BitString bpem_via_lr(const DerivedKeySchedule& sched, const Permutation& f1, const Permutation& f2,
                      const BitString& msg) {
    if (f1.width() != sched.n() || f2.width() != sched.n()) {
        throw std::invalid_argument("bpem_via_lr: permutation width does not match schedule");
    }
    if (sched.single_key()) {
        const std::array<Permutation, 4> rounds = {
            single_key_permutation(f1, sched.k(1)),
            single_key_permutation(f1, sched.k(2)),
            single_key_permutation(f2, sched.k(2)),
            single_key_permutation(f2, sched.k(3)),
        };
        return lr_chain(rounds, msg);
    }
    const std::array<Permutation, 4> rounds = {
        single_key_permutation(f1, sched.k(1)),
        single_key_permutation(f1, sched.k(2)),
        single_key_permutation(f2, sched.k(3)),
        single_key_permutation(f2, sched.k(4)),
    };
    return lr_chain(rounds, msg) ^ concat(sched.k(6), sched.k(5));
}

BitString bpem1_encrypt(const BitString& k0, const BitString& k1, const Permutation& f, const BitString& msg) {
    if (msg.width() != 2 * f.width() || k0.width() != msg.width() || k1.width() != msg.width()) {
        throw std::invalid_argument("bpem1: width mismatch");
    }
    return lr2(f, msg ^ k0) ^ k1;
}

BitString bpem1_decrypt(const BitString& k0, const BitString& k1, const Permutation& f, const BitString& ct) {
    if (ct.width() != 2 * f.width() || k0.width() != ct.width() || k1.width() != ct.width()) {
        throw std::invalid_argument("bpem1: width mismatch");
    }
    return lr_round_inverse(f, lr_round_inverse(f, ct ^ k1)) ^ k0;
}

namespace {

std::vector<std::string> key_names(BpemVariant v) {
    if (is_single_key(v)) return {"k"};
    return {"k0", "k1", "k2"};
}

std::vector<std::string> perm_key_names(BpemVariant v) {
    if (is_single_perm(v)) return {"ell"};
    return {"ell1", "ell2"};
}

}  // namespace

void write_key_file(std::ostream& out, const KeyFile& kf) {
    const auto v = kf.keys.variant();
    out << "bpem-keys variant=" << to_string(v) << " n=" << kf.keys.n() << '\n';
    const auto names = key_names(v);
    for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << '=' << kf.keys.stored()[i].to_hex() << '\n';
    if (!kf.perm_keys.empty()) {
        const auto pnames = perm_key_names(v);
        if (kf.perm_keys.size() != pnames.size()) throw std::invalid_argument("wrong number of permutation keys");
        for (std::size_t i = 0; i < pnames.size(); ++i) out << pnames[i] << '=' << kf.perm_keys[i].to_hex() << '\n';
    }
}

KeyFile read_key_file(std::istream& in) {
    std::string line;
    std::optional<BpemVariant> variant;
    int n = 0;
    std::map<std::string, std::string> fields;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            std::istringstream hs(line);
            std::string magic, vpart, npart, extra;
            hs >> magic >> vpart >> npart;
            if (magic != "bpem-keys" || vpart.rfind("variant=", 0) != 0 || npart.rfind("n=", 0) != 0 || (hs >> extra)) {
                throw FormatError("key file header must be 'bpem-keys variant=<name> n=<n>'");
            }
            variant = parse_variant(vpart.substr(8));
            if (!variant) throw FormatError("unknown variant '" + vpart.substr(8) + "'");
            try {
                n = std::stoi(npart.substr(2));
            } catch (const std::logic_error&) {
                throw FormatError("bad n in key file header");
            }
            if (n < 1 || 2 * n > BitString::kMaxWidth) throw FormatError("key file n out of range");
            header = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("key file line '" + line + "' is not name=hex");
        const auto name = line.substr(0, eq);
        if (!fields.emplace(name, line.substr(eq + 1)).second) throw FormatError("duplicate key '" + name + "'");
    }
    if (!header) throw FormatError("key file is empty");

    std::vector<BitString> keys;
    for (const auto& name : key_names(*variant)) {
        const auto it = fields.find(name);
        if (it == fields.end()) throw FormatError("key file lacks '" + name + "'");
        keys.push_back(BitString::from_hex(2 * n, it->second));
        fields.erase(it);
    }
    std::vector<BitString> perm_keys;
    const auto pnames = perm_key_names(*variant);
    for (const auto& name : pnames) {
        const auto it = fields.find(name);
        if (it == fields.end()) continue;
        perm_keys.push_back(BitString::from_hex(n, it->second));
        fields.erase(it);
    }
    if (!perm_keys.empty() && perm_keys.size() != pnames.size()) throw FormatError("incomplete permutation keys");
    if (!fields.empty()) throw FormatError("unexpected key file entry '" + fields.begin()->first + "'");
    return KeyFile{BpemKeySet(*variant, std::move(keys)), std::move(perm_keys)};
}

}  // namespace bpem
