// bpem: command-line front end for the library.
//
// Exit codes: 0 success (including a computed verdict), 1 usage,
// 2 I/O or malformed input, 3 verification or padding failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpem/attack.hpp"
#include "bpem/balanced.hpp"
#include "bpem/em256aes.hpp"
#include "bpem/em_cipher.hpp"
#include "bpem/error.hpp"
#include "bpem/permutation.hpp"

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kVerify = 3 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_all(const std::string& path) {
    if (path == "-") {
        std::cin >> std::noskipws;
        return {std::istreambuf_iterator<char>(std::cin), {}};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_all(const std::string& path, std::span<const std::uint8_t> data) {
    if (path == "-") {
        std::cout.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

std::ifstream open_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

bpem::KeyFile load_key_file(const std::string& path) {
    auto in = open_text(path);
    return bpem::read_key_file(in);
}

// A key file that parses but cannot drive EM256AES counts as malformed input.
bpem::Em256Aes load_cipher(const bpem::KeyFile& kf) {
    try {
        return bpem::Em256Aes::from_key_file(kf);
    } catch (const std::invalid_argument& e) {
        throw bpem::FormatError(e.what());
    }
}

// Seeded runs use the library generator; unseeded keygen draws from the OS.
bpem::Rng make_rng(const std::optional<std::uint64_t>& seed) {
    if (seed) return bpem::Rng(*seed);
    std::random_device rd;
    const std::uint64_t s = (std::uint64_t{rd()} << 32) ^ rd();
    return bpem::Rng(s);
}

bpem::KeyFile random_key_file(bpem::BpemVariant v, int n, bpem::Rng& rng) {
    bpem::KeyFile kf{bpem::BpemKeySet::random(v, n, rng), {}};
    if (n == 128) {
        kf.perm_keys.push_back(rng.bits(128));
        if (!bpem::is_single_perm(v)) kf.perm_keys.push_back(rng.bits(128));
    }
    return kf;
}

json estimate_json(const bpem::AdvantageEstimate& e) {
    return {{"n", e.n},
            {"q", e.q},
            {"trials", e.trials},
            {"bpem_collision_rate", e.bpem_collision_rate},
            {"random_collision_rate", e.random_collision_rate},
            {"empirical_advantage", e.empirical_advantage},
            {"analytic_lower_bound", e.analytic_lower_bound}};
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balanced-permutation Even-Mansour ciphers: tools and experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bpem 1.0");

    std::optional<std::uint64_t> seed;
    bool as_json = false;
    auto add_common = [&](CLI::App* sub, bool seeded) {
        if (seeded) sub->add_option("--seed", seed, "RNG seed (runs are reproducible given it)");
        sub->add_flag("--json", as_json, "Machine-readable output");
    };

    // keygen
    std::string variant_name = "three-key/two-perm";
    int keygen_n = 128;
    std::string out_path = "-";
    auto* keygen = app.add_subcommand("keygen", "Generate a key file");
    keygen->add_option("--variant", variant_name, "three-key/two-perm, three-key/one-perm, one-key/two-perm, "
                                                  "one-key/one-perm (aliases: three-key, one-key)");
    keygen->add_option("--n", keygen_n, "Half-block width in bits")->check(CLI::Range(1, 128));
    keygen->add_option("-o,--out", out_path, "Output path ('-' for stdout)");
    add_common(keygen, true);

    // encrypt / decrypt
    std::string key_path, in_path = "-";
    auto* encrypt = app.add_subcommand("encrypt", "EM256AES stream encryption (ECB, padded)");
    auto* decrypt = app.add_subcommand("decrypt", "EM256AES stream decryption");
    for (auto* sub : {encrypt, decrypt}) {
        sub->add_option("-k,--key", key_path, "Key file with n=128 and ell lines")->required();
        sub->add_option("-i,--in", in_path, "Input path ('-' for stdin)");
        sub->add_option("-o,--out", out_path, "Output path ('-' for stdout)");
    }

    // balance-check / xor-profile
    std::string table_path;
    auto* balance = app.add_subcommand("balance-check", "Is x -> x ^ P(x) a permutation?");
    balance->add_option("table", table_path, "Permutation table file")->required();
    add_common(balance, false);
    auto* profile = app.add_subcommand("xor-profile", "Histogram of x ^ P(x) multiplicities (CSV)");
    profile->add_option("table", table_path, "Permutation table file")->required();
    add_common(profile, false);

    // attack
    int attack_n = 8;
    std::uint64_t attack_q = 64;
    std::string oracle_name = "bpem";
    std::string rho_hex;
    auto* attack = app.add_subcommand("attack", "Run the collision distinguisher against one oracle");
    attack->add_option("--n", attack_n, "Half-block width in bits")->check(CLI::Range(1, 128));
    attack->add_option("--q", attack_q, "Number of queries");
    attack->add_option("--oracle", oracle_name, "bpem, random, identity or em256aes")
        ->check(CLI::IsMember({"bpem", "random", "identity", "em256aes"}));
    attack->add_option("--rho", rho_hex, "Fixed right half, hex (default all-zero)");
    attack->add_option("-k,--key", key_path, "Key file for the em256aes oracle (default: seeded random)");
    add_common(attack, true);

    // advantage
    int adv_n = 8;
    std::uint64_t adv_q = 32;
    std::uint64_t trials = 2000;
    double public_queries = 0;
    auto* advantage = app.add_subcommand("advantage", "Monte-Carlo advantage of the distinguisher");
    advantage->add_option("--n", adv_n, "Half-block width in bits")->check(CLI::Range(1, 12));
    advantage->add_option("--q", adv_q, "Queries per trial");
    advantage->add_option("--trials", trials, "Trials per oracle type");
    advantage->add_option("--public-queries", public_queries,
                          "Queries to each public permutation, for the reference upper bounds");
    add_common(advantage, true);

    // kat
    std::string kat_path;
    auto* kat = app.add_subcommand("kat", "Verify EM256AES known-answer vectors");
    kat->add_option("--verify", kat_path, "KAT file")->required();
    add_common(kat, false);

    // bench
    std::string mode_name = "serial";
    std::size_t bytes = std::size_t{8} << 20;
    int repetitions = 5;
    auto* bench = app.add_subcommand("bench", "Throughput of EM256AES against raw AES-128");
    bench->add_option("--mode", mode_name, "serial or parallel")->check(CLI::IsMember({"serial", "parallel"}));
    bench->add_option("--bytes", bytes, "Buffer size (at least 1 MiB)");
    bench->add_option("--repetitions", repetitions, "Runs; the best is reported")->check(CLI::PositiveNumber);
    bench->add_option("-k,--key", key_path, "Key file (default: seeded random)");
    add_common(bench, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*keygen) {
            const auto v = bpem::parse_variant(variant_name);
            if (!v) {
                std::cerr << "bpem: unknown variant '" << variant_name << "'\n";
                return kUsage;
            }
            auto rng = make_rng(seed);
            std::ostringstream text;
            bpem::write_key_file(text, random_key_file(*v, keygen_n, rng));
            const auto s = text.str();
            write_all(out_path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
            // On stdout the key text is the output; no JSON alongside it.
            if (as_json && out_path != "-") {
                print_json({{"variant", std::string(bpem::to_string(*v))}, {"n", keygen_n}, {"out", out_path}});
            }
        } else if (*encrypt || *decrypt) {
            const auto cipher = load_cipher(load_key_file(key_path));
            const auto input = read_all(in_path);
            const auto output = *encrypt ? bpem::encrypt_stream(cipher, input) : bpem::decrypt_stream(cipher, input);
            write_all(out_path, output);
        } else if (*balance) {
            auto in = open_text(table_path);
            const auto prof = bpem::xor_profile(bpem::read_permutation_table(in));
            if (as_json) {
                print_json({{"n", prof.n}, {"balanced", prof.balanced()}, {"distinct_count", prof.distinct_count}});
            } else {
                std::cout << "balanced: " << (prof.balanced() ? "yes" : "no") << '\n';
            }
        } else if (*profile) {
            auto in = open_text(table_path);
            const auto prof = bpem::xor_profile(bpem::read_permutation_table(in));
            if (as_json) {
                json hist = json::array();
                for (const auto& [mult, count] : prof.histogram) hist.push_back({{"multiplicity", mult}, {"count", count}});
                print_json({{"n", prof.n}, {"distinct_count", prof.distinct_count}, {"histogram", hist}});
            } else {
                std::cout << "multiplicity,count\n";
                for (const auto& [mult, count] : prof.histogram) std::cout << mult << ',' << count << '\n';
            }
        } else if (*attack) {
            const std::uint64_t s = seed.value_or(0);
            const int n = attack_n;
            const auto rho = rho_hex.empty() ? bpem::BitString::zeros(n) : bpem::BitString::from_hex(n, rho_hex);
            std::optional<bpem::EncryptionOracle> oracle;
            if (oracle_name == "bpem") {
                if (n > bpem::kMaxTableBits) throw std::invalid_argument("bpem oracle uses table permutations: n <= 16");
                oracle = bpem::make_bpem_oracle(n, s);
            } else if (oracle_name == "random") {
                oracle = bpem::make_random_oracle(n, s);
            } else if (oracle_name == "identity") {
                oracle = bpem::EncryptionOracle(2 * n, [](const bpem::BitString& m) { return m; });
            } else {
                if (n != 128) throw std::invalid_argument("em256aes oracle needs --n 128");
                bpem::Rng rng(s);
                const auto kf = key_path.empty() ? random_key_file(bpem::BpemVariant::ThreeKeyTwoPerm, 128, rng)
                                                 : load_key_file(key_path);
                auto cipher = std::make_shared<bpem::Em256Aes>(load_cipher(kf));
                oracle = bpem::EncryptionOracle(256, [cipher](const bpem::BitString& m) { return cipher->encrypt_block(m); });
            }
            const auto omegas = bpem::default_omegas(n, attack_q);
            const auto r = bpem::run_attack(*oracle, n, rho, omegas);
            json idx = nullptr;
            if (r.colliding_indices) idx = {r.colliding_indices->first, r.colliding_indices->second};
            print_json({{"oracle", oracle_name},
                        {"n", r.n},
                        {"q", r.q},
                        {"rho", r.rho.to_hex()},
                        {"seed", s},
                        {"collision_found", r.collision_found},
                        {"colliding_indices", idx},
                        {"verdict", std::string(bpem::to_string(r.verdict))}});
        } else if (*advantage) {
            const auto e = bpem::estimate_advantage(adv_n, adv_q, trials, seed.value_or(0));
            auto j = estimate_json(e);
            j["seed"] = seed.value_or(0);
            json bounds = json::object();
            const double qd = static_cast<double>(adv_q);
            for (const auto v : {bpem::BpemVariant::ThreeKeyTwoPerm, bpem::BpemVariant::ThreeKeyOnePerm,
                                 bpem::BpemVariant::OneKeyTwoPerm, bpem::BpemVariant::OneKeyOnePerm}) {
                bounds[std::string(bpem::to_string(v))] = bpem::sprp_upper_bound(v, adv_n, qd, public_queries, public_queries);
            }
            j["public_queries"] = public_queries;
            j["reference_upper_bounds"] = bounds;
            print_json(j);
        } else if (*kat) {
            auto in = open_text(kat_path);
            const auto vectors = bpem::read_kat_file(in);
            const auto outcome = bpem::verify_kats(vectors);
            if (as_json) {
                print_json({{"total", outcome.total}, {"failures", outcome.failures}, {"ok", outcome.ok()}});
            } else {
                std::cout << "kat: " << (outcome.total - outcome.failures.size()) << '/' << outcome.total << " passed\n";
                for (const auto i : outcome.failures) std::cout << "  vector " << i << " FAILED\n";
            }
            if (!outcome.ok()) return kVerify;
        } else if (*bench) {
            bpem::Rng rng(seed.value_or(0));
            const auto kf = key_path.empty() ? random_key_file(bpem::BpemVariant::ThreeKeyTwoPerm, 128, rng)
                                             : load_key_file(key_path);
            const auto cipher = load_cipher(kf);
            const auto mode = mode_name == "parallel" ? bpem::BenchMode::Parallel : bpem::BenchMode::Serial;
            const auto r = bpem::benchmark(cipher, mode, bytes, repetitions);
            print_json({{"mode", std::string(bpem::to_string(r.mode))},
                        {"bytes", r.bytes},
                        {"em256aes_Bps", r.em256aes_bytes_per_second},
                        {"aes_Bps", r.aes_bytes_per_second},
                        {"ratio", r.ratio},
                        {"aes_ni", bpem::Aes128::hardware_available()}});
        }
    } catch (const IoError& e) {
        std::cerr << "bpem: " << e.what() << '\n';
        return kIo;
    } catch (const bpem::FormatError& e) {
        std::cerr << "bpem: " << e.what() << '\n';
        return kIo;
    } catch (const bpem::PaddingError& e) {
        std::cerr << "bpem: " << e.what() << '\n';
        return kVerify;
    } catch (const std::invalid_argument& e) {
        std::cerr << "bpem: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "bpem: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}
