#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(BPEM_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("bpem_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream(path, std::ios::binary) << data;
}

}  // namespace

TEST_CASE("keygen") {
    TempDir dir;
    REQUIRE(run("keygen --variant one-key --n 128 --seed 7 -o " + (dir / "a.key")).code == 0);
    REQUIRE(run("keygen --variant one-key --n 128 --seed 7 -o " + (dir / "b.key")).code == 0);
    CHECK(slurp(dir / "a.key") == slurp(dir / "b.key"));
    CHECK(slurp(dir / "a.key").rfind("bpem-keys variant=one-key/two-perm n=128\n", 0) == 0);

    const auto three = run("keygen --variant three-key --n 128 --seed 1");
    REQUIRE(three.code == 0);
    for (const char* name : {"\nk0=", "\nk1=", "\nk2="}) {
        const auto at = three.out.find(name);
        REQUIRE(at != std::string::npos);
        const auto end = three.out.find('\n', at + 1);
        CHECK(end - at - 4 == 64);  // 256-bit key
    }
    CHECK(run("keygen --variant three-key --n 128 --seed 2").out != three.out);
    CHECK(run("keygen --variant bogus").code == 1);
    CHECK(run("keygen --n 0").code == 1);
    CHECK(run("keygen --seed 1 -o /nonexistent/dir/k").code == 2);
    const auto js = nlohmann::json::parse(run("keygen --variant one-key/one-perm --n 8 --seed 1 --json -o " + (dir / "c.key")).out);
    CHECK(js["variant"] == "one-key/one-perm");
    CHECK(js["n"] == 8);
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
}

TEST_CASE("encrypt and decrypt files") {
    TempDir dir;
    REQUIRE(run("keygen --seed 3 -o " + (dir / "k")).code == 0);
    std::string data(1000, '\0');
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<char>((i * 7919) >> 3);
    write_file(dir / "p", data);
    REQUIRE(run("encrypt -k " + (dir / "k") + " -i " + (dir / "p") + " -o " + (dir / "c")).code == 0);
    CHECK(slurp(dir / "c").size() == 1024);
    CHECK(slurp(dir / "c") != data.substr(0, 1000));
    REQUIRE(run("decrypt -k " + (dir / "k") + " -i " + (dir / "c") + " -o " + (dir / "d")).code == 0);
    CHECK(slurp(dir / "d") == data);

    write_file(dir / "t", slurp(dir / "c").substr(0, 33));
    CHECK(run("decrypt -k " + (dir / "k") + " -i " + (dir / "t") + " -o " + (dir / "x")).code == 3);

    write_file(dir / "e", "");
    REQUIRE(run("encrypt -k " + (dir / "k") + " -i " + (dir / "e") + " -o " + (dir / "ec")).code == 0);
    CHECK(slurp(dir / "ec").size() == 32);

    // Wrong key: padding check fails (or, rarely, garbage comes back).
    REQUIRE(run("keygen --seed 4 -o " + (dir / "k2")).code == 0);
    const auto wrong = run("decrypt -k " + (dir / "k2") + " -i " + (dir / "c") + " -o " + (dir / "w"));
    CHECK((wrong.code == 3 || slurp(dir / "w") != data));

    write_file(dir / "bad.key", "bpem-keys variant=one-key n=128\nk=zz\n");
    CHECK(run("encrypt -k " + (dir / "bad.key") + " -i " + (dir / "p") + " -o " + (dir / "y")).code == 2);
    REQUIRE(run("keygen --n 8 --seed 1 -o " + (dir / "small.key")).code == 0);
    CHECK(run("encrypt -k " + (dir / "small.key") + " -i " + (dir / "p") + " -o " + (dir / "y")).code == 2);
    CHECK(run("encrypt -k " + (dir / "missing") + " -i " + (dir / "p") + " -o " + (dir / "y")).code == 2);
    CHECK(run("encrypt -i " + (dir / "p")).code == 1);
}

TEST_CASE("balance-check and xor-profile") {
    TempDir dir;
    std::string id = "perm n=4\n";
    for (int i = 0; i < 16; ++i) id += "0" + std::string(1, "0123456789abcdef"[i]) + "\n";
    write_file(dir / "id", id);
    const auto bc = run("balance-check " + (dir / "id"));
    CHECK(bc.code == 0);
    CHECK(bc.out == "balanced: no\n");
    CHECK(run("xor-profile " + (dir / "id")).out == "multiplicity,count\n16,1\n");

    // x -> 2x in GF(16) with x^4 + x + 1: balanced since 1 + 2 = 3 is invertible.
    std::string mul = "perm n=4\n";
    for (int x = 0; x < 16; ++x) {
        int y = x << 1;
        if (y & 0x10) y ^= 0x13;
        char line[8];
        std::snprintf(line, sizeof line, "%02x\n", y);
        mul += line;
    }
    write_file(dir / "mul", mul);
    CHECK(run("balance-check " + (dir / "mul")).out == "balanced: yes\n");
    CHECK(run("xor-profile " + (dir / "mul")).out == "multiplicity,count\n1,16\n");
    const auto j = nlohmann::json::parse(run("xor-profile --json " + (dir / "mul")).out);
    CHECK(j["distinct_count"] == 16);
    CHECK(nlohmann::json::parse(run("balance-check --json " + (dir / "mul")).out)["balanced"] == true);

    write_file(dir / "bad", "perm n=2\n00\n00\n01\n02\n");
    CHECK(run("balance-check " + (dir / "bad")).code == 2);
    CHECK(run("balance-check " + (dir / "nothing")).code == 2);
}

TEST_CASE("attack") {
    const auto ident = nlohmann::json::parse(run("attack --oracle identity --n 8 --q 2").out);
    CHECK(ident["collision_found"] == true);
    CHECK(ident["colliding_indices"] == nlohmann::json::array({1, 2}));
    CHECK(ident["verdict"] == "looks-random");

    const auto b = run("attack --oracle bpem --n 8 --q 256 --seed 5 --rho a5");
    REQUIRE(b.code == 0);
    const auto bj = nlohmann::json::parse(b.out);
    CHECK(bj["collision_found"] == false);
    CHECK(bj["colliding_indices"].is_null());
    CHECK(bj["verdict"] == "looks-bpem");
    CHECK(bj["rho"] == "a5");
    CHECK(run("attack --oracle bpem --n 8 --q 256 --seed 5 --rho a5").out == b.out);

    const auto r = nlohmann::json::parse(run("attack --oracle random --n 8 --q 256 --seed 5").out);
    CHECK(r["collision_found"] == true);
    const auto e = nlohmann::json::parse(run("attack --oracle em256aes --n 128 --q 2000 --seed 9").out);
    CHECK(e["collision_found"] == false);

    CHECK(run("attack --oracle em256aes --n 8").code == 1);
    CHECK(run("attack --oracle bpem --n 8 --q 1").code == 1);
    CHECK(run("attack --oracle nope").code == 1);
}

TEST_CASE("advantage") {
    const auto a = run("advantage --n 8 --q 32 --trials 2000 --seed 1");
    REQUIRE(a.code == 0);
    const auto j = nlohmann::json::parse(a.out);
    CHECK(j["bpem_collision_rate"] == 0.0);
    CHECK(j["trials"] == 2000);
    CHECK(j["analytic_lower_bound"].get<double>() == doctest::Approx(0.85485).epsilon(1e-4));
    CHECK(j["empirical_advantage"].get<double>() == doctest::Approx(j["random_collision_rate"].get<double>()));
    CHECK(j["reference_upper_bounds"].size() == 4);
    CHECK(run("advantage --n 8 --q 32 --trials 2000 --seed 1").out == a.out);

    const auto p = nlohmann::json::parse(run("advantage --n 6 --q 4 --trials 10 --public-queries 8").out);
    CHECK(p["reference_upper_bounds"]["three-key/two-perm"].get<double>() == doctest::Approx(4.0 * (52 + 64) / 64.0));
    CHECK(run("advantage --n 13").code == 1);
    CHECK(run("advantage --n 4 --q 17").code == 1);
}

TEST_CASE("kat") {
    const std::string kat = BPEM_TEST_DATA_DIR "/em256aes_kat.txt";
    const auto ok = run("kat --verify " + kat);
    CHECK(ok.code == 0);
    CHECK(ok.out.find("13/13 passed") != std::string::npos);

    TempDir dir;
    std::string text = slurp(kat);
    const auto at = text.rfind("ct=") + 3;
    text[at] = text[at] == '0' ? '1' : '0';
    write_file(dir / "bad", text);
    const auto bad = run("kat --json --verify " + (dir / "bad"));
    CHECK(bad.code == 3);
    CHECK(nlohmann::json::parse(bad.out)["ok"] == false);
    write_file(dir / "junk", "ell1=00\n");
    CHECK(run("kat --verify " + (dir / "junk")).code == 2);
}

TEST_CASE("bench") {
    const auto b = run("bench --mode parallel --bytes 1048576 --repetitions 1");
    REQUIRE(b.code == 0);
    const auto j = nlohmann::json::parse(b.out);
    for (const char* k : {"mode", "bytes", "em256aes_Bps", "aes_Bps", "ratio"}) CHECK(j.contains(k));
    CHECK(j["mode"] == "parallel");
    CHECK(run("bench --bytes 1000").code == 1);
    CHECK(run("bench --mode sideways").code == 1);
}
