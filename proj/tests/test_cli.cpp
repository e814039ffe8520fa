#include <doctest.h>

#include <cstdio>
#include <unistd.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "spinchi/io.hpp"

// end-to-end checks of the command-line tool; the binary path arrives in the
// SPINCHI_CLI environment variable (set by ctest)

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("SPINCHI_CLI");
    REQUIRE_MESSAGE(p != nullptr, "SPINCHI_CLI must point at the spinchi binary");
    return p;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("spinchi_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("cli levels emits 16 energy columns") {
    TempDir dir;
    const std::string out = dir.file("levels.csv");
    const int code = run("levels --A 0.2945 --g 19.0 --delta 0.015 --bmax-mT 200 "
                         "--n 201 --out " + out);
    CHECK(code == 0);
    std::ifstream in(out);
    std::string line;
    // skip provenance comments
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {}
    int commas = 0;
    for (char ch : line) commas += ch == ',';
    CHECK(commas == 16); // B_mT plus 16 energies
    CHECK(line.rfind("B_mT,", 0) == 0);
}

TEST_CASE("cli chi produces a readable isolated curve") {
    TempDir dir;
    const std::string out = dir.file("chi.csv");
    const int code = run("chi --kind isolated --T 2.1 --probe-mT 0.2 --n 201 --out " + out);
    REQUIRE(code == 0);
    const auto s = spinchi::read_spectrum(out);
    CHECK(s.field_mT.size() == 201);
}

TEST_CASE("cli exit codes") {
    TempDir dir;
    CHECK(run("nonsense") == 2);                      // usage error
    CHECK(run("chi") == 2);                           // missing required --out
    CHECK(run("--help >/dev/null") == 0);             // help is success
    CHECK(run("fit-peaks --data " + dir.file("absent.csv")) == 1); // runtime error
    // unparseable config value
    const std::string cfg = dir.file("bad.cfg");
    std::ofstream(cfg) << "run.T_K = banana\n";
    CHECK(run("spectrum --config " + cfg + " --out " + dir.file("x.csv")) == 1);
}

TEST_CASE("cli spectrum runs are byte-identical") {
    TempDir dir;
    const std::string a = dir.file("a.csv"), b = dir.file("b.csv");
    const std::string args = "spectrum --T 2.1 --probe-mT 0.2 --bmax-mT 200 --n 401 --out ";
    REQUIRE(run(args + a) == 0);
    REQUIRE(run(args + b) == 0);
    const auto ta = read_text(a), tb = read_text(b);
    CHECK(!ta.empty());
    CHECK(ta == tb);
}

TEST_CASE("cli fit-weights recovers the generating weights") {
    TempDir dir;
    const std::string data = dir.file("data.csv");
    REQUIRE(run("spectrum --T 2.1 --bmax-mT 200 --n 1001 --out " + data) == 0);
    const std::string report = dir.file("report.txt");
    const std::string cmd = cli_path() + " fit-weights --data " + data +
                            " --T 2.1 > " + report + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const auto text = read_text(report);
    auto value_of = [&](const std::string& name) {
        const auto pos = text.find(name + " = ");
        REQUIRE(pos != std::string::npos);
        return std::stod(text.substr(pos + name.size() + 3));
    };
    CHECK(value_of("f1") == doctest::Approx(0.511).epsilon(1e-9));
    CHECK(value_of("f2") == doctest::Approx(0.352).epsilon(1e-9));
    CHECK(value_of("f0") == doctest::Approx(0.137).epsilon(1e-7));
}

TEST_CASE("cli flag overrides beat the config file") {
    TempDir dir;
    const std::string cfg = dir.file("t4.cfg");
    std::ofstream(cfg) << "run.T_K = 4.0\ngrid.points = 51\n";
    const std::string out = dir.file("chi.csv");
    REQUIRE(run("chi --config " + cfg + " --T 2.1 --out " + out) == 0);
    const auto text = read_text(out);
    CHECK(text.find("run.T_K = 2.1") != std::string::npos); // flag wins
    const auto s = spinchi::read_spectrum(out);
    CHECK(s.field_mT.size() == 51); // config value survives where no flag given
}

TEST_CASE("cli honours the output-directory override") {
    TempDir dir;
    const std::string sub = (dir.path / "outdir").string();
    fs::create_directories(sub);
    const std::string cmd = "SPINCHI_OUTDIR=" + sub + " " + cli_path() +
                            " chi --n 21 --out rel.csv 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(fs::path(sub) / "rel.csv"));
}

TEST_CASE("cli fit-peaks refines the hyperfine constant") {
    TempDir dir;
    const std::string data = dir.file("data.csv");
    REQUIRE(run("chi --species apical --T 2.1 --bmax-mT 200 --n 2001 --out " + data) == 0);
    const std::string report = dir.file("peaks.txt");
    const std::string cmd = cli_path() + " fit-peaks --data " + data +
                            " --fit-A > " + report + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const auto text = read_text(report);
    CHECK(text.find("field_mT,height,width_mT") != std::string::npos);
    const auto pos = text.find("A_K = ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(text.substr(pos + 6)) == doctest::Approx(0.2945).epsilon(1e-4));
}

TEST_CASE("cli emits SI volume units when a number density is configured") {
    TempDir dir;
    const std::string cfg = dir.file("si.cfg");
    std::ofstream(cfg) << "material.number_density_per_m3 = 2.4e25\ngrid.points = 21\n";
    const std::string out = dir.file("si.csv");
    REQUIRE(run("spectrum --config " + cfg + " --out " + out) == 0);
    const auto text = read_text(out);
    CHECK(text.find("SI volume (dimensionless)") != std::string::npos);
}

TEST_CASE("cli reports the imaginary column as a diagnostic") {
    TempDir dir;
    const std::string data = dir.file("data.csv");
    REQUIRE(run("spectrum --T 2.1 --bmax-mT 200 --n 801 --out " + data) == 0);
    // append an imaginary column a few percent of the real part
    const auto s = spinchi::read_spectrum(data);
    std::ofstream out(dir.file("imag.csv"), std::ios::binary);
    out << "B_mT,chi_real,chi_imag\n";
    for (std::size_t i = 0; i < s.field_mT.size(); ++i)
        out << spinchi::format_double(s.field_mT[i]) << ","
            << spinchi::format_double(s.chi_real[i]) << ","
            << spinchi::format_double(0.03 * s.chi_real[i]) << "\n";
    out.close();
    const std::string report = dir.file("report.txt");
    const std::string cmd = cli_path() + " fit-weights --data " + dir.file("imag.csv") +
                            " --T 2.1 > " + report + " 2>/dev/null";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const auto text = read_text(report);
    CHECK(text.find("chi_imag diagnostic") != std::string::npos);
    CHECK(text.find("0.03") != std::string::npos);
}

TEST_CASE("cli plateau covers the three plateaus") {
    TempDir dir;
    const std::string out = dir.file("plateau.csv");
    REQUIRE(run("plateau --chi-T 1.0 --chi-S 0.6 --chi-I 0.25 --tau1 1.0 --tau2 1e-5 "
                "--wmin 1e-4 --wmax 1e9 --n-omega 53 --out " + out) == 0);
    const auto text = read_text(out);
    CHECK(text.find("omega_rad_per_s,chi_real,chi_imag") != std::string::npos);
}
