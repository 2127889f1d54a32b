#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "srsim/config.hpp"
#include "srsim/csv.hpp"

using namespace srsim;
namespace fs = std::filesystem;

TEST_CASE("run config parsing and echo") {
    SUBCASE("values, comments, whitespace") {
        const auto cfg = io::RunConfig::from_text(
            "# comment\n"
            "scan.nx=64\n"
            "  scan.dwell_ms=0.5  # trailing comment\n"
            "scan.squeezer=off\n");
        CHECK(cfg.get_long("scan.nx", 100) == 64);
        CHECK(cfg.get_double("scan.dwell_ms", 1.0) == doctest::Approx(0.5));
        CHECK_FALSE(cfg.get_bool("scan.squeezer", true));
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_WITH_AS((void)io::RunConfig::from_text("scan.frobnicate=1\n"),
                             "unknown config key: scan.frobnicate", std::runtime_error);
    }
    SUBCASE("bad values are rejected") {
        const auto cfg = io::RunConfig::from_text("scan.nx=banana\n");
        CHECK_THROWS_AS((void)cfg.get_long("scan.nx", 1), std::runtime_error);
        const auto cfg2 = io::RunConfig::from_text("scan.squeezer=maybe\n");
        CHECK_THROWS_AS((void)cfg2.get_bool("scan.squeezer", true), std::runtime_error);
    }
    SUBCASE("resolved echo records applied defaults") {
        io::RunConfig cfg;
        (void)cfg.get_double("model.eta", 0.55);
        (void)cfg.get_bool("scan.squeezer", true);
        const auto text = cfg.resolved_text();
        CHECK(text.find("model.eta=0.55") != std::string::npos);
        CHECK(text.find("scan.squeezer=on") != std::string::npos);
    }
    SUBCASE("hash is stable and value-sensitive") {
        io::RunConfig a, b;
        (void)a.get_double("model.w0", 0.855);
        (void)b.get_double("model.w0", 0.855);
        CHECK(a.resolved_hash() == b.resolved_hash());
        io::RunConfig c;
        c.set("model.w0", "0.9");
        (void)c.get_double("model.w0", 0.855);
        CHECK(c.resolved_hash() != a.resolved_hash());
    }
}

// ---------------------------------------------------------------------------
// end-to-end CLI checks; SRSIM_BIN is set by ctest
// ---------------------------------------------------------------------------
namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRunner {
    std::string bin;
    fs::path work;

    int run(const std::string& args) const {
        const std::string cmd = bin + " " + args + " > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    }
};

}  // namespace

TEST_CASE("cli end-to-end") {
    const char* bin = std::getenv("SRSIM_BIN");
    if (!bin) {
        MESSAGE("SRSIM_BIN not set; skipping CLI end-to-end checks");
        return;
    }
    CliRunner cli{bin, fs::temp_directory_path() / "srsim_cli_tests"};
    fs::remove_all(cli.work);
    fs::create_directories(cli.work);
    const auto w = cli.work;

    SUBCASE("snr-sweep argmax lands on 0.5 within the grid step") {
        REQUIRE(cli.run("snr-sweep --out " + (w / "snr").string()) == 0);
        const auto csv = slurp(w / "snr" / "snr_sweep.csv");
        double best_r = 0, best_s = -1;
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            double r, s, db;
            REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &r, &s, &db) == 3);
            if (s > best_s) {
                best_s = s;
                best_r = r;
            }
        }
        CHECK(std::abs(best_r - 0.5) < 0.02);
        CHECK(fs::exists(w / "snr" / "raman_spectra.csv"));
        CHECK(fs::exists(w / "snr" / "resolved-config.txt"));
    }
    SUBCASE("outputs are byte-identical for the same config and seed") {
        REQUIRE(cli.run("squeeze-sweep --seed 3 --out " + (w / "sq1").string()) == 0);
        REQUIRE(cli.run("squeeze-sweep --seed 3 --out " + (w / "sq2").string()) == 0);
        CHECK(slurp(w / "sq1" / "squeeze_curve.csv") == slurp(w / "sq2" / "squeeze_curve.csv"));

        REQUIRE(cli.run("dwell --demo --seed 9 --out " + (w / "dw1").string()) == 0);
        REQUIRE(cli.run("dwell --demo --seed 9 --out " + (w / "dw2").string()) == 0);
        CHECK(slurp(w / "dw1" / "dwell_curve.csv") == slurp(w / "dw2" / "dwell_curve.csv"));
    }
    SUBCASE("fit-opa demo round-trips and reports the model") {
        REQUIRE(cli.run("fit-opa --demo --out " + (w / "fit").string()) == 0);
        const auto model = slurp(w / "fit" / "model.txt");
        CHECK(model.find("w0=0.855") != std::string::npos);
        CHECK(model.find("converged=1") != std::string::npos);
    }
    SUBCASE("malformed csv exits with a usage code") {
        const auto bad = w / "bad.csv";
        io::atomic_write_text(bad.string(), "r,intensity\n0.0,1.0\n0.1,two\n");
        CHECK(cli.run("fit-opa --input " + bad.string() + " --out " + (w / "fbad").string()) ==
              64);
        const auto headerless = w / "bad2.csv";
        io::atomic_write_text(headerless.string(), "r,wrong\n0,1\n");
        CHECK(cli.run("fit-opa --input " + headerless.string() + " --out " +
                      (w / "fbad2").string()) == 64);
    }
    SUBCASE("unknown config key exits with a usage code") {
        const auto cfg = w / "bad.cfg";
        io::atomic_write_text(cfg.string(), "bogus.key=1\n");
        CHECK(cli.run("snr-sweep --config " + cfg.string() + " --out " +
                      (w / "snrbad").string()) == 64);
    }
    SUBCASE("dwell demo with variance reduction lands near the expected minimum") {
        const auto cfg = w / "dwell.cfg";
        io::atomic_write_text(cfg.string(), "dwell.all_segments=on\nseed=9\n");
        REQUIRE(cli.run("dwell --demo --config " + cfg.string() + " --out " +
                        (w / "dw3").string()) == 0);
        const auto summary = slurp(w / "dw3" / "summary.txt");
        double tau = 0;
        const auto pos = summary.find("tau_min_s=");
        REQUIRE(pos != std::string::npos);
        REQUIRE(std::sscanf(summary.c_str() + pos, "tau_min_s=%lf", &tau) == 1);
        CHECK(std::abs(tau - 3.05e-6) < 0.46e-6);
        CHECK(summary.find("video_50hz_side=") != std::string::npos);
    }
}
