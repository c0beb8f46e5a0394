#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ksns/field_io.hpp"
#include "ksns/random_fields.hpp"
#include "ksns/runner.hpp"

using namespace ksns;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config parses with defaults and dumps idempotently") {
    ExperimentConfig cfg = parse_config("mode = fp\nn = 16\nL = 8\nT = 0.01\n");
    CHECK(cfg.dim == 2);
    CHECK(cfg.dt == 0.0);  // auto
    CHECK(cfg.sample_every == 1);

    std::string d1 = dump_config(cfg);
    ExperimentConfig cfg2 = parse_config(d1);
    CHECK(dump_config(cfg2) == d1);
    CHECK(config_hash(cfg) == config_hash(cfg2));
}

TEST_CASE("errors carry line numbers and constraints") {
    CHECK_THROWS_WITH_AS(parse_config("mode = fp\nbogus = 3\n"),
                         doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("n = abc\n"),
                         doctest::Contains("malformed"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("mode = fp\nalpha = 2\n"),
                         doctest::Contains("alpha > d"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = w2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = nonsense\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = fp\nn = 12\n"), ConfigError);
}

TEST_CASE("omitted dt resolves to a CFL-safe default") {
    ExperimentConfig cfg = parse_config(
        "mode = fp\ndim = 2\nn = 64\nL = 8\nT = 0.02\ndrift = random_smooth 0.8 3\n");
    FpInstance inst = build_fp_instance(cfg);
    CHECK(inst.dt_defaulted);
    CHECK(inst.dt > 0.0);
    double h = inst.grid.h();
    double vmax = inst.drift.at(0).max_norm();
    CHECK(inst.dt <= h * h / (2.0 * 2.0));
    CHECK(inst.dt <= h / (2.0 * vmax));
}

TEST_CASE("localization guard rejects data leaking into the boundary ring") {
    ExperimentConfig cfg = parse_config(
        "mode = fp\ndim = 2\nn = 32\nL = 8\nT = 0.01\nrho0 = gaussian 2.5\n");
    CHECK_THROWS_WITH_AS(build_fp_instance(cfg), doctest::Contains("boundary ring"),
                         ConfigError);
}

TEST_CASE("deterministic artifacts: byte-identical reruns") {
    const std::string text =
        "mode = fp\n"
        "dim = 1\n"
        "n = 64\n"
        "L = 8\n"
        "T = 0.02\n"
        "sample_every = 2\n"
        "seed = 42\n"
        "drift = random_smooth 0.5 2\n"
        "rho0 = gaussian 0.35\n"
        "c_fit = 2\n";
    ExperimentConfig cfg = parse_config(text);
    auto base = std::filesystem::temp_directory_path() / "ksns_det";
    std::filesystem::remove_all(base);
    std::ostringstream sink;
    int rc1 = run_experiment(cfg, (base / "a").string(), sink);
    int rc2 = run_experiment(cfg, (base / "b").string(), sink);
    CHECK(rc1 == rc2);
    CHECK(slurp(base / "a" / "traj.csv") == slurp(base / "b" / "traj.csv"));
    CHECK(slurp(base / "a" / "ledger.csv") == slurp(base / "b" / "ledger.csv"));
    CHECK(slurp(base / "a" / "config.resolved") == slurp(base / "b" / "config.resolved"));
    std::filesystem::remove_all(base);
}

TEST_CASE("contraction mode produces a report with shrinking differences") {
    ExperimentConfig cfg = parse_config(
        "mode = contraction\ndim = 2\nn = 64\nL = 8\nT = 0.04\nsweeps = 4\nseed = 3\n"
        "rho0 = gaussian 0.45\nc0 = gaussian 0.5 1.5 0.5\nu0 = taylor_green 0.05\n"
        "phi = gaussian 0.2 1.5\nchi = poly 0.2\nkappa = poly 0 0.5\nM = 60\n");
    auto base = std::filesystem::temp_directory_path() / "ksns_contraction";
    std::filesystem::remove_all(base);
    std::ostringstream sink;
    int rc = run_experiment(cfg, base.string(), sink);
    CHECK(rc == 0);
    std::string csv = slurp(base / "contraction.csv");
    CHECK(csv.find("k,D_rho,D_u,D_c,D_total,ratio") != std::string::npos);
    CHECK(csv.find("weak=1") != std::string::npos);
    std::filesystem::remove_all(base);
}

TEST_CASE("w2 mode on identical files prints zero") {
    TorusGrid g(2, 16, 4.0);
    DensityField rho = gaussian_density(g, 0.4);
    auto base = std::filesystem::temp_directory_path() / "ksns_w2";
    std::filesystem::create_directories(base);
    const std::string fa = (base / "a.field").string();
    write_field(fa, rho.field(), 0.0);
    CHECK(w2_files(fa, fa, "exact", 0.0) == 0.0);
    CHECK(w2_files(fa, fa, "auto", 0.0) == 0.0);
    std::filesystem::remove_all(base);
}

TEST_CASE("ledger mode recomputes checks from stored fields") {
    const std::string text =
        "mode = fp\n"
        "dim = 1\n"
        "n = 64\n"
        "L = 8\n"
        "T = 0.02\n"
        "sample_every = 2\n"
        "seed = 5\n"
        "drift = random_smooth 0.4 2\n"
        "rho0 = gaussian 0.35\n"
        "c_fit = 2\n"
        "dump_fields = 1\n";
    ExperimentConfig cfg = parse_config(text);
    auto base = std::filesystem::temp_directory_path() / "ksns_ledger";
    std::filesystem::remove_all(base);
    std::ostringstream sink;
    int rc = run_experiment(cfg, (base / "run").string(), sink);
    CHECK(rc == 0);

    ExperimentConfig lcfg;
    lcfg.mode = "ledger";
    lcfg.traj_dir = (base / "run").string();
    int rc2 = run_experiment(lcfg, (base / "re").string(), sink);
    CHECK(rc2 == 0);
    CHECK(std::filesystem::exists(base / "re" / "ledger.csv"));
    std::filesystem::remove_all(base);
}
