#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "qkgeo/cli_config.hpp"

using namespace qkgeo;
using cli::ConfigError;
using cli::RunConfig;

TEST_CASE("string helpers: trim and list splitting") {
    CHECK(cli::trim("  a b \t\n") == "a b");
    CHECK(cli::trim("\r\n") == "");
    auto parts = cli::split_list(" toda , einstein ,, killing ", ',');
    REQUIRE(parts.size() == 3);
    CHECK(parts[0] == "toda");
    CHECK(parts[1] == "einstein");
    CHECK(parts[2] == "killing");
    CHECK(cli::split_list("", ',').empty());
}

TEST_CASE("numeric parsing rejects malformed input with a clear error") {
    CHECK(cli::parse_double("-1.5e-3", "x") == doctest::Approx(-1.5e-3));
    CHECK_THROWS_AS((void)cli::parse_double("1.5abc", "x"), ConfigError);
    CHECK_THROWS_AS((void)cli::parse_double("", "x"), ConfigError);
}

TEST_CASE("sweep specifications") {
    cli::SweepSpec sw = cli::parse_sweep("curvnorm:rho:0.5:4:16");
    CHECK(sw.quantity == "curvnorm");
    CHECK(sw.param == "rho");
    CHECK(sw.lo == 0.5);
    CHECK(sw.hi == 4.0);
    CHECK(sw.steps == 16);
    CHECK_THROWS_AS((void)cli::parse_sweep("curvnorm:rho:0.5:4"), ConfigError);
    CHECK_THROWS_AS((void)cli::parse_sweep("curvnorm:rho:lo:4:16"), ConfigError);
    CHECK_THROWS_AS((void)cli::parse_sweep("curvnorm:rho:0.5:4:-2"), ConfigError);
}

TEST_CASE("tolerance override items") {
    std::map<std::string, double> tol;
    cli::parse_tol_item("einstein=1e-8", tol);
    cli::parse_tol_item(" toda = 2e-9 ", tol);
    CHECK(tol.at("einstein") == 1e-8);
    CHECK(tol.at("toda") == 2e-9);
    CHECK_THROWS_AS(cli::parse_tol_item("einstein", tol), ConfigError);
    CHECK_THROWS_AS(cli::parse_tol_item("einstein=-1e-8", tol), ConfigError);
}

TEST_CASE("configuration files round-trip every documented key") {
    const std::string path = "qkgeo_test_config.tmp";
    {
        std::ofstream out(path);
        out << "# full configuration exercise\n"
            << "target = gabc:1,1,1,-1 ; bf:0,1,1,-1  # two models\n"
            << "checks = toda, einstein\n"
            << "tol = toda=1e-9, einstein=1e-7\n"
            << "seed = 7\n"
            << "samples = 5\n"
            << "out = reports.json\n"
            << "format = json\n"
            << "sweep = curvnorm:rho:1:3:8\n";
    }
    RunConfig cfg;
    cli::load_config_file(path, cfg);
    std::remove(path.c_str());
    REQUIRE(cfg.targets.size() == 2);
    CHECK(cfg.targets[0] == "gabc:1,1,1,-1");
    CHECK(cfg.targets[1] == "bf:0,1,1,-1");
    REQUIRE(cfg.checks.size() == 2);
    CHECK(cfg.checks[1] == "einstein");
    CHECK(cfg.tol_overrides.at("toda") == 1e-9);
    CHECK(cfg.seed == 7);
    CHECK(cfg.samples == 5);
    CHECK(cfg.out_path == "reports.json");
    CHECK(cfg.format == "json");
    REQUIRE(cfg.sweep.has_value());
    CHECK(cfg.sweep->steps == 8);

    {
        std::ofstream out(path);
        out << "tolerance = 1e-9\n";  // not a documented key
    }
    RunConfig cfg2;
    CHECK_THROWS_AS(cli::load_config_file(path, cfg2), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(cli::load_config_file("does_not_exist.cfg", cfg2), ConfigError);
}

TEST_CASE("the environment seed wins over config and defaults") {
    RunConfig cfg;
    cfg.seed = 42;
    setenv("QKGEO_SEED", "1234", 1);
    cli::apply_env_seed(cfg);
    CHECK(cfg.seed == 1234);
    setenv("QKGEO_SEED", "", 1);
    cfg.seed = 9;
    cli::apply_env_seed(cfg);  // empty value is ignored
    CHECK(cfg.seed == 9);
    setenv("QKGEO_SEED", "abc", 1);
    CHECK_THROWS_AS(cli::apply_env_seed(cfg), ConfigError);
    unsetenv("QKGEO_SEED");
}

TEST_CASE("serialized reports re-summarize to the identical text") {
    verify::CheckSpec spec;
    spec.name = "einstein";
    spec.target = "gabc:0,1,1,-1";
    verify::CheckSpec spec2;
    spec2.name = "curvnorm";
    spec2.target = "gabc:0,1,1,-1";
    std::vector<verify::Report> reports = verify::run_suite({spec, spec2});
    REQUIRE(reports.size() == 2);

    RunConfig cfg;
    cfg.targets = {spec.target};
    cfg.checks = {spec.name, spec2.name};
    nlohmann::json doc = cli::reports_to_json(cfg, reports);
    CHECK(doc.at("version") == "1");
    CHECK(doc.at("config").at("seed") == 42u);
    REQUIRE(doc.at("reports").size() == 2);
    CHECK(doc.at("reports")[0].at("verdict") == "pass");

    const std::string text = cli::summarize(reports);
    CHECK(cli::summarize_json(doc) == text);
    CHECK(text.find("pass  einstein  gabc:0,1,1,-1") != std::string::npos);

    // round-trip through an actual serialization
    nlohmann::json reparsed = nlohmann::json::parse(doc.dump());
    CHECK(cli::summarize_json(reparsed) == text);
}
