#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stosew/harness.hpp"
#include "stosew/toml.hpp"

using namespace stosew;

TEST_CASE("toml: scalars, tables, arrays, comments") {
    auto t = toml::parse("a = 1\nb = 2.5 # trailing\n[sec]\nc = \"hi # not a comment\"\n"
                         "flag = true\narr = [1, 2.5, 3]\n");
    CHECK(t.at("a").as_int() == 1);
    CHECK(t.at("b").as_double() == 2.5);
    CHECK(t.at("sec.c").as_string() == "hi # not a comment");
    CHECK(t.at("sec.flag").as_bool());
    CHECK(t.at("sec.arr").as_array() == std::vector<double>{1.0, 2.5, 3.0});
}

TEST_CASE("toml: malformed input throws") {
    CHECK_THROWS_AS(toml::parse("key"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = "), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = [1, 2"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("[sec\na = 1"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = 1\na = 2"), toml::ParseError);
    CHECK_THROWS_AS(toml::parse("a = \"unterminated"), toml::ParseError);
}

TEST_CASE("harness: config validation exit codes") {
    // missing seed
    auto t1 = toml::parse("experiment = \"qv-brownian\"\n");
    CHECK(run_config(t1, "").exit_code == 2);
    // unknown experiment
    auto t2 = toml::parse("experiment = \"nope\"\nseed = 1\n");
    CHECK(run_config(t2, "").exit_code == 2);
    // unknown top-level key
    auto t3 = toml::parse("experiment = \"qv-brownian\"\nseed = 1\nbogus = 2\n");
    CHECK(run_config(t3, "").exit_code == 2);
    // unknown parameter
    auto t4 = toml::parse("experiment = \"qv-brownian\"\nseed = 1\n[params]\nnot_a_param = 3\n");
    CHECK(run_config(t4, "").exit_code == 2);
}

TEST_CASE("harness: run writes layout and repeats byte-identically") {
    std::string cfg = "experiment = \"determinism\"\nseed = 7\n[params]\nmesh_level = 6\n"
                      "n_paths = 50\n";
    auto table = toml::parse(cfg);
    auto out1 = run_config(table, cfg, {}, "/tmp/stosew_cli_test");
    REQUIRE(out1.exit_code == 0);
    namespace fs = std::filesystem;
    CHECK(fs::exists(fs::path(out1.output_dir) / "summary.json"));
    CHECK(fs::exists(fs::path(out1.output_dir) / "manifest.txt"));
    CHECK(fs::exists(fs::path(out1.output_dir) / "config.echo.toml"));

    // config echo is verbatim
    std::ifstream echo(fs::path(out1.output_dir) / "config.echo.toml");
    std::stringstream ss;
    ss << echo.rdbuf();
    CHECK(ss.str() == cfg);

    auto out2 = run_config(table, cfg, {}, "/tmp/stosew_cli_test");
    REQUIRE(out2.exit_code == 0);
    auto slurp = [](const fs::path& p) {
        std::ifstream is(p);
        std::stringstream s;
        s << is.rdbuf();
        return s.str();
    };
    CHECK(slurp(fs::path(out1.output_dir) / "summary.json") ==
          slurp(fs::path(out2.output_dir) / "summary.json"));
}

TEST_CASE("harness: malformed config file gives exit code 2") {
    {
        std::ofstream os("/tmp/stosew_bad.toml");
        os << "experiment = \"qv-brownian\nseed = 1\n"; // unterminated string
    }
    CHECK(run_config_file("/tmp/stosew_bad.toml").exit_code == 2);
    CHECK(run_config_file("/tmp/stosew_does_not_exist.toml").exit_code == 2);
}

TEST_CASE("harness: seed override and registry census") {
    std::string cfg = "experiment = \"determinism\"\nseed = 7\n[params]\nmesh_level = 6\n"
                      "n_paths = 20\n";
    auto table = toml::parse(cfg);
    auto out = run_config(table, cfg, std::uint64_t(99), "/tmp/stosew_cli_test");
    CHECK(out.exit_code == 0);
    // summary carries the overridden seed
    std::ifstream is(std::filesystem::path(out.output_dir) / "summary.json");
    std::stringstream ss;
    ss << is.rdbuf();
    CHECK(ss.str().find("\"seed\": 99") != std::string::npos);

    CHECK(experiment_registry().size() >= 12);
    CHECK(find_experiment("qv-brownian") != nullptr);
    CHECK(find_experiment("poisson-counterexample") != nullptr);
}

TEST_CASE("rate report serialization") {
    RateReport r;
    r.m = 2.0;
    r.scales = {0.5, 0.25, 0.125, 0.0625};
    r.lm_values = {0.7, 0.5, 0.35, 0.25};
    r.fit();
    CHECK(r.fitted_exponent == doctest::Approx(0.5).epsilon(0.05));
    auto csv = r.to_csv();
    CHECK(csv.rfind("scale,lm_value,m\n", 0) == 0);
    CHECK(csv.find("0.25") != std::string::npos);
    auto json = r.to_json("echo");
    CHECK(json.find("fitted_exponent") != std::string::npos);
    CHECK(json.find("\"config\": \"echo\"") != std::string::npos);
    RateReport bad;
    bad.scales = {0.5, 0.25};
    bad.lm_values = {1.0, 0.5};
    CHECK_THROWS_AS(bad.fit(), std::invalid_argument);
}
