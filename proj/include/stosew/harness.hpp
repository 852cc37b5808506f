#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "stosew/experiments.hpp"

namespace stosew {

struct RunOutcome {
    int exit_code = 0; // 0 pass, 1 acceptance failure, 2 config error, 3 numerical abort
    std::string output_dir;
    std::string message;
};

namespace harness_detail {

inline std::string timestamp_dir() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

inline nlohmann::json summary_json(const std::string& name, std::uint64_t seed,
                                   const ExperimentResult& result, const Params& params) {
    nlohmann::json j;
    j["experiment"] = name;
    j["seed"] = seed;
    j["pass"] = result.pass;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : result.checks) {
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"observed", c.observed},
                          {"detail", c.detail}});
    }
    j["checks"] = checks;
    j["metrics"] = result.metrics;
    nlohmann::json cfg;
    for (const auto& [k, v] : params.table()) cfg[k] = v.repr();
    j["parameters"] = cfg;
    return j;
}

} // namespace harness_detail

/// Runs one experiment from a parsed config; writes
/// <outdir>/<experiment>/<timestamp>/{summary.json, *.csv, manifest.txt,
/// config.echo.toml}.
inline RunOutcome run_config(const toml::Table& config, const std::string& raw_config,
                             std::optional<std::uint64_t> seed_override = {},
                             const std::string& outdir_override = "") {
    RunOutcome out;
    std::string name;
    std::uint64_t seed = 0;
    std::string outdir = "out";
    try {
        if (!config.count("experiment")) throw toml::ParseError("missing key 'experiment'");
        name = config.at("experiment").as_string();
        if (seed_override) {
            seed = *seed_override;
        } else {
            if (!config.count("seed")) throw toml::ParseError("missing mandatory key 'seed'");
            seed = std::uint64_t(config.at("seed").as_int());
        }
        if (config.count("outdir")) outdir = config.at("outdir").as_string();
        if (!outdir_override.empty()) outdir = outdir_override;

        // reject unknown top-level keys
        for (const auto& [k, v] : config) {
            if (k == "experiment" || k == "seed" || k == "outdir") continue;
            if (k.rfind("params.", 0) == 0) continue;
            throw toml::ParseError("unknown key '" + k + "'");
        }
    } catch (const std::exception& ex) {
        out.exit_code = 2;
        out.message = std::string("config error: ") + ex.what();
        return out;
    }

    const Experiment* exp = find_experiment(name);
    if (!exp) {
        out.exit_code = 2;
        out.message = "config error: unknown experiment '" + name + "'";
        return out;
    }

    ExperimentResult result;
    std::unique_ptr<Params> params;
    try {
        params = std::make_unique<Params>(exp->defaults, config, seed);
    } catch (const std::exception& ex) {
        out.exit_code = 2;
        out.message = std::string("config error: ") + ex.what();
        return out;
    }
    try {
        result = exp->run(*params);
    } catch (const std::exception& ex) {
        out.exit_code = 3;
        out.message = std::string("numerical abort: ") + ex.what();
        return out;
    }

    try {
        namespace fs = std::filesystem;
        fs::path base = fs::path(outdir) / name / harness_detail::timestamp_dir();
        int suffix = 0;
        fs::path dir = base;
        while (fs::exists(dir)) dir = base.string() + "-" + std::to_string(++suffix);
        fs::create_directories(dir);

        std::ofstream(dir / "config.echo.toml") << raw_config;
        std::ofstream(dir / "manifest.txt")
            << exp->name << ": " << exp->statement << "\n";
        auto j = harness_detail::summary_json(name, seed, result, *params);
        std::ofstream(dir / "summary.json") << j.dump(2) << "\n";
        for (const auto& [fname, content] : result.artifacts)
            std::ofstream(dir / fname) << content;
        out.output_dir = dir.string();
    } catch (const std::exception& ex) {
        out.exit_code = 3;
        out.message = std::string("output error: ") + ex.what();
        return out;
    }

    out.exit_code = result.pass ? 0 : 1;
    out.message = result.pass ? "pass" : "acceptance failure";
    return out;
}

inline RunOutcome run_config_file(const std::string& path,
                                  std::optional<std::uint64_t> seed_override = {},
                                  const std::string& outdir_override = "") {
    std::string raw;
    toml::Table config;
    try {
        raw = toml::read_file(path);
        config = toml::parse(raw);
    } catch (const std::exception& ex) {
        RunOutcome out;
        out.exit_code = 2;
        out.message = std::string("config error: ") + ex.what();
        return out;
    }
    return run_config(config, raw, seed_override, outdir_override);
}

/// Default config text for an experiment, suitable for `describe`.
inline std::string default_config_toml(const Experiment& exp) {
    std::ostringstream os;
    os << "experiment = \"" << exp.name << "\"\n";
    os << "seed = 42\n";
    os << "outdir = \"out\"\n\n[params]\n";
    for (const auto& [k, v] : exp.defaults) os << k << " = " << v.repr() << "\n";
    return os.str();
}

} // namespace stosew
