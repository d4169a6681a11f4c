#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "equigrid/evaluation.hpp"
#include "equigrid/policies.hpp"
#include "equigrid/report.hpp"
#include "equigrid/scenario_io.hpp"

namespace equigrid {

/// Path of a bundled scenario name ("default"), or the argument unchanged.
inline std::string resolve_scenario_path(const std::string& name_or_path) {
    if (name_or_path == "default" || name_or_path == "default-8city") {
#ifdef EQUIGRID_SCENARIO_DIR
        const std::filesystem::path bundled = std::filesystem::path(EQUIGRID_SCENARIO_DIR) / "default-8city.json";
        if (std::filesystem::exists(bundled)) return bundled.string();
#endif
        return "scenarios/default-8city.json";
    }
    return name_or_path;
}

struct RunConfig {
    std::string scenario = "default";
    std::vector<std::string> policies{"mcts-base", "vi", "mcts-re", "expert", "random"};
    std::size_t episodes = 100;
    std::uint64_t base_seed = 1;
    std::optional<std::size_t> horizon;
    std::string output_dir = "results";
    std::vector<OutputFormat> formats{OutputFormat::Csv, OutputFormat::Json};
    std::optional<double> op_cost_scale;
    PolicyOptions policy_options;
    std::size_t jobs = 1;

    void validate() const {
        std::vector<std::string> errors;
        if (policies.empty()) errors.push_back("at least one policy is required");
        if (formats.empty()) errors.push_back("at least one output format is required");
        if (episodes < 2) errors.push_back("--episodes must be >= 2");
        if (horizon && *horizon < 1) errors.push_back("--horizon must be >= 1");
        if (!errors.empty()) throw ValidationError(std::move(errors));
    }
};

/// Loads the scenario named in the config and applies CLI overrides.
inline Scenario load_configured_scenario(const RunConfig& cfg) {
    Scenario scenario = load_scenario(resolve_scenario_path(cfg.scenario));
    if (cfg.op_cost_scale || cfg.horizon) {
        ScenarioParams params = scenario.params;
        if (cfg.op_cost_scale) params.op_cost_scale = *cfg.op_cost_scale;
        if (cfg.horizon) params.horizon = static_cast<int>(*cfg.horizon);
        scenario = validate_scenario(std::move(params), std::move(scenario.cities));
    }
    return scenario;
}

inline std::vector<PolicyHandle> make_policies(const RunConfig& cfg, const Scenario& scenario) {
    std::vector<PolicyHandle> out;
    for (const auto& name : cfg.policies) out.push_back(make_policy(name, scenario, cfg.policy_options));
    return out;
}

inline std::string run_manifest(const RunConfig& cfg, const Scenario& scenario,
                                const BenchmarkTable& table) {
    nlohmann::ordered_json doc;
    doc["scenario"] = cfg.scenario;
    doc["cities"] = scenario.cities.size();
    doc["episodes"] = cfg.episodes;
    doc["base_seed"] = cfg.base_seed;
    doc["horizon"] = scenario.params.horizon;
    doc["gamma"] = scenario.params.gamma;
    doc["op_cost_scale"] = scenario.params.op_cost_scale;
    doc["units"] = {{"re_pct", "percent of demand served by renewables"},
                    {"budget_used", "scenario money units"},
                    {"low_pop/high_pop", "millions of persons, unmet-fraction weighted"}};
    nlohmann::ordered_json pol = nlohmann::ordered_json::object();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json meta = nlohmann::ordered_json::object();
        for (const auto& [k, v] : row.metadata) meta[k] = v;
        pol[row.summary.policy] = std::move(meta);
    }
    doc["policies"] = std::move(pol);
    return doc.dump(2) + "\n";
}

/// Writes every file of a benchmark run. On failure, files written so far
/// are removed and the error is rethrown.
inline void write_run_outputs(const RunConfig& cfg, const Scenario& scenario, const BenchmarkTable& table) {
    namespace fs = std::filesystem;
    const fs::path out_dir(cfg.output_dir);
    std::vector<fs::path> written;
    const bool created_dir = !fs::exists(out_dir);
    try {
        fs::create_directories(out_dir / "episodes");
        auto put = [&](const fs::path& p, const std::string& contents) {
            written.push_back(p);
            write_file(p.string(), contents);
        };
        for (auto fmt : cfg.formats) {
            const std::string ext = extension(fmt);
            const bool csv = fmt == OutputFormat::Csv;
            put(out_dir / ("results." + ext), csv ? results_csv(table) : results_json(table));
            put(out_dir / ("series." + ext), csv ? series_csv(table) : series_json(table));
            for (const auto& row : table.rows) {
                for (const auto& trace : row.traces) {
                    put(out_dir / "episodes" /
                            (trace.policy + "-" + std::to_string(trace.seed) + "." + ext),
                        csv ? trace_csv(trace) : trace_json(trace));
                }
            }
        }
        put(out_dir / "manifest.json", run_manifest(cfg, scenario, table));
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
        if (created_dir) fs::remove_all(out_dir, ec);
        throw;
    }
}

/// Full benchmark: load, build policies, run, write. Returns the table.
inline BenchmarkTable cmd_run(const RunConfig& cfg) {
    cfg.validate();
    const Scenario scenario = load_configured_scenario(cfg);
    const auto policies = make_policies(cfg, scenario);
    const std::size_t horizon = static_cast<std::size_t>(scenario.params.horizon);
    auto table = benchmark(policies, scenario, cfg.episodes, cfg.base_seed, horizon, cfg.jobs);
    write_run_outputs(cfg, scenario, table);
    return table;
}

}  // namespace equigrid
