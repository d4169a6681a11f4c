// equigrid: run benchmarks, single episodes, and scenario checks for the
// equity-aware renewable allocation MDP.

#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "equigrid/evaluation.hpp"
#include "equigrid/policies.hpp"
#include "equigrid/report.hpp"
#include "equigrid/run.hpp"
#include "equigrid/scenario_io.hpp"

namespace {

using namespace equigrid;

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::vector<OutputFormat> parse_formats(const std::string& text) {
    std::vector<OutputFormat> out;
    for (const auto& f : split_list(text)) {
        if (f == "csv") {
            out.push_back(OutputFormat::Csv);
        } else if (f == "json") {
            out.push_back(OutputFormat::Json);
        } else {
            throw ValidationError({"unknown format '" + f + "' (expected csv and/or json)"});
        }
    }
    return out;
}

/// "auto" (one low- and one high-income city), "all", or a list of 1-based
/// indices / city names.
std::optional<std::vector<std::size_t>> parse_vi_cities(const std::string& text, const Scenario& scenario) {
    if (text == "auto") return std::nullopt;
    if (text == "all") return std::vector<std::size_t>{};
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) {
        std::size_t index = 0;
        bool found = false;
        if (item.find_first_not_of("0123456789") == std::string::npos) {
            index = std::stoul(item);
            found = index >= 1 && index <= scenario.cities.size();
            index -= 1;
        } else {
            for (std::size_t i = 0; i < scenario.cities.size(); ++i) {
                if (scenario.cities[i].name == item) {
                    index = i;
                    found = true;
                }
            }
        }
        if (!found) throw ValidationError({"--vi-cities: unknown city '" + item + "'"});
        out.push_back(index);
    }
    return out;
}

struct CommonFlags {
    std::string scenario = "default";
    std::optional<std::size_t> horizon;
    std::optional<double> op_cost_scale;
    std::size_t mcts_iterations = 2000;
    double mcts_c = std::sqrt(2.0);
    std::size_t mcts_chance = 4;
    std::string mcts_rollout = "random";
    std::string vi_cities = "auto";
    std::size_t vi_bins = 8;
};

void add_common(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--scenario", f.scenario, "Scenario file, or 'default' for the bundled 8-city scenario")
        ->capture_default_str();
    cmd.add_option("--horizon", f.horizon, "Decision periods per episode (default: scenario horizon)");
    cmd.add_option("--op-cost-scale", f.op_cost_scale, "Override the operating-cost multiplier");
    cmd.add_option("--mcts-iterations", f.mcts_iterations, "MCTS iterations per decision")
        ->capture_default_str();
    cmd.add_option("--mcts-c", f.mcts_c, "UCT exploration constant")->capture_default_str();
    cmd.add_option("--mcts-chance-samples", f.mcts_chance, "Sampled demand outcomes per chance node")
        ->capture_default_str();
    cmd.add_option("--mcts-rollout", f.mcts_rollout, "MCTS rollout policy")
        ->check(CLI::IsMember({"random", "expert"}))
        ->capture_default_str();
    cmd.add_option("--vi-cities", f.vi_cities, "VI city subset: auto, all, or comma list of indices/names")
        ->capture_default_str();
    cmd.add_option("--vi-bins", f.vi_bins, "VI bins per state axis")->capture_default_str();
}

RunConfig to_run_config(const CommonFlags& f, const Scenario& scenario) {
    RunConfig cfg;
    cfg.scenario = f.scenario;
    cfg.horizon = f.horizon;
    cfg.op_cost_scale = f.op_cost_scale;
    auto& opt = cfg.policy_options;
    opt.mcts.iterations = f.mcts_iterations;
    opt.mcts.exploration_constant = f.mcts_c;
    opt.mcts.chance_samples = f.mcts_chance;
    opt.mcts.rollout_policy = f.mcts_rollout == "expert" ? RolloutPolicy::Expert : RolloutPolicy::Random;
    opt.mcts.max_depth = static_cast<std::size_t>(scenario.params.horizon);
    opt.vi_cities = parse_vi_cities(f.vi_cities, scenario);
    opt.vi_bins = f.vi_bins;
    return cfg;
}

int cmd_validate(const std::string& scenario_arg) {
    const Scenario sc = load_scenario(resolve_scenario_path(scenario_arg));
    std::size_t low = 0;
    for (const auto& c : sc.cities) low += c.income == Income::Low ? 1 : 0;
    std::cout << "scenario ok: " << sc.cities.size() << " cities (" << low << " low-income), budget "
              << sc.params.initial_budget.to_string() << ", gamma " << sc.params.gamma << ", horizon "
              << sc.params.horizon << "\n";
    return 0;
}

int cmd_episode(const CommonFlags& flags, const std::string& policy_name, std::uint64_t seed,
                const std::string& out_path) {
    const Scenario probe = load_scenario(resolve_scenario_path(flags.scenario));
    RunConfig cfg = to_run_config(flags, probe);
    const Scenario scenario = load_configured_scenario(cfg);
    const auto policy = make_policy(policy_name, scenario, cfg.policy_options);
    const auto horizon = static_cast<std::size_t>(scenario.params.horizon);
    const auto trace = run_episode(policy, scenario, horizon, seed);
    const Scenario& sc = policy.scenario_override ? *policy.scenario_override : scenario;

    std::cout << "policy " << policy.name << ", seed " << seed << ", horizon " << horizon << "\n";
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& rec = trace.steps[t];
        std::cout << "t=" << t << "  " << describe(rec.action, rec.state) << "  reward "
                  << format_sig6(rec.reward) << "  capex " << rec.action_cost.to_string() << "  opex "
                  << rec.op_cost.to_string() << "  budget " << trace.state_after(t).budget.to_string()
                  << (rec.state_clamped ? "  [clamped]" : "") << "\n";
    }
    const auto m = compute_metrics(trace, sc);
    std::cout << "discounted return " << format_sig6(m.discounted_return) << ", RE "
              << format_sig6(100.0 * m.re_fraction) << "%, budget used " << format_sig6(m.budget_used)
              << ", underserved low/high cities " << m.underserved_low_income_cities << "/"
              << m.underserved_high_income_cities << "\n";
    if (!out_path.empty()) {
        const bool json = out_path.size() >= 5 && out_path.substr(out_path.size() - 5) == ".json";
        write_file(out_path, json ? trace_json(trace) : trace_csv(trace));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equity-aware renewable energy allocation: simulator, solvers and benchmarks"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string policies = "mcts-base,vi,mcts-re,expert,random";
    std::size_t episodes = 100;
    std::uint64_t seed = 1;
    std::string out_dir = "results";
    std::string formats = "csv,json";
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* run = app.add_subcommand("run", "Benchmark policies over seeded episodes");
    add_common(*run, run_flags);
    run->add_option("--policies", policies, "Comma list of random,expert,noop,vi,mcts-base,mcts-re")
        ->capture_default_str();
    run->add_option("--episodes", episodes, "Episodes per policy")->capture_default_str();
    run->add_option("--seed", seed, "Base seed; episode k uses seed+k")->capture_default_str();
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--format", formats, "Output formats: csv,json")->capture_default_str();
    run->add_option("--jobs", jobs, "Worker threads for episodes")->capture_default_str();

    CommonFlags ep_flags;
    std::string ep_policy = "expert";
    std::uint64_t ep_seed = 1;
    std::string ep_out;
    auto* episode = app.add_subcommand("episode", "Run one episode and print every step");
    add_common(*episode, ep_flags);
    episode->add_option("--policy", ep_policy, "Policy name")->capture_default_str();
    episode->add_option("--seed", ep_seed, "Episode seed")->capture_default_str();
    episode->add_option("--out", ep_out, "Optional trace file (.csv or .json)");

    std::string validate_scenario_arg = "default";
    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("--scenario", validate_scenario_arg, "Scenario file or 'default'")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(validate_scenario_arg);
        if (*episode) return cmd_episode(ep_flags, ep_policy, ep_seed, ep_out);

        const Scenario probe = load_scenario(resolve_scenario_path(run_flags.scenario));
        RunConfig cfg = to_run_config(run_flags, probe);
        cfg.policies = split_list(policies);
        cfg.episodes = episodes;
        cfg.base_seed = seed;
        cfg.output_dir = out_dir;
        cfg.formats = parse_formats(formats);
        cfg.jobs = jobs;
        const auto table = cmd_run(cfg);
        std::cout << results_csv(table);
        std::cout << "wrote " << cfg.output_dir << "/results.{" << formats << "}\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
