#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "equigrid/evaluation.hpp"

namespace equigrid {

enum class OutputFormat { Csv, Json };

inline const char* extension(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

/// 6 significant digits, shared by every emitter so CSV and JSON agree.
inline std::string format_sig6(double v) {
    if (v == 0.0) v = 0.0;  // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline double round_sig6(double v) { return std::stod(format_sig6(v)); }

inline const std::array<const char*, 15>& results_columns() {
    static const std::array<const char*, 15> cols{
        "policy",         "reward_mean",     "reward_std",      "re_pct_mean",    "re_pct_std",
        "budget_used_mean", "budget_used_std", "low_cities_mean", "low_cities_std", "high_cities_mean",
        "high_cities_std", "low_pop_mean",    "low_pop_std",     "high_pop_mean",  "high_pop_std"};
    return cols;
}

/// Row values in column order (after "policy"): re as percent, population in millions.
inline std::array<double, 14> results_row(const AggregateResult& r) {
    std::array<double, 14> out{};
    const std::array<double, MetricsRecord::kFieldCount> unit{1.0, 100.0, 1.0, 1.0, 1.0, 1e-6, 1e-6};
    for (std::size_t k = 0; k < MetricsRecord::kFieldCount; ++k) {
        out[2 * k] = r.stats[k].mean * unit[k];
        out[2 * k + 1] = r.stats[k].std * unit[k];
    }
    return out;
}

inline std::string results_csv(const BenchmarkTable& table) {
    std::string out;
    const auto& cols = results_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out += k ? "," : "";
        out += cols[k];
    }
    out += "\n";
    for (const auto& row : table.rows) {
        out += row.summary.policy;
        for (double v : results_row(row.summary)) out += "," + format_sig6(v);
        out += "\n";
    }
    return out;
}

inline std::string results_json(const BenchmarkTable& table) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    const auto& cols = results_columns();
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        obj[cols[0]] = row.summary.policy;
        const auto values = results_row(row.summary);
        for (std::size_t k = 0; k < values.size(); ++k) obj[cols[k + 1]] = round_sig6(values[k]);
        doc.push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

inline std::string series_csv(const BenchmarkTable& table) {
    std::string out = "policy,step,reward_mean,re_pct_mean,budget_used_mean,low_pop_mean,high_pop_mean\n";
    for (const auto& row : table.rows) {
        for (const auto& p : step_series(row.traces)) {
            out += row.summary.policy + "," + std::to_string(p.step) + "," + format_sig6(p.reward_mean) +
                   "," + format_sig6(100.0 * p.re_fraction_mean) + "," + format_sig6(p.budget_used_mean) +
                   "," + format_sig6(1e-6 * p.low_income_population_mean) + "," +
                   format_sig6(1e-6 * p.high_income_population_mean) + "\n";
        }
    }
    return out;
}

inline std::string series_json(const BenchmarkTable& table) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
        for (const auto& p : step_series(row.traces)) {
            doc.push_back({{"policy", row.summary.policy},
                           {"step", p.step},
                           {"reward_mean", round_sig6(p.reward_mean)},
                           {"re_pct_mean", round_sig6(100.0 * p.re_fraction_mean)},
                           {"budget_used_mean", round_sig6(p.budget_used_mean)},
                           {"low_pop_mean", round_sig6(1e-6 * p.low_income_population_mean)},
                           {"high_pop_mean", round_sig6(1e-6 * p.high_income_population_mean)}});
        }
    }
    return doc.dump(2) + "\n";
}

inline std::string trace_csv(const EpisodeTrace& trace) {
    std::string out = "step,action,reward,action_cost,op_cost,op_cost_shortfall,budget_after,clamped";
    if (!trace.steps.empty()) {
        for (const auto& c : trace.steps.front().state.cities) {
            out += "," + c.name + " demand," + c.name + " re," + c.name + " nre";
        }
    }
    out += "\n";
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& rec = trace.steps[t];
        const auto& after = trace.state_after(t);
        out += std::to_string(t) + "," + describe(rec.action, rec.state) + "," + format_sig6(rec.reward) +
               "," + rec.action_cost.to_string() + "," + rec.op_cost.to_string() + "," +
               rec.op_cost_shortfall.to_string() + "," + after.budget.to_string() + "," +
               (rec.state_clamped ? "1" : "0");
        for (const auto& c : after.cities) {
            out += "," + format_sig6(c.demand) + "," + format_sig6(c.re_supply) + "," +
                   format_sig6(c.nre_supply);
        }
        out += "\n";
    }
    return out;
}

inline std::string trace_json(const EpisodeTrace& trace) {
    nlohmann::ordered_json doc;
    doc["policy"] = trace.policy;
    doc["seed"] = trace.seed;
    doc["initial_budget"] = trace.initial_state.budget.to_double();
    doc["steps"] = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& rec = trace.steps[t];
        const auto& after = trace.state_after(t);
        nlohmann::ordered_json cities = nlohmann::ordered_json::array();
        for (const auto& c : after.cities) {
            cities.push_back({{"name", c.name},
                              {"demand", c.demand},
                              {"re_supply", c.re_supply},
                              {"nre_supply", c.nre_supply}});
        }
        doc["steps"].push_back({{"step", t},
                                {"action", describe(rec.action, rec.state)},
                                {"reward", rec.reward},
                                {"action_cost", rec.action_cost.to_double()},
                                {"op_cost", rec.op_cost.to_double()},
                                {"op_cost_shortfall", rec.op_cost_shortfall.to_double()},
                                {"budget_after", after.budget.to_double()},
                                {"state_clamped", rec.state_clamped},
                                {"cities", std::move(cities)}});
    }
    return doc.dump(2) + "\n";
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << contents;
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

inline void emit_results(const BenchmarkTable& table, OutputFormat format, const std::string& path) {
    if (table.rows.empty()) throw ValidationError({"emit_results: empty table"});
    write_file(path, format == OutputFormat::Csv ? results_csv(table) : results_json(table));
}

}  // namespace equigrid
