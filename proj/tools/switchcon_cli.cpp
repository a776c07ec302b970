// Command-line front end: run experiments, sweeps, and connectivity checks.
// Exit codes: 0 = verdicts as declared, 1 = verdict mismatch, 2 = execution error.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "switchcon/harness.hpp"

namespace {

using switchcon::ExperimentConfig;
using switchcon::json;

ExperimentConfig load_config(const std::string& ref) {
    const auto& table = switchcon::presets();
    if (auto it = table.find(ref); it != table.end())
        return ExperimentConfig::from_json(it->second);
    return ExperimentConfig::from_file(ref);
}

void apply_overrides(json& cfg, std::optional<std::uint64_t> seed, std::optional<double> step) {
    if (seed) cfg["seed"] = *seed;
    if (step) cfg["step"] = *step;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"switchcon: switched multi-agent consensus simulation and verification"};
    app.require_subcommand(1);

    std::string config_ref, out_dir = "out", axis;
    std::vector<std::string> value_strs;
    std::vector<std::uint64_t> sweep_seeds;
    std::optional<std::uint64_t> seed;
    std::optional<double> step;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_ref, "config file path or preset name")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--step", step, "override the integrator step");
        sub->add_option("--out-dir", out_dir, "output directory");
    };

    auto* run_cmd = app.add_subcommand("run", "run one experiment and write its outputs");
    add_common(run_cmd);

    auto* sweep_cmd = app.add_subcommand("sweep", "cross-product runs over one config field");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--axis", axis, "dotted config field path, e.g. system.n")->required();
    sweep_cmd->add_option("--values", value_strs, "axis values (JSON literals, comma- or space-separated)")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--seeds", sweep_seeds, "seeds (default: the config seed)");

    auto* verify_cmd = app.add_subcommand("verify-connectivity",
                                          "check uniform connectivity of the configured signal");
    add_common(verify_cmd);

    auto* list_cmd = app.add_subcommand("list-presets", "list built-in experiment presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& [name, cfg] : switchcon::presets())
                std::cout << name << ": " << cfg["system"]["name"].get<std::string>() << " n="
                          << cfg["system"].value("n", 2) << "\n";
            return 0;
        }

        auto cfg = load_config(config_ref);
        json raw = cfg.raw;
        apply_overrides(raw, seed, step);
        cfg = ExperimentConfig::from_json(std::move(raw));

        if (run_cmd->parsed()) {
            auto result = switchcon::run_experiment(cfg);
            switchcon::write_all_outputs(result, cfg, out_dir);
            std::cout << result.summary.to_text();
            auto mismatches = switchcon::check_declared(cfg, result.summary);
            for (const auto& key : mismatches)
                std::cerr << "verdict mismatch: " << key << "\n";
            return mismatches.empty() ? 0 : 1;
        }

        if (sweep_cmd->parsed()) {
            std::vector<json> values;
            for (const auto& s : value_strs) values.push_back(json::parse(s));
            if (sweep_seeds.empty()) sweep_seeds.push_back(cfg.seed());
            auto table = switchcon::sweep(cfg, axis, values, sweep_seeds);
            switchcon::write_sweep_csv(table, std::string(out_dir) + "/sweep.csv");
            int failures = 0;
            for (const auto& cell : table.cells)
                if (cell.failed) {
                    ++failures;
                    std::cerr << "cell failed (" << cell.axis_value.dump() << ", seed " << cell.seed
                              << "): " << cell.error << "\n";
                }
            std::cout << "sweep cells: " << table.cells.size() << ", failed: " << failures << "\n";
            return failures == 0 ? 0 : 1;
        }

        if (verify_cmd->parsed()) {
            const json& jsig = cfg.raw["signal"];
            const int n = cfg.raw["system"].value("n", 2);
            auto built = switchcon::detail::build_signal(jsig, n, cfg.seed());
            auto ms = switchcon::build_system(cfg.raw["system"], built.generated_graphs);
            switchcon::SwitchedSystem sys(std::move(ms), built.signal);
            const double window = built.certified_window
                                      ? *built.certified_window
                                      : jsig.value("verify_window", 1.0);
            const auto kind = built.kind.value_or(
                jsig.value("verify_kind", "strong") == std::string("strong")
                    ? switchcon::Connectivity::Strong
                    : switchcon::Connectivity::QuasiStrong);
            auto verdict = switchcon::verify_uniform_connectivity(sys.graph_process(), window, kind);
            std::cout << "window=" << window << " pass=" << (verdict.pass ? "true" : "false");
            if (verdict.witness_start) std::cout << " witness_start=" << *verdict.witness_start;
            std::cout << "\n";
            return verdict.pass ? 0 : 1;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
