#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "styletiming/errors.hpp"
#include "styletiming/run.hpp"
#include "styletiming/synthetic.hpp"

namespace st = styletiming;
using nlohmann::json;

namespace {

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw st::UsageError("cannot read config file '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw st::UsageError("config file '" + path + "' is not valid JSON");
    // A run manifest carries its configuration under "config".
    if (j.contains("config") && j.contains("conventions")) return j.at("config");
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Growth/defensive style-timing research engine"};
    app.set_version_flag("--version", std::string(st::kVersion));
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run one experiment or all of them");
    std::string config_path, experiment, data_dir, out_dir, window;
    std::optional<double> cost_bps;
    std::optional<std::uint64_t> seed;
    bool synthetic = false;
    std::vector<std::string> sets;
    run_cmd->add_option("--config", config_path, "JSON config file or a previous run's manifest.json");
    run_cmd->add_option("--experiment", experiment,
                        "attribution|tilt|grid|benchmarks|volmatch|walkforward|post2022|credit|diagnostics|all");
    run_cmd->add_option("--data-dir", data_dir, "Directory of <symbol>.csv files (default: $STL_DATA_DIR)");
    run_cmd->add_option("--out-dir", out_dir, "Output directory");
    run_cmd->add_option("--cost-bps", cost_bps, "One-way transaction cost in basis points");
    run_cmd->add_flag("--synthetic", synthetic, "Generate seeded synthetic data instead of reading files");
    run_cmd->add_option("--seed", seed, "Synthetic data seed");
    run_cmd->add_option("--window", window, "Backtest window start:end (YYYY-MM-DD:YYYY-MM-DD)");
    run_cmd->add_option("--set", sets, "Config override key=value, dotted keys for nested fields");

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic data directory");
    st::SynthParams sp;
    std::string synth_out;
    bool no_credit = false;
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();
    synth_cmd->add_option("--seed", sp.seed, "Seed");
    synth_cmd->add_option("--n-days", sp.n_days, "Number of weekdays (>= 1000)");
    synth_cmd->add_option("--vol-scale", sp.vol_scale, "Shock scale; 0 gives constant series");
    synth_cmd->add_option("--planted", sp.planted_rate_effect, "Planted lagged rate-relief effect on G-D");
    synth_cmd->add_flag("--no-credit", no_credit, "Omit BAA10Y");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*synth_cmd) {
            sp.include_credit = !no_credit;
            st::write_dataset(st::synth_data(sp), synth_out);
            std::cout << "wrote synthetic data to " << synth_out << "\n";
            return 0;
        }
        json doc = config_path.empty() ? st::to_json(st::default_run_config()) : read_config_file(config_path);
        if (!experiment.empty()) doc["experiment"] = experiment;
        if (!data_dir.empty()) doc["data_dir"] = data_dir;
        if (cost_bps) doc["cost_bps"] = *cost_bps;
        if (synthetic) doc["synthetic"] = true;
        if (seed) doc["seed"] = *seed;
        if (!window.empty()) doc["window"] = window;
        for (const auto& s : sets) st::apply_override(doc, s);
        st::RunConfig cfg = st::run_config_from_json(doc);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        const auto outcome = st::run(cfg, sets);
        for (const auto& e : outcome.experiments) std::cout << "done " << e << "\n";
        for (const auto& e : outcome.skipped) std::cout << "skipped " << e << " (input series not supplied)\n";
        std::cout << "outputs in " << outcome.out_dir.string() << "\n";
        return 0;
    } catch (const st::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const st::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
