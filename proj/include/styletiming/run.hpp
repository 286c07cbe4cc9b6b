#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "styletiming/attribution.hpp"
#include "styletiming/experiments.hpp"
#include "styletiming/signal_kernel.hpp"
#include "styletiming/synthetic.hpp"

namespace styletiming {

inline constexpr const char* kVersion = STYLETIMING_VERSION;

/// Everything that shapes a run's numbers. Serialized into the manifest and accepted back
/// through --config, so a manifest reproduces its run.
struct RunConfig {
    std::string experiment = "all";
    std::optional<std::filesystem::path> data_dir;
    bool synthetic = false;
    std::uint64_t seed = 7;
    std::filesystem::path out_dir = "stl_out";

    DateWindow window{parse_date("2017-06-28"), parse_date("2026-05-15")};
    DateWindow attribution_window{parse_date("2016-12-21"), parse_date("2026-03-31")};
    Date post2022_start = parse_date("2022-01-03");
    std::vector<NamedPeriod> periods;
    std::vector<std::size_t> rolling_windows{252, 504};

    double cost_bps = 10.0;
    std::vector<double> cost_levels{0.0, 5.0, 10.0, 20.0};
    std::vector<double> tilts{0.20, 0.30, 0.40, 0.50};
    BasketDef growth = default_growth_basket();
    BasketDef defensive = default_defensive_basket();
    PolicyConfig selected = selected_config();
    PolicyConfig tilt_base = tilt_study_base();
    GridAxes grid;
    SelectionScore selector;
    std::size_t train_len = 252;
    std::size_t test_len = 63;
    SignalSettings signals;
    int max_gap = 3;
    std::size_t quintile_horizon = 21;
    std::size_t gate_horizon = 63;
    SynthParams synth;
};

/// Default market periods for the period attribution table.
std::vector<NamedPeriod> default_periods();
RunConfig default_run_config();

const std::vector<std::string>& experiment_names();

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values raise UsageError.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to a config document; the value is read as JSON, else as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

DateWindow parse_window(const std::string& text);

struct RunOutcome {
    std::filesystem::path out_dir;
    std::vector<std::string> experiments;
    std::vector<std::string> skipped;
};

/// Runs the requested experiment(s), one output directory each, plus manifest.json.
RunOutcome run(const RunConfig& config, const std::vector<std::string>& overrides = {});

}  // namespace styletiming
