#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "styletiming/baskets.hpp"
#include "styletiming/market_data.hpp"
#include "styletiming/policy.hpp"
#include "styletiming/signal_kernel.hpp"

namespace styletiming {

/// Everything read from a data directory, before any calendar work.
struct RawDataSet {
    BasketDef growth;
    BasketDef defensive;
    std::vector<PriceSeries> members;  // growth members then defensive members
    PriceSeries spy;
    LevelSeries tnx;
    LevelSeries vix;
    std::optional<LevelSeries> baa10y;
    std::optional<FactorPanel> factors;
    std::map<std::string, std::string> checksums;  // file name -> SHA-256 hex
};

inline constexpr const char* kFactorFileName = "ff5_mom_daily.csv";

/// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

/// Reads `<symbol>.csv` for every basket member plus SPY, TNX and VIX (required) and BAA10Y
/// and the factor file (optional). A missing required file raises DataCoverageError naming it.
RawDataSet load_dataset(const std::filesystem::path& dir, const BasketDef& growth,
                        const BasketDef& defensive);

/// Writes the loader's file formats; the inverse of load_dataset.
void write_dataset(const RawDataSet& data, const std::filesystem::path& dir);

/// Levels on `calendar`, carrying the last observation forward for at most `max_gap` calendar
/// dates; never fills before the first observation.
std::vector<double> sample_levels_causal(const DatedSeries& levels, const Calendar& calendar,
                                         int max_gap);

/// Baskets, relative series and signal frame on their calendars.
struct StudyData {
    std::vector<CoverageRow> coverage;
    std::vector<ReturnSeries> member_returns;  // on the master calendar
    ReturnSeries growth;
    ReturnSeries defensive;
    ReturnSeries spy;  // on the master calendar
    RelativeSeries gd;
    ReturnPair pair;
    SignalFrame frame;              // state calendar
    std::vector<double> gd_on_frame;  // missing before the basket start
    std::optional<FactorPanel> factors;
};

StudyData prepare_study(const RawDataSet& raw, const SignalSettings& settings = {},
                        int max_gap = 3);

}  // namespace styletiming
