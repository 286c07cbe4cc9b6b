#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "styletiming/date.hpp"

namespace styletiming {

/// Date-indexed values for one instrument. Dates are strictly increasing.
struct DatedSeries {
    std::string symbol;
    Calendar dates;
    std::vector<double> values;

    std::size_t size() const { return dates.size(); }
    bool empty() const { return dates.empty(); }
};

/// Adjusted closes; strictly positive.
struct PriceSeries : DatedSeries {};
/// Macro levels in native units (percent for TNX/BAA10Y, index points for VIX/SPY).
struct LevelSeries : DatedSeries {};
/// Daily simple returns in decimal; every value > -1.
struct ReturnSeries : DatedSeries {};

enum class SeriesKind { price, level };

using DateValueRows = std::vector<std::pair<Date, double>>;

/// Reads a `date,value` file. Rows are returned in file order.
DateValueRows read_date_value_file(const std::filesystem::path& path);

/// Sorts rows, rejects duplicate dates, and enforces positivity.
PriceSeries make_price_series(std::string symbol, DateValueRows rows);
/// Sorts rows and rejects duplicate dates. VIX and SPY levels must be positive.
LevelSeries make_level_series(std::string symbol, DateValueRows rows);

PriceSeries load_price_series(const std::filesystem::path& path);
LevelSeries load_level_series(const std::filesystem::path& path);
std::variant<PriceSeries, LevelSeries> load_series(const std::filesystem::path& path,
                                                   SeriesKind kind);

/// Samples `series` on `calendar`, filling runs of at most `max_gap` missing calendar dates
/// that lie strictly inside the series' span with the last prior value. Longer runs and dates
/// outside the span stay absent from the result.
DatedSeries forward_fill_bounded(const DatedSeries& series, const Calendar& calendar,
                                 int max_gap = 3);
PriceSeries forward_fill_bounded(const PriceSeries& prices, const Calendar& calendar,
                                 int max_gap = 3);
LevelSeries forward_fill_bounded(const LevelSeries& levels, const Calendar& calendar,
                                 int max_gap = 3);

/// Simple returns between consecutive observations of the series.
ReturnSeries to_returns(const PriceSeries& prices);
/// Simple returns on calendar-consecutive dates only: a date whose prior calendar date has
/// no price produces no return.
ReturnSeries to_returns(const PriceSeries& prices, const Calendar& calendar);

/// Compounds returns into a price path whose level on `base_date` is `base_level`.
PriceSeries cumulate(const ReturnSeries& returns, Date base_date, double base_level = 1.0);

Calendar union_calendar(const std::vector<const DatedSeries*>& series);
Calendar intersect_calendars(const std::vector<const DatedSeries*>& series);

/// Value on `date`, or kMissing.
double value_on(const DatedSeries& series, Date date);
/// Values of `series` sampled on `calendar` with kMissing where absent.
std::vector<double> sample_on(const DatedSeries& series, const Calendar& calendar);

struct CoverageRow {
    std::string symbol;
    std::string group;
    Date first_date;
    std::size_t count = 0;
};

/// Intersection-calendar panel. Columns are ordered by name so the result does not depend on
/// input order.
struct AlignedPanel {
    Calendar dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    std::vector<CoverageRow> coverage;

    const std::vector<double>& column(const std::string& name) const;
};

AlignedPanel align(std::vector<DatedSeries> series, Date start, Date end);

/// Daily FF5 + momentum factors and the risk-free rate, decimal returns.
struct FactorPanel {
    static constexpr std::array<const char*, 6> kNames{"MKT", "SMB", "HML", "RMW", "CMA", "MOM"};

    Calendar dates;
    std::array<std::vector<double>, 6> factors;
    std::vector<double> rf;

    std::size_t size() const { return dates.size(); }
};

/// Reads `date,mkt_rf,smb,hml,rmw,cma,mom,rf`. Rejects percent-scaled files (mean |MKT| > 0.05).
FactorPanel load_factor_file(const std::filesystem::path& path);

}  // namespace styletiming
