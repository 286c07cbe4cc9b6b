#include "styletiming/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        out.push_back(trim(line.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

double parse_number(std::string_view field, const std::string& source, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError(source, line, "invalid number '" + std::string(field) + "'");
    }
    return value;
}

// Reads a headered delimited file; calls `on_row(fields, line_number)` per data row.
template <typename RowFn>
void read_table(const std::filesystem::path& path, std::string_view expected_header, RowFn on_row) {
    std::ifstream in(path);
    if (!in) {
        throw DataCoverageError("cannot open data file '" + path.string() + "'");
    }
    const std::string source = path.filename().string();
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        if (!header_seen) {
            std::string lowered(text);
            std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (lowered != expected_header) {
                throw ParseError(source, line_no,
                                 "expected header '" + std::string(expected_header) + "'");
            }
            header_seen = true;
            continue;
        }
        on_row(split(text, ','), line_no, source);
    }
    if (!header_seen) {
        throw ValidationError("empty data file '" + path.string() + "'");
    }
}

void sort_and_check(DateValueRows& rows, const std::string& symbol) {
    if (rows.empty()) {
        throw ValidationError("series '" + symbol + "' has no observations");
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            throw ValidationError("series '" + symbol + "' has duplicate date " +
                                  format_date(rows[i].first));
        }
    }
}

template <typename Series>
Series from_rows(std::string symbol, const DateValueRows& rows) {
    Series out;
    out.symbol = std::move(symbol);
    out.dates.reserve(rows.size());
    out.values.reserve(rows.size());
    for (const auto& [d, v] : rows) {
        out.dates.push_back(d);
        out.values.push_back(v);
    }
    return out;
}

std::string stem_of(const std::filesystem::path& path) { return path.stem().string(); }

}  // namespace

DateValueRows read_date_value_file(const std::filesystem::path& path) {
    DateValueRows rows;
    read_table(path, "date,value",
               [&](const std::vector<std::string_view>& fields, std::size_t line_no,
                   const std::string& source) {
                   if (fields.size() != 2) {
                       throw ParseError(source, line_no, "expected 2 fields");
                   }
                   Date date;
                   try {
                       date = parse_date(fields[0]);
                   } catch (const ValidationError& e) {
                       throw ParseError(source, line_no, e.what());
                   }
                   rows.emplace_back(date, parse_number(fields[1], source, line_no));
               });
    if (rows.empty()) {
        throw ValidationError("empty data file '" + path.string() + "'");
    }
    return rows;
}

PriceSeries make_price_series(std::string symbol, DateValueRows rows) {
    sort_and_check(rows, symbol);
    for (const auto& [d, v] : rows) {
        if (!(v > 0.0)) {
            throw ValidationError("series '" + symbol + "' has nonpositive price on " +
                                  format_date(d));
        }
    }
    return from_rows<PriceSeries>(std::move(symbol), rows);
}

LevelSeries make_level_series(std::string symbol, DateValueRows rows) {
    sort_and_check(rows, symbol);
    if (symbol == "VIX" || symbol == "SPY") {
        for (const auto& [d, v] : rows) {
            if (!(v > 0.0)) {
                throw ValidationError("series '" + symbol + "' has nonpositive level on " +
                                      format_date(d));
            }
        }
    }
    return from_rows<LevelSeries>(std::move(symbol), rows);
}

PriceSeries load_price_series(const std::filesystem::path& path) {
    return make_price_series(stem_of(path), read_date_value_file(path));
}

LevelSeries load_level_series(const std::filesystem::path& path) {
    return make_level_series(stem_of(path), read_date_value_file(path));
}

std::variant<PriceSeries, LevelSeries> load_series(const std::filesystem::path& path,
                                                   SeriesKind kind) {
    if (kind == SeriesKind::price) return load_price_series(path);
    return load_level_series(path);
}

DatedSeries forward_fill_bounded(const DatedSeries& series, const Calendar& calendar,
                                 int max_gap) {
    if (max_gap < 0) {
        throw ValidationError("forward-fill max_gap must be nonnegative");
    }
    DatedSeries out;
    out.symbol = series.symbol;
    if (series.empty()) return out;

    const std::size_t first = lower_index(calendar, series.dates.front());
    const std::size_t last = lower_index(calendar, series.dates.back());
    std::size_t j = 0;  // cursor into series
    std::size_t k = first;
    while (k <= last && k < calendar.size()) {
        if (j < series.size() && series.dates[j] == calendar[k]) {
            out.dates.push_back(calendar[k]);
            out.values.push_back(series.values[j]);
            ++j;
            ++k;
            continue;
        }
        if (j < series.size() && series.dates[j] < calendar[k]) {
            throw ValidationError("series '" + series.symbol + "' date " +
                                  format_date(series.dates[j]) + " is not on the calendar");
        }
        // Run of missing calendar dates [k, gap_end) ending at the next observation.
        std::size_t gap_end = k;
        while (gap_end < calendar.size() && calendar[gap_end] < series.dates[j]) ++gap_end;
        if (gap_end - k <= static_cast<std::size_t>(max_gap)) {
            for (std::size_t g = k; g < gap_end; ++g) {
                out.dates.push_back(calendar[g]);
                out.values.push_back(out.values.back());
            }
        }
        k = gap_end;
    }
    if (j != series.size()) {
        throw ValidationError("series '" + series.symbol + "' date " +
                              format_date(series.dates[j]) + " is not on the calendar");
    }
    return out;
}

PriceSeries forward_fill_bounded(const PriceSeries& prices, const Calendar& calendar, int max_gap) {
    return PriceSeries{forward_fill_bounded(static_cast<const DatedSeries&>(prices), calendar, max_gap)};
}

LevelSeries forward_fill_bounded(const LevelSeries& levels, const Calendar& calendar, int max_gap) {
    return LevelSeries{forward_fill_bounded(static_cast<const DatedSeries&>(levels), calendar, max_gap)};
}

ReturnSeries to_returns(const PriceSeries& prices) {
    if (prices.size() < 2) {
        throw ValidationError("series '" + prices.symbol + "' needs at least 2 prices for returns");
    }
    ReturnSeries out;
    out.symbol = prices.symbol;
    out.dates.reserve(prices.size() - 1);
    out.values.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        out.dates.push_back(prices.dates[i]);
        out.values.push_back(prices.values[i] / prices.values[i - 1] - 1.0);
    }
    return out;
}

ReturnSeries to_returns(const PriceSeries& prices, const Calendar& calendar) {
    if (prices.size() < 2) {
        throw ValidationError("series '" + prices.symbol + "' needs at least 2 prices for returns");
    }
    ReturnSeries out;
    out.symbol = prices.symbol;
    std::size_t prev_k = lower_index(calendar, prices.dates.front());
    for (std::size_t i = 1; i < prices.size(); ++i) {
        const std::size_t k = lower_index(calendar, prices.dates[i]);
        if (k == calendar.size() || calendar[k] != prices.dates[i]) {
            throw ValidationError("series '" + prices.symbol + "' date " +
                                  format_date(prices.dates[i]) + " is not on the calendar");
        }
        if (k == prev_k + 1) {
            out.dates.push_back(prices.dates[i]);
            out.values.push_back(prices.values[i] / prices.values[i - 1] - 1.0);
        }
        prev_k = k;
    }
    return out;
}

PriceSeries cumulate(const ReturnSeries& returns, Date base_date, double base_level) {
    PriceSeries out;
    out.symbol = returns.symbol;
    out.dates.reserve(returns.size() + 1);
    out.values.reserve(returns.size() + 1);
    out.dates.push_back(base_date);
    out.values.push_back(base_level);
    for (std::size_t i = 0; i < returns.size(); ++i) {
        out.dates.push_back(returns.dates[i]);
        out.values.push_back(out.values.back() * (1.0 + returns.values[i]));
    }
    return out;
}

Calendar union_calendar(const std::vector<const DatedSeries*>& series) {
    std::set<Date> all;
    for (const auto* s : series) all.insert(s->dates.begin(), s->dates.end());
    return Calendar(all.begin(), all.end());
}

Calendar intersect_calendars(const std::vector<const DatedSeries*>& series) {
    if (series.empty()) return {};
    Calendar acc = series.front()->dates;
    for (std::size_t i = 1; i < series.size(); ++i) {
        Calendar next;
        std::set_intersection(acc.begin(), acc.end(), series[i]->dates.begin(),
                              series[i]->dates.end(), std::back_inserter(next));
        acc = std::move(next);
    }
    return acc;
}

double value_on(const DatedSeries& series, Date date) {
    const auto k = lower_index(series.dates, date);
    if (k < series.size() && series.dates[k] == date) return series.values[k];
    return kMissing;
}

std::vector<double> sample_on(const DatedSeries& series, const Calendar& calendar) {
    std::vector<double> out(calendar.size(), kMissing);
    std::size_t j = 0;
    for (std::size_t k = 0; k < calendar.size(); ++k) {
        while (j < series.size() && series.dates[j] < calendar[k]) ++j;
        if (j < series.size() && series.dates[j] == calendar[k]) out[k] = series.values[j];
    }
    return out;
}

const std::vector<double>& AlignedPanel::column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw ValidationError("panel has no column '" + name + "'");
    }
    return columns[static_cast<std::size_t>(it - names.begin())];
}

AlignedPanel align(std::vector<DatedSeries> series, Date start, Date end) {
    if (end < start) {
        throw ValidationError("align: start " + format_date(start) + " is after end " +
                              format_date(end));
    }
    std::sort(series.begin(), series.end(),
              [](const DatedSeries& a, const DatedSeries& b) { return a.symbol < b.symbol; });
    AlignedPanel panel;
    std::vector<const DatedSeries*> clipped_ptrs;
    std::vector<DatedSeries> clipped;
    clipped.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        if (s.empty()) {
            throw ValidationError("align: series '" + s.symbol + "' is empty");
        }
        if (i > 0 && series[i - 1].symbol == s.symbol) {
            throw ValidationError("align: duplicate series '" + s.symbol + "'");
        }
        const auto lo = lower_index(s.dates, start);
        const auto hi = upper_index(s.dates, end);
        DatedSeries c;
        c.symbol = s.symbol;
        c.dates.assign(s.dates.begin() + lo, s.dates.begin() + hi);
        c.values.assign(s.values.begin() + lo, s.values.begin() + hi);
        CoverageRow row;
        row.symbol = s.symbol;
        row.count = c.size();
        if (!c.empty()) row.first_date = c.dates.front();
        panel.coverage.push_back(row);
        clipped.push_back(std::move(c));
    }
    for (const auto& c : clipped) clipped_ptrs.push_back(&c);
    panel.dates = intersect_calendars(clipped_ptrs);
    if (panel.dates.empty()) {
        throw ValidationError("align: calendars have an empty intersection");
    }
    for (const auto& c : clipped) {
        panel.names.push_back(c.symbol);
        panel.columns.push_back(sample_on(c, panel.dates));
    }
    return panel;
}

FactorPanel load_factor_file(const std::filesystem::path& path) {
    struct Row {
        Date date;
        std::array<double, 7> v;
    };
    std::vector<Row> rows;
    read_table(path, "date,mkt_rf,smb,hml,rmw,cma,mom,rf",
               [&](const std::vector<std::string_view>& fields, std::size_t line_no,
                   const std::string& source) {
                   if (fields.size() != 8) {
                       throw ParseError(source, line_no, "expected 8 fields");
                   }
                   Row r;
                   try {
                       r.date = parse_date(fields[0]);
                   } catch (const ValidationError& e) {
                       throw ParseError(source, line_no, e.what());
                   }
                   for (std::size_t i = 0; i < 7; ++i) r.v[i] = parse_number(fields[i + 1], source, line_no);
                   rows.push_back(r);
               });
    if (rows.empty()) {
        throw ValidationError("empty factor file '" + path.string() + "'");
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    FactorPanel panel;
    double abs_mkt = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].date == rows[i - 1].date) {
            throw ValidationError("factor file has duplicate date " + format_date(rows[i].date));
        }
        panel.dates.push_back(rows[i].date);
        for (std::size_t f = 0; f < 6; ++f) panel.factors[f].push_back(rows[i].v[f]);
        panel.rf.push_back(rows[i].v[6]);
        abs_mkt += std::abs(rows[i].v[0]);
    }
    if (abs_mkt / static_cast<double>(rows.size()) > 0.05) {
        throw ValidationError("factor file '" + path.string() +
                              "' looks percent-scaled (mean |MKT| > 0.05); expected decimal returns");
    }
    return panel;
}

}  // namespace styletiming
