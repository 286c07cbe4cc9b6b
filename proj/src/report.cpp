#include "styletiming/report.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

namespace fs = std::filesystem;

std::string format_full(double value) {
    if (is_missing(value)) return "NA";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string format_cell(double value, ColumnFormat format) {
    if (is_missing(value)) return "NA";
    char buf[64];
    switch (format) {
        case ColumnFormat::percent:
            std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
            break;
        case ColumnFormat::ratio:
            std::snprintf(buf, sizeof buf, "%.2f", value);
            break;
        case ColumnFormat::beta:
            std::snprintf(buf, sizeof buf, "%.3f", value);
            break;
        case ColumnFormat::integer:
            std::snprintf(buf, sizeof buf, "%.0f", value);
            break;
        case ColumnFormat::text:
            return format_full(value);
    }
    std::string out = buf;
    if (out == "-0.00" || out == "-0.000") out.erase(0, 1);
    return out;
}

std::string slug(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.') {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (c == '%') {
            out += "pct";
        } else if (!out.empty() && out.back() != '_') {
            out += '_';
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

Table::Table(std::vector<Column> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) {
        throw Error("table row has " + std::to_string(row.size()) + " cells for " +
                    std::to_string(columns_.size()) + " columns");
    }
    rows_.push_back(std::move(row));
}

namespace {

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string Table::render(bool full) const {
    std::ostringstream out;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (c) out << ',';
        out << quote(columns_[c].name);
    }
    out << '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ',';
            if (const auto* s = std::get_if<std::string>(&row[c])) {
                out << quote(*s);
            } else {
                const double v = std::get<double>(row[c]);
                out << (full ? format_full(v) : format_cell(v, columns_[c].format));
            }
        }
        out << '\n';
    }
    return out.str();
}

void Table::write(const fs::path& dir, const std::string& name) const {
    fs::create_directories(dir);
    for (bool full : {false, true}) {
        const auto path = dir / (name + (full ? "_full.csv" : ".csv"));
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        out << render(full);
    }
}

std::vector<MetricColumn> all_metric_columns() {
    return {MetricColumn::final_wealth, MetricColumn::cagr,   MetricColumn::vol,
            MetricColumn::sharpe,       MetricColumn::sortino, MetricColumn::max_dd,
            MetricColumn::calmar,       MetricColumn::turnover, MetricColumn::avg_g};
}

Table metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows,
                    const std::vector<MetricColumn>& columns, const std::string& label) {
    std::vector<Column> cols{{label, ColumnFormat::text}};
    for (auto c : columns) {
        switch (c) {
            case MetricColumn::final_wealth: cols.push_back({"Final Wealth", ColumnFormat::ratio}); break;
            case MetricColumn::cagr: cols.push_back({"CAGR", ColumnFormat::percent}); break;
            case MetricColumn::vol: cols.push_back({"Vol", ColumnFormat::percent}); break;
            case MetricColumn::sharpe: cols.push_back({"Sharpe", ColumnFormat::ratio}); break;
            case MetricColumn::sortino: cols.push_back({"Sortino", ColumnFormat::ratio}); break;
            case MetricColumn::max_dd: cols.push_back({"Max DD", ColumnFormat::percent}); break;
            case MetricColumn::calmar: cols.push_back({"Calmar", ColumnFormat::ratio}); break;
            case MetricColumn::turnover: cols.push_back({"Turnover", ColumnFormat::percent}); break;
            case MetricColumn::avg_g: cols.push_back({"Avg G", ColumnFormat::percent}); break;
        }
    }
    Table t(std::move(cols));
    for (const auto& [name, m] : rows) {
        std::vector<Cell> row{name};
        for (auto c : columns) {
            switch (c) {
                case MetricColumn::final_wealth: row.emplace_back(m.final_wealth); break;
                case MetricColumn::cagr: row.emplace_back(m.cagr); break;
                case MetricColumn::vol: row.emplace_back(m.vol); break;
                case MetricColumn::sharpe: row.emplace_back(m.sharpe); break;
                case MetricColumn::sortino: row.emplace_back(m.sortino); break;
                case MetricColumn::max_dd: row.emplace_back(m.max_dd); break;
                case MetricColumn::calmar: row.emplace_back(m.calmar); break;
                case MetricColumn::turnover: row.emplace_back(m.turnover_annual); break;
                case MetricColumn::avg_g: row.emplace_back(m.avg_g); break;
            }
        }
        t.add_row(std::move(row));
    }
    return t;
}

void write_equity(const fs::path& dir, const BacktestResult& r) {
    fs::create_directories(dir);
    const auto path = dir / ("equity_" + slug(r.name) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "date,weight_G,gross,cost,net,equity\n";
    for (std::size_t i = 0; i < r.dates.size(); ++i) {
        out << format_date(r.dates[i]) << ','
            << (r.weights_g.empty() ? std::string("NA") : format_full(r.weights_g[i])) << ','
            << format_full(r.gross[i]) << ',' << format_full(r.costs[i]) << ','
            << format_full(r.net[i]) << ',' << format_full(r.equity[i]) << '\n';
    }
}

void write_metrics(const fs::path& dir, const BacktestResult& r) {
    metrics_table({{r.name, r.metrics}}, all_metric_columns()).write(dir, "metrics_" + slug(r.name));
}

Table coverage_table(const std::vector<CoverageRow>& coverage) {
    Table t({{"symbol"}, {"group"}, {"first_return_date"}, {"n_returns", ColumnFormat::integer}});
    for (const auto& row : coverage) {
        t.add_row({row.symbol, row.group, row.count ? format_date(row.first_date) : std::string("NA"),
                   static_cast<double>(row.count)});
    }
    return t;
}

namespace {

void add_regression_columns(std::vector<Column>& cols, const RegressionResult& sample, bool alpha_t,
                            const std::string& r2_label) {
    cols.push_back({"Alpha Ann.", ColumnFormat::percent});
    if (alpha_t) cols.push_back({"Alpha t_NW", ColumnFormat::ratio});
    for (const auto& name : sample.names) cols.push_back({name, ColumnFormat::beta});
    cols.push_back({r2_label, ColumnFormat::beta});
}

void add_regression_cells(std::vector<Cell>& row, const RegressionResult& r, bool alpha_t, bool adjusted) {
    row.emplace_back(r.alpha_annual);
    if (alpha_t) row.emplace_back(r.alpha_t_nw);
    for (double b : r.betas) row.emplace_back(b);
    row.emplace_back(adjusted ? r.adj_r2 : r.r2);
}

}  // namespace

Table attribution_table(const std::vector<std::pair<std::vector<std::string>, RegressionResult>>& rows,
                        const std::vector<std::string>& label_columns, bool with_n) {
    if (rows.empty()) throw Error("attribution table has no rows");
    std::vector<Column> cols;
    for (const auto& l : label_columns) cols.push_back({l});
    if (with_n) cols.push_back({"n", ColumnFormat::integer});
    add_regression_columns(cols, rows.front().second, true, "Adj. R2");
    Table t(std::move(cols));
    for (const auto& [labels, r] : rows) {
        std::vector<Cell> row(labels.begin(), labels.end());
        if (with_n) row.emplace_back(static_cast<double>(r.n));
        add_regression_cells(row, r, true, true);
        t.add_row(std::move(row));
    }
    return t;
}

Table rolling_table(const std::vector<DatedRegression>& rows) {
    if (rows.empty()) throw Error("rolling table has no rows");
    std::vector<Column> cols{{"date"}};
    add_regression_columns(cols, rows.front().result, true, "R2");
    Table t(std::move(cols));
    for (const auto& r : rows) {
        std::vector<Cell> row{format_date(r.date)};
        add_regression_cells(row, r.result, true, false);
        t.add_row(std::move(row));
    }
    return t;
}

Table period_table(const std::vector<PeriodRegression>& rows) {
    if (rows.empty()) throw Error("period table has no rows");
    std::vector<Column> cols{{"Period"}};
    add_regression_columns(cols, rows.front().result, false, "R2");
    Table t(std::move(cols));
    for (const auto& r : rows) {
        std::vector<Cell> row{r.name};
        add_regression_cells(row, r.result, false, false);
        t.add_row(std::move(row));
    }
    return t;
}

Table pair_table(const std::vector<std::pair<std::string, PairStats>>& rows) {
    Table t({{"Comparison"},
             {"Annual Excess", ColumnFormat::percent},
             {"Tracking Error", ColumnFormat::percent},
             {"Info Ratio", ColumnFormat::ratio},
             {"Max DD Diff", ColumnFormat::percent}});
    for (const auto& [name, p] : rows) {
        t.add_row({name, p.annual_excess, p.tracking_error, p.info_ratio, p.maxdd_diff});
    }
    return t;
}

Table signals_table(const SignalFrame& frame,
                    const std::vector<std::pair<std::string, std::vector<double>>>& extra) {
    const auto cols = frame.columns();
    std::vector<Column> header{{"date"}};
    for (const auto& [name, _] : cols) header.push_back({name, ColumnFormat::text});
    for (const auto& [name, _] : extra) header.push_back({name, ColumnFormat::text});
    Table t(std::move(header));
    for (std::size_t i = 0; i < frame.size(); ++i) {
        std::vector<Cell> row{format_date(frame.dates[i])};
        for (const auto& [_, v] : cols) row.emplace_back((*v)[i]);
        for (const auto& [_, v] : extra) row.emplace_back(v[i]);
        t.add_row(std::move(row));
    }
    return t;
}

Table ranked_table(const std::vector<RankedConfig>& ranked, std::size_t top) {
    Table t({{"Rank", ColumnFormat::integer},
             {"Config"},
             {"Final Wealth", ColumnFormat::ratio},
             {"CAGR", ColumnFormat::percent},
             {"Sharpe", ColumnFormat::ratio},
             {"Max DD", ColumnFormat::percent},
             {"Calmar", ColumnFormat::ratio},
             {"Turnover", ColumnFormat::percent},
             {"Avg G", ColumnFormat::percent},
             {"Selection Score", ColumnFormat::ratio}});
    for (std::size_t i = 0; i < ranked.size() && i < top; ++i) {
        const auto& r = ranked[i];
        t.add_row({static_cast<double>(i + 1), r.config.id(), r.metrics.final_wealth, r.metrics.cagr,
                   r.metrics.sharpe, r.metrics.max_dd, r.metrics.calmar, r.metrics.turnover_annual,
                   r.metrics.avg_g, r.selection});
    }
    return t;
}

Table blocks_table(const std::vector<BlockSelection>& blocks) {
    Table t({{"block_start"}, {"block_end"}, {"train_start"}, {"train_end"}, {"config"}});
    for (const auto& b : blocks) {
        t.add_row({format_date(b.block_start), format_date(b.block_end), format_date(b.train_start),
                   format_date(b.train_end), b.config_id});
    }
    return t;
}

Table quintile_table(const std::vector<std::pair<std::string, QuintileResult>>& rows) {
    Table t({{"Method"},
             {"Q1", ColumnFormat::percent},
             {"Q2", ColumnFormat::percent},
             {"Q3", ColumnFormat::percent},
             {"Q4", ColumnFormat::percent},
             {"Q5", ColumnFormat::percent},
             {"Q5-Q1", ColumnFormat::percent}});
    for (const auto& [name, q] : rows) {
        t.add_row({name, q.means[0], q.means[1], q.means[2], q.means[3], q.means[4], q.spread});
    }
    return t;
}

Table yearly_table(const std::vector<std::pair<std::string, std::vector<YearReturn>>>& series) {
    std::vector<Column> cols{{"Year", ColumnFormat::integer}};
    for (const auto& [name, _] : series) cols.push_back({name, ColumnFormat::percent});
    Table t(std::move(cols));
    if (series.empty()) return t;
    const auto& years = series.front().second;
    for (std::size_t i = 0; i < years.size(); ++i) {
        std::vector<Cell> row{static_cast<double>(years[i].year)};
        for (const auto& [name, ys] : series) {
            if (i >= ys.size() || ys[i].year != years[i].year) {
                throw Error("yearly series '" + name + "' covers different years");
            }
            row.emplace_back(ys[i].ret);
        }
        t.add_row(std::move(row));
    }
    return t;
}

Table main_gate_table(const std::vector<MainEffectRow>& rows) {
    Table t({{"Variable"},
             {"n", ColumnFormat::integer},
             {"Coef 63d", ColumnFormat::percent},
             {"HAC t 63d", ColumnFormat::ratio},
             {"Nonoverlap n", ColumnFormat::integer},
             {"Nonoverlap Coef 63d", ColumnFormat::percent},
             {"Nonoverlap HAC t", ColumnFormat::ratio},
             {"Direction"},
             {"Pass"}});
    for (const auto& r : rows) {
        t.add_row({r.name, static_cast<double>(r.n), r.coef, r.hac_t, static_cast<double>(r.n_nonoverlap),
                   r.nonoverlap_coef, r.nonoverlap_t, std::string(r.expected_sign > 0 ? "Positive" : "Negative"),
                   std::string(r.pass ? "Yes" : "No")});
    }
    return t;
}

Table interaction_gate_table(const InteractionRow& r) {
    Table t({{"Interaction"},
             {"n", ColumnFormat::integer},
             {"Raw Coef 63d", ColumnFormat::percent},
             {"Raw HAC t", ColumnFormat::ratio},
             {"TNX-Residual Coef 63d", ColumnFormat::percent},
             {"TNX-Residual HAC t", ColumnFormat::ratio}});
    t.add_row({r.name, static_cast<double>(r.n), r.raw_coef, r.raw_t, r.residual_coef, r.residual_t});
    return t;
}

Table cost_table(const std::vector<CostRow>& rows) {
    Table t({{"Cost"},
             {"CAGR", ColumnFormat::percent},
             {"Vol", ColumnFormat::percent},
             {"Sharpe", ColumnFormat::ratio},
             {"Max DD", ColumnFormat::percent},
             {"Calmar", ColumnFormat::ratio},
             {"Turnover", ColumnFormat::percent},
             {"Final Wealth", ColumnFormat::ratio}});
    for (const auto& row : rows) {
        char label[32];
        std::snprintf(label, sizeof label, "%gbp", row.cost_bps);
        const auto& m = row.result.metrics;
        t.add_row({std::string(label), m.cagr, m.vol, m.sharpe, m.max_dd, m.calmar, m.turnover_annual,
                   m.final_wealth});
    }
    return t;
}

}  // namespace styletiming
