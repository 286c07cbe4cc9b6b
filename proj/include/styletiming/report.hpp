#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "styletiming/attribution.hpp"
#include "styletiming/benchmarks.hpp"
#include "styletiming/experiments.hpp"
#include "styletiming/market_data.hpp"

namespace styletiming {

/// How a column is printed in the display file. The `_full` companion prints every number at
/// full precision in decimal units.
enum class ColumnFormat { text, percent, ratio, beta, integer };

struct Column {
    std::string name;
    ColumnFormat format = ColumnFormat::text;
};

using Cell = std::variant<std::string, double>;

/// Delimited text table: `<name>.csv` rounded for reading, `<name>_full.csv` at full precision.
class Table {
public:
    explicit Table(std::vector<Column> columns);

    void add_row(std::vector<Cell> row);
    std::size_t rows() const { return rows_.size(); }

    std::string render(bool full) const;
    void write(const std::filesystem::path& dir, const std::string& name) const;

private:
    std::vector<Column> columns_;
    std::vector<std::vector<Cell>> rows_;
};

/// Display formatting: NA for missing, percentages x100 to 2 decimals.
std::string format_cell(double value, ColumnFormat format);
/// Shortest round-trip representation, NA for missing.
std::string format_full(double value);

/// Lowercase, non-alphanumerics collapsed to '_'.
std::string slug(const std::string& name);

enum class MetricColumn { final_wealth, cagr, vol, sharpe, sortino, max_dd, calmar, turnover, avg_g };

/// Method + the chosen metric columns.
Table metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows,
                    const std::vector<MetricColumn>& columns,
                    const std::string& label = "Method");

/// Full aligned-comparison column set: wealth, CAGR, vol, Sharpe, Sortino, MaxDD, Calmar,
/// turnover, avg G.
std::vector<MetricColumn> all_metric_columns();

void write_equity(const std::filesystem::path& dir, const BacktestResult& result);
void write_metrics(const std::filesystem::path& dir, const BacktestResult& result);

Table coverage_table(const std::vector<CoverageRow>& coverage);
/// Regression rows: label column(s) then n, alpha, t, betas and adjusted R^2.
Table attribution_table(const std::vector<std::pair<std::vector<std::string>, RegressionResult>>& rows,
                        const std::vector<std::string>& label_columns, bool with_n);
Table rolling_table(const std::vector<DatedRegression>& rows);
Table period_table(const std::vector<PeriodRegression>& rows);
Table pair_table(const std::vector<std::pair<std::string, PairStats>>& rows);
Table signals_table(const SignalFrame& frame, const std::vector<std::pair<std::string, std::vector<double>>>& extra);
Table ranked_table(const std::vector<RankedConfig>& ranked, std::size_t top);
Table blocks_table(const std::vector<BlockSelection>& blocks);
Table quintile_table(const std::vector<std::pair<std::string, QuintileResult>>& rows);
Table yearly_table(const std::vector<std::pair<std::string, std::vector<YearReturn>>>& series);
Table main_gate_table(const std::vector<MainEffectRow>& rows);
Table interaction_gate_table(const InteractionRow& row);
Table cost_table(const std::vector<CostRow>& rows);

}  // namespace styletiming
