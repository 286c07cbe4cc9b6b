#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "styletiming/market_data.hpp"
#include "styletiming/signal_kernel.hpp"

namespace styletiming {

struct PolicyConfig {
    ScoreKind kind = ScoreKind::smooth;
    ScoreParams score;
    double max_tilt = 0.50;
    double tau_w = 0.75;
    double eta = 0.05;
    double cost_bps = 10.0;
    double w0 = 0.5;

    void validate() const;
    /// Stable identifier, e.g. "a0.50 ls0.50 lc0.05 tilt0.50 tau0.75 eta0.05".
    std::string id() const;
};

/// The selected smooth-score configuration (a0.50 ls0.50 lc0.05 tilt0.50 tau0.75 eta0.05).
PolicyConfig selected_config();

/// Annualized performance block. NaN marks an undefined ratio (zero variance, no drawdown) and
/// avg_g for series without a G weight.
struct Metrics {
    std::size_t n = 0;
    double final_wealth = 1.0;
    double cagr = 0.0;
    double vol = 0.0;
    double sharpe = 0.0;
    double sortino = 0.0;
    double max_dd = 0.0;
    double calmar = 0.0;
    double turnover_annual = 0.0;
    double avg_g = 0.0;
};

/// 0.5 + max_tilt * tanh(score / tau_w); missing score gives a missing target.
double target_weight(double score_z, double max_tilt, double tau_w);
std::vector<double> target_weights(std::span<const double> scores, double max_tilt, double tau_w);

/// w_t = (1-eta) w_{t-1} + eta * target_t, holding w_{t-1} on missing targets. Element t is the
/// weight decided at the close of day t.
std::vector<double> ewma_weights(std::span<const double> targets, double eta, double w0);

/// Applied weight on day t is the weight decided at the close of day t-1; day 0 uses w0.
std::vector<double> apply_execution_lag(std::span<const double> decided, double w0);

/// 2 |dw| cost_bps / 10000.
double transaction_cost(double dw, double cost_bps);

/// `weights` (optional) are the applied G weights aligned with `net`; `initial_weight` is the
/// weight held before the first day, for turnover on the first day.
Metrics compute_metrics(std::span<const double> net, std::span<const double> weights = {},
                        std::optional<double> initial_weight = std::nullopt);

/// Max drawdown of the wealth path that starts at 1.0 and compounds `returns`.
double max_drawdown(std::span<const double> returns);

struct BacktestResult {
    std::string name;
    Calendar dates;
    std::vector<double> weights_g;  // applied
    std::vector<double> gross;
    std::vector<double> costs;
    std::vector<double> net;
    std::vector<double> equity;
    Metrics metrics;
};

/// G and D basket returns on one calendar.
struct ReturnPair {
    Calendar dates;
    std::vector<double> g;
    std::vector<double> d;

    static ReturnPair from(const ReturnSeries& g, const ReturnSeries& d);
};

/// Index range [begin, end) of `window` on `dates`, validated against the signal warmup:
/// throws ValidationError naming the first feasible date when the window starts earlier.
struct WindowRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t frame_offset = 0;  // frame index of dates[begin]
};

WindowRange resolve_window(const ReturnPair& returns, const SignalFrame& frame, DateWindow window);

/// Trades a precomputed standardized score (aligned with frame.dates) through the window.
BacktestResult simulate_policy(const PolicyConfig& config, const ReturnPair& returns,
                               std::span<const double> score_z, const WindowRange& range);

/// Replays a fixed applied-weight path with a given cost level.
BacktestResult replay_weights(const ReturnPair& returns, const WindowRange& range,
                              std::span<const double> applied_weights, double cost_bps,
                              double initial_weight);

BacktestResult run_backtest(const PolicyConfig& config, const ReturnSeries& g,
                            const ReturnSeries& d, const SignalFrame& frame, DateWindow window);

}  // namespace styletiming
