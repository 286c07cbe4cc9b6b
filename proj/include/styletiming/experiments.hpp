#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "styletiming/benchmarks.hpp"
#include "styletiming/policy.hpp"

namespace styletiming {

/// Runs policies against one return pair and signal frame, caching standardized scores by
/// score definition (many grid configs share a score and differ only in the weight mapping).
class Backtester {
public:
    Backtester(ReturnPair returns, const SignalFrame& frame);

    const ReturnPair& returns() const { return returns_; }
    const SignalFrame& frame() const { return *frame_; }

    WindowRange range(DateWindow window) const;
    const std::vector<double>& score_z(const PolicyConfig& config);
    BacktestResult run(const PolicyConfig& config, const WindowRange& range);
    BacktestResult run(const PolicyConfig& config, DateWindow window);

private:
    ReturnPair returns_;
    const SignalFrame* frame_;
    std::map<std::string, std::vector<double>> scores_;
};

struct GridAxes {
    std::vector<double> alpha{0.50, 0.67};
    std::vector<double> lambda_s{0.25, 0.50};
    std::vector<double> lambda_c{0.05, 0.15, 0.25};
    std::vector<double> lambda_credit{0.0};
    std::vector<double> lambda_rxcs{0.0};
    std::vector<double> max_tilt{0.20, 0.30, 0.40, 0.50};
    std::vector<double> tau_w{0.75, 1.0, 1.5};
    std::vector<double> eta{0.03, 0.05, 0.10};
};

struct GridSpec {
    std::string name = "local";
    ScoreKind kind = ScoreKind::smooth;
    PolicyConfig base;  // cost, w0 and any parameter not on an axis
    GridAxes axes;

    std::size_t size() const;
    /// Cartesian product in a fixed nesting order (alpha outermost, eta innermost).
    std::vector<PolicyConfig> expand() const;
};

/// The 2*2*3*4*3*3 = 432-config local grid around the smooth score.
GridSpec local_grid();
/// Replacement-style credit score grid (432 configs).
GridSpec credit_replacement_grid();
/// Credit overlay on the fixed selected structure: lambda_credit x lambda_rxcs over
/// {0.00, 0.05, ..., 0.90} (361 configs).
GridSpec credit_incremental_grid();

/// Weights over cross-config z-scores of {Sharpe, Calmar, CAGR, -|MaxDD|, -turnover}.
struct SelectionScore {
    double sharpe = 1.0;
    double calmar = 1.0;
    double cagr = 1.0;
    double maxdd = 1.0;
    double turnover = 1.0;

    std::vector<double> composite(std::span<const Metrics> metrics) const;
};

struct RankedConfig {
    PolicyConfig config;
    Metrics metrics;
    double selection = 0.0;
};

/// Orders by selection score descending, ties broken by config id ascending.
std::vector<RankedConfig> rank_configs(std::span<const PolicyConfig> configs,
                                       std::span<const Metrics> metrics,
                                       const SelectionScore& selector);

std::vector<BacktestResult> tilt_sweep(Backtester& bt, const PolicyConfig& base,
                                       std::span<const double> tilts, DateWindow window);

/// The fixed-structure base of the tilt study: a0.50 ls0.25 lc0.15 tau1.00 eta0.05.
PolicyConfig tilt_study_base();

std::vector<RankedConfig> grid_search(Backtester& bt, const GridSpec& grid,
                                      const SelectionScore& selector, DateWindow window,
                                      double cost_bps);

enum class WalkForwardMode { expanding, rolling, fixed };

std::string to_string(WalkForwardMode mode);

struct WalkForwardSpec {
    WalkForwardMode mode = WalkForwardMode::expanding;
    std::size_t train_len = 252;
    std::size_t test_len = 63;
    GridSpec pool = local_grid();
    /// First out-of-sample date; defaults to train_len days after the window start.
    std::optional<Date> oos_start;
};

struct BlockSelection {
    Date block_start;
    Date block_end;
    Date train_start;
    Date train_end;
    std::string config_id;
};

struct WalkForwardResult {
    BacktestResult result;
    std::vector<BlockSelection> blocks;
};

/// Per 63-day block, selects the pool config with the best training-span selection score and
/// trades it through the block; the EWMA weight state runs on across block boundaries.
WalkForwardResult walk_forward(Backtester& bt, const WalkForwardSpec& spec,
                               const SelectionScore& selector, DateWindow window, double cost_bps);

/// Selects once on the first training window and trades that config for the rest.
WalkForwardResult fixed_parameter(Backtester& bt, WalkForwardSpec spec,
                                  const SelectionScore& selector, DateWindow window,
                                  double cost_bps);

/// Buy-and-hold style rows on a window: 50/50, 100% G, 100% D and SPY.
std::vector<BacktestResult> static_benchmarks(const ReturnPair& returns,
                                              std::span<const double> spy_on_returns,
                                              const WindowRange& range);

struct ValidationTable {
    std::vector<BacktestResult> rows;
    std::vector<WalkForwardResult> walk_forward;  // expanding, rolling, fixed
};

/// WF expanding, WF rolling and fixed-parameter runs plus the static benchmark rows, all on the
/// same out-of-sample span.
ValidationTable oos_validation(Backtester& bt, const GridSpec& pool, const SelectionScore& selector,
                               DateWindow window, std::optional<Date> oos_start,
                               std::span<const double> spy_on_returns, double cost_bps,
                               const std::string& label_prefix = "Smooth Score");

/// oos_validation with the out-of-sample span starting on `oos_start` (2022-01-03 in the study).
ValidationTable post_2022_validation(Backtester& bt, const GridSpec& pool,
                                     const SelectionScore& selector, DateWindow window,
                                     Date oos_start, std::span<const double> spy_on_returns,
                                     double cost_bps);

struct CostRow {
    double cost_bps = 0.0;
    BacktestResult result;
};

/// One weight path, cost drag recomputed per level.
std::vector<CostRow> cost_sensitivity(Backtester& bt, const PolicyConfig& config,
                                      std::span<const double> costs, DateWindow window);

struct CreditGridResult {
    std::vector<RankedConfig> replacement;
    std::vector<RankedConfig> incremental;
};

CreditGridResult credit_grids(Backtester& bt, const GridSpec& replacement,
                              const GridSpec& incremental, const SelectionScore& selector,
                              DateWindow window, double cost_bps);

/// Forward compounded return over days t+1..t+horizon; missing near the end.
std::vector<double> forward_compounded(std::span<const double> returns, std::size_t horizon);

struct QuintileResult {
    std::array<double, 5> means{};
    std::array<std::size_t, 5> counts{};
    double spread = 0.0;  // Q5 - Q1
};

/// Mean forward `horizon`-day compounded G-D return per score quintile.
QuintileResult quintile_diagnostic(std::span<const double> score_z, std::span<const double> gd,
                                   std::size_t horizon = 21);

struct YearReturn {
    int year = 0;
    double ret = 0.0;
};

std::vector<YearReturn> yearly_breakdown(const Calendar& dates, std::span<const double> net);

struct GateCandidate {
    std::string name;
    std::vector<double> values;
    int expected_sign = 1;
};

struct MainEffectRow {
    std::string name;
    std::size_t n = 0;
    double coef = 0.0;
    double hac_t = 0.0;
    std::size_t n_nonoverlap = 0;
    double nonoverlap_coef = 0.0;
    double nonoverlap_t = 0.0;
    int expected_sign = 1;
    bool pass = false;
};

struct InteractionRow {
    std::string name;
    std::size_t n = 0;
    double raw_coef = 0.0;
    double raw_t = 0.0;
    double residual_coef = 0.0;
    double residual_t = 0.0;
};

struct GateTable {
    std::vector<MainEffectRow> main_effects;
    std::optional<InteractionRow> interaction;
};

/// Regresses forward `horizon`-day G-D on each candidate with HAC lags horizon + 5, plus a
/// non-overlapping variant sampling every horizon-th observation.
std::vector<MainEffectRow> main_effect_gate(std::span<const GateCandidate> candidates,
                                            std::span<const double> gd, std::size_t horizon);

/// Raw and r-residualized regressions of forward G-D on an interaction signal.
InteractionRow interaction_gate(const std::string& name, std::span<const double> interaction,
                                std::span<const double> r, std::span<const double> gd,
                                std::size_t horizon);

/// Candidates r, d, g126 (and ce when available) plus the r x cs interaction gate. `gd` is
/// aligned with the frame calendar (missing where the baskets do not exist).
GateTable gate_regressions(const SignalFrame& frame, std::span<const double> gd,
                           std::size_t horizon = 63);

}  // namespace styletiming
