#include "styletiming/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "styletiming/attribution.hpp"
#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

namespace {

std::string score_key(const PolicyConfig& c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g", to_string(c.kind).c_str(),
                  c.score.alpha, c.score.lambda_s, c.score.lambda_c, c.score.lambda_credit,
                  c.score.lambda_rxcs, c.score.tau_softplus);
    return buf;
}

std::vector<double> steps(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::llround((hi - lo) / step));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e6) / 1e6);
    return out;
}

// Cross-sectional z-score; missing entries get 0, zero dispersion gives all zeros.
std::vector<double> cross_z(const std::vector<double>& x) {
    std::vector<double> valid;
    for (double v : x) {
        if (!is_missing(v)) valid.push_back(v);
    }
    std::vector<double> out(x.size(), 0.0);
    const double sd = sample_stddev(valid);
    if (!(sd > 0.0)) return out;
    const double m = mean(valid);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!is_missing(x[i])) out[i] = (x[i] - m) / sd;
    }
    return out;
}

Metrics slice_metrics(const BacktestResult& full, std::size_t begin, std::size_t end, double w0) {
    const double initial = begin == 0 ? w0 : full.weights_g[begin - 1];
    return compute_metrics(std::span<const double>(full.net).subspan(begin, end - begin),
                           std::span<const double>(full.weights_g).subspan(begin, end - begin),
                           initial);
}

struct RegressionOut {
    double coef = 0.0;
    double t = 0.0;
    std::vector<double> residuals;
};

RegressionOut simple_hac(const std::vector<double>& y, const std::vector<double>& x, int lags) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = x[static_cast<std::size_t>(i)];
        yv(i) = y[static_cast<std::size_t>(i)];
    }
    const LinearFit fit = fit_ols_hac(design, yv, lags);
    RegressionOut out;
    out.coef = fit.coef(1);
    const double se = std::sqrt(std::max(0.0, fit.cov(1, 1)));
    out.t = se > 0.0 ? out.coef / se : kMissing;
    out.residuals.assign(fit.residuals.data(), fit.residuals.data() + fit.residuals.size());
    return out;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

Backtester::Backtester(ReturnPair returns, const SignalFrame& frame)
    : returns_(std::move(returns)), frame_(&frame) {}

WindowRange Backtester::range(DateWindow window) const {
    return resolve_window(returns_, *frame_, window);
}

const std::vector<double>& Backtester::score_z(const PolicyConfig& config) {
    const auto key = score_key(config);
    auto it = scores_.find(key);
    if (it == scores_.end()) {
        it = scores_.emplace(key, compose_score(*frame_, config.kind, config.score).score_z).first;
    }
    return it->second;
}

BacktestResult Backtester::run(const PolicyConfig& config, const WindowRange& range) {
    return simulate_policy(config, returns_, score_z(config), range);
}

BacktestResult Backtester::run(const PolicyConfig& config, DateWindow window) {
    return run(config, range(window));
}

std::size_t GridSpec::size() const {
    return axes.alpha.size() * axes.lambda_s.size() * axes.lambda_c.size() *
           axes.lambda_credit.size() * axes.lambda_rxcs.size() * axes.max_tilt.size() *
           axes.tau_w.size() * axes.eta.size();
}

std::vector<PolicyConfig> GridSpec::expand() const {
    std::vector<PolicyConfig> out;
    out.reserve(size());
    for (double a : axes.alpha)
        for (double ls : axes.lambda_s)
            for (double lc : axes.lambda_c)
                for (double lcr : axes.lambda_credit)
                    for (double lrx : axes.lambda_rxcs)
                        for (double tilt : axes.max_tilt)
                            for (double tau : axes.tau_w)
                                for (double eta : axes.eta) {
                                    PolicyConfig c = base;
                                    c.kind = kind;
                                    c.score.alpha = a;
                                    c.score.lambda_s = ls;
                                    c.score.lambda_c = lc;
                                    c.score.lambda_credit = lcr;
                                    c.score.lambda_rxcs = lrx;
                                    c.max_tilt = tilt;
                                    c.tau_w = tau;
                                    c.eta = eta;
                                    out.push_back(c);
                                }
    return out;
}

GridSpec local_grid() { return GridSpec{}; }

GridSpec credit_replacement_grid() {
    GridSpec g;
    g.name = "credit_replacement";
    g.kind = ScoreKind::credit_replacement;
    g.axes.alpha = {0.50, 0.67};
    g.axes.lambda_s = {0.0};
    g.axes.lambda_c = {0.05, 0.15, 0.25};
    g.axes.lambda_rxcs = {0.25, 0.50};
    return g;
}

GridSpec credit_incremental_grid() {
    GridSpec g;
    g.name = "credit_incremental";
    g.kind = ScoreKind::smooth;
    g.base = selected_config();
    g.axes.alpha = {g.base.score.alpha};
    g.axes.lambda_s = {g.base.score.lambda_s};
    g.axes.lambda_c = {g.base.score.lambda_c};
    g.axes.max_tilt = {g.base.max_tilt};
    g.axes.tau_w = {g.base.tau_w};
    g.axes.eta = {g.base.eta};
    g.axes.lambda_credit = steps(0.0, 0.90, 0.05);
    g.axes.lambda_rxcs = steps(0.0, 0.90, 0.05);
    return g;
}

std::vector<double> SelectionScore::composite(std::span<const Metrics> metrics) const {
    const std::size_t n = metrics.size();
    std::vector<double> sh(n), ca(n), cg(n), dd(n), to(n);
    for (std::size_t i = 0; i < n; ++i) {
        sh[i] = metrics[i].sharpe;
        ca[i] = metrics[i].calmar;
        cg[i] = metrics[i].cagr;
        dd[i] = -std::abs(metrics[i].max_dd);
        to[i] = -metrics[i].turnover_annual;
    }
    const auto zs = cross_z(sh), zc = cross_z(ca), zg = cross_z(cg), zd = cross_z(dd), zt = cross_z(to);
    const double total = sharpe + calmar + cagr + maxdd + turnover;
    if (!(total > 0.0)) throw ValidationError("selection weights must have a positive sum");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (sharpe * zs[i] + calmar * zc[i] + cagr * zg[i] + maxdd * zd[i] + turnover * zt[i]) / total;
    }
    return out;
}

std::vector<RankedConfig> rank_configs(std::span<const PolicyConfig> configs,
                                       std::span<const Metrics> metrics,
                                       const SelectionScore& selector) {
    if (configs.size() != metrics.size()) throw ValidationError("rank_configs: size mismatch");
    const auto scores = selector.composite(metrics);
    std::vector<RankedConfig> out;
    out.reserve(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) out.push_back({configs[i], metrics[i], scores[i]});
    std::sort(out.begin(), out.end(), [](const RankedConfig& a, const RankedConfig& b) {
        if (a.selection != b.selection) return a.selection > b.selection;
        return a.config.id() < b.config.id();
    });
    return out;
}

PolicyConfig tilt_study_base() {
    PolicyConfig c;
    c.score.alpha = 0.50;
    c.score.lambda_s = 0.25;
    c.score.lambda_c = 0.15;
    c.tau_w = 1.0;
    c.eta = 0.05;
    return c;
}

std::vector<BacktestResult> tilt_sweep(Backtester& bt, const PolicyConfig& base,
                                       std::span<const double> tilts, DateWindow window) {
    const auto range = bt.range(window);
    std::vector<BacktestResult> out;
    for (double tilt : tilts) {
        PolicyConfig c = base;
        c.max_tilt = tilt;
        out.push_back(bt.run(c, range));
    }
    return out;
}

std::vector<RankedConfig> grid_search(Backtester& bt, const GridSpec& grid,
                                      const SelectionScore& selector, DateWindow window,
                                      double cost_bps) {
    auto configs = grid.expand();
    if (configs.empty()) throw ValidationError("grid '" + grid.name + "' is empty");
    const auto range = bt.range(window);
    std::vector<Metrics> metrics;
    metrics.reserve(configs.size());
    for (auto& c : configs) {
        c.cost_bps = cost_bps;
        metrics.push_back(bt.run(c, range).metrics);
    }
    return rank_configs(configs, metrics, selector);
}

std::string to_string(WalkForwardMode mode) {
    switch (mode) {
        case WalkForwardMode::expanding: return "expanding";
        case WalkForwardMode::rolling: return "rolling";
        case WalkForwardMode::fixed: return "fixed";
    }
    return "unknown";
}

WalkForwardResult walk_forward(Backtester& bt, const WalkForwardSpec& spec,
                               const SelectionScore& selector, DateWindow window, double cost_bps) {
    if (spec.train_len == 0 || spec.test_len == 0) {
        throw ValidationError("walk-forward train and test lengths must be positive");
    }
    auto configs = spec.pool.expand();
    if (configs.empty()) throw ValidationError("walk-forward pool is empty");
    for (auto& c : configs) c.cost_bps = cost_bps;

    const auto range = bt.range(window);
    const std::size_t len = range.end - range.begin;
    const auto& dates = bt.returns().dates;
    std::size_t oos_begin = spec.train_len;
    if (spec.oos_start) {
        if (*spec.oos_start < dates[range.begin]) {
            throw ValidationError("out-of-sample start " + format_date(*spec.oos_start) +
                                  " precedes the window start");
        }
        oos_begin = lower_index(dates, *spec.oos_start) - range.begin;
        if (oos_begin < spec.train_len) {
            throw ValidationError("out-of-sample start " + format_date(*spec.oos_start) +
                                  " leaves fewer than " + std::to_string(spec.train_len) +
                                  " training days");
        }
    }
    if (len <= spec.train_len + spec.test_len || oos_begin >= len) {
        throw ValidationError("walk-forward window of " + std::to_string(len) +
                              " days is too short for training " + std::to_string(spec.train_len) +
                              " + test " + std::to_string(spec.test_len));
    }

    // Full-window paths: training metrics are slices of these, which only use data before the slice end.
    std::vector<BacktestResult> paths;
    paths.reserve(configs.size());
    for (const auto& c : configs) paths.push_back(bt.run(c, range));

    auto select = [&](std::size_t train_begin, std::size_t train_end) {
        std::vector<Metrics> metrics;
        metrics.reserve(configs.size());
        for (std::size_t i = 0; i < configs.size(); ++i) {
            metrics.push_back(slice_metrics(paths[i], train_begin, train_end, configs[i].w0));
        }
        const auto ranked = rank_configs(configs, metrics, selector);
        const auto id = ranked.front().config.id();
        for (std::size_t i = 0; i < configs.size(); ++i) {
            if (configs[i].id() == id) return i;
        }
        return std::size_t{0};
    };

    WalkForwardResult out;
    std::vector<std::size_t> chosen_per_day(len - oos_begin);
    std::size_t fixed_choice = 0;
    if (spec.mode == WalkForwardMode::fixed) fixed_choice = select(0, spec.train_len);
    for (std::size_t b = oos_begin; b < len; b += spec.test_len) {
        const std::size_t e = std::min(b + spec.test_len, len);
        std::size_t train_begin = 0;
        std::size_t train_end = b;
        std::size_t choice = fixed_choice;
        switch (spec.mode) {
            case WalkForwardMode::expanding:
                choice = select(train_begin, train_end);
                break;
            case WalkForwardMode::rolling:
                train_begin = b - spec.train_len;
                choice = select(train_begin, train_end);
                break;
            case WalkForwardMode::fixed:
                train_end = spec.train_len;
                break;
        }
        out.blocks.push_back({dates[range.begin + b], dates[range.begin + e - 1],
                              dates[range.begin + train_begin], dates[range.begin + train_end - 1],
                              configs[choice].id()});
        for (std::size_t t = b; t < e; ++t) chosen_per_day[t - oos_begin] = choice;
    }

    // Stitch: one EWMA state carried through, each day's update uses that day's block config.
    const std::size_t oos_len = len - oos_begin;
    std::vector<double> applied(oos_len);
    const double w0 = configs.front().w0;
    double decided = w0;
    for (std::size_t i = 0; i < oos_len; ++i) {
        applied[i] = decided;
        const auto& c = configs[chosen_per_day[i]];
        const double s = bt.score_z(c)[range.frame_offset + oos_begin + i];
        const double target = target_weight(s, c.max_tilt, c.tau_w);
        if (!is_missing(target)) decided = (1.0 - c.eta) * decided + c.eta * target;
    }
    WindowRange oos = range;
    oos.begin = range.begin + oos_begin;
    oos.frame_offset = range.frame_offset + oos_begin;
    out.result = replay_weights(bt.returns(), oos, applied, cost_bps, w0);
    out.result.name = "WF " + to_string(spec.mode);
    return out;
}

WalkForwardResult fixed_parameter(Backtester& bt, WalkForwardSpec spec,
                                  const SelectionScore& selector, DateWindow window,
                                  double cost_bps) {
    spec.mode = WalkForwardMode::fixed;
    return walk_forward(bt, spec, selector, window, cost_bps);
}

std::vector<BacktestResult> static_benchmarks(const ReturnPair& returns,
                                              std::span<const double> spy_on_returns,
                                              const WindowRange& range) {
    const std::size_t len = range.end - range.begin;
    std::vector<BacktestResult> out;
    const std::pair<const char*, double> mixes[] = {{"50/50 G/D", 0.5}, {"100% G", 1.0}, {"100% D", 0.0}};
    for (const auto& [name, w] : mixes) {
        const std::vector<double> weights(len, w);
        auto r = replay_weights(returns, range, weights, 0.0, w);
        r.name = name;
        out.push_back(std::move(r));
    }
    if (!spy_on_returns.empty()) {
        if (spy_on_returns.size() != returns.dates.size()) {
            throw ValidationError("SPY returns are not aligned with the basket calendar");
        }
        BacktestResult spy;
        spy.name = "SPY";
        spy.dates.assign(returns.dates.begin() + static_cast<std::ptrdiff_t>(range.begin),
                         returns.dates.begin() + static_cast<std::ptrdiff_t>(range.end));
        spy.gross.assign(spy_on_returns.begin() + static_cast<std::ptrdiff_t>(range.begin),
                         spy_on_returns.begin() + static_cast<std::ptrdiff_t>(range.end));
        spy.net = spy.gross;
        spy.costs.assign(len, 0.0);
        double wealth = 1.0;
        for (double r : spy.net) spy.equity.push_back(wealth *= 1.0 + r);
        spy.metrics = compute_metrics(spy.net);
        out.push_back(std::move(spy));
    }
    return out;
}

ValidationTable oos_validation(Backtester& bt, const GridSpec& pool, const SelectionScore& selector,
                               DateWindow window, std::optional<Date> oos_start,
                               std::span<const double> spy_on_returns, double cost_bps,
                               const std::string& label_prefix) {
    ValidationTable table;
    const std::pair<WalkForwardMode, const char*> modes[] = {
        {WalkForwardMode::expanding, " WF Expanding"},
        {WalkForwardMode::rolling, " WF Rolling"},
        {WalkForwardMode::fixed, " Fixed Parameter"}};
    for (const auto& [mode, suffix] : modes) {
        WalkForwardSpec spec;
        spec.mode = mode;
        spec.pool = pool;
        spec.oos_start = oos_start;
        auto wf = walk_forward(bt, spec, selector, window, cost_bps);
        wf.result.name = label_prefix + suffix;
        table.rows.push_back(wf.result);
        table.walk_forward.push_back(std::move(wf));
    }
    const auto& first = table.rows.front();
    const auto range = bt.range({first.dates.front(), first.dates.back()});
    for (auto& row : static_benchmarks(bt.returns(), spy_on_returns, range)) {
        table.rows.push_back(std::move(row));
    }
    return table;
}

ValidationTable post_2022_validation(Backtester& bt, const GridSpec& pool,
                                     const SelectionScore& selector, DateWindow window,
                                     Date oos_start, std::span<const double> spy_on_returns,
                                     double cost_bps) {
    if (oos_start < window.start || oos_start > window.end) {
        throw ValidationError("post-2022 start " + format_date(oos_start) +
                              " lies outside the study window");
    }
    return oos_validation(bt, pool, selector, window, oos_start, spy_on_returns, cost_bps);
}

std::vector<CostRow> cost_sensitivity(Backtester& bt, const PolicyConfig& config,
                                      std::span<const double> costs, DateWindow window) {
    const auto range = bt.range(window);
    PolicyConfig gross_config = config;
    gross_config.cost_bps = 0.0;
    const auto base = bt.run(gross_config, range);
    std::vector<CostRow> out;
    for (double bps : costs) {
        if (!(bps >= 0.0)) throw ValidationError("cost levels must be nonnegative");
        auto r = replay_weights(bt.returns(), range, base.weights_g, bps, config.w0);
        r.name = base.name;
        out.push_back({bps, std::move(r)});
    }
    return out;
}

CreditGridResult credit_grids(Backtester& bt, const GridSpec& replacement,
                              const GridSpec& incremental, const SelectionScore& selector,
                              DateWindow window, double cost_bps) {
    if (!bt.frame().has_credit()) {
        throw DataCoverageError("credit grids need the BAA10Y series, which is not loaded");
    }
    CreditGridResult out;
    out.replacement = grid_search(bt, replacement, selector, window, cost_bps);
    out.incremental = grid_search(bt, incremental, selector, window, cost_bps);
    return out;
}

std::vector<double> forward_compounded(std::span<const double> returns, std::size_t horizon) {
    std::vector<double> out(returns.size(), kMissing);
    for (std::size_t t = 0; t + horizon < returns.size(); ++t) {
        double growth = 1.0;
        for (std::size_t s = t + 1; s <= t + horizon; ++s) growth *= 1.0 + returns[s];
        out[t] = growth - 1.0;
    }
    return out;
}

QuintileResult quintile_diagnostic(std::span<const double> score_z, std::span<const double> gd,
                                   std::size_t horizon) {
    if (horizon < 1) throw ValidationError("quintile horizon must be at least 1");
    if (score_z.size() != gd.size()) throw ValidationError("quintile inputs are not aligned");
    const auto fwd = forward_compounded(gd, horizon);
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < score_z.size(); ++t) {
        if (!is_missing(score_z[t]) && !is_missing(fwd[t])) idx.push_back(t);
    }
    if (idx.size() < 5 * horizon) {
        throw ValidationError("quintile diagnostic needs at least " + std::to_string(5 * horizon) +
                              " observations, got " + std::to_string(idx.size()));
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return score_z[a] < score_z[b]; });
    QuintileResult out;
    const std::size_t n = idx.size();
    for (std::size_t q = 0; q < 5; ++q) {
        const std::size_t lo = q * n / 5;
        const std::size_t hi = (q + 1) * n / 5;
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += fwd[idx[i]];
        out.counts[q] = hi - lo;
        out.means[q] = sum / static_cast<double>(hi - lo);
    }
    out.spread = out.means[4] - out.means[0];
    return out;
}

std::vector<YearReturn> yearly_breakdown(const Calendar& dates, std::span<const double> net) {
    if (dates.size() != net.size()) throw ValidationError("yearly_breakdown: size mismatch");
    std::vector<YearReturn> out;
    for (std::size_t t = 0; t < net.size(); ++t) {
        const int y = year_of(dates[t]);
        if (out.empty() || out.back().year != y) out.push_back({y, 0.0});
        out.back().ret = (1.0 + out.back().ret) * (1.0 + net[t]) - 1.0;
    }
    return out;
}

std::vector<MainEffectRow> main_effect_gate(std::span<const GateCandidate> candidates,
                                            std::span<const double> gd, std::size_t horizon) {
    const auto fwd = forward_compounded(gd, horizon);
    std::vector<MainEffectRow> out;
    for (const auto& cand : candidates) {
        if (cand.values.size() != gd.size()) {
            throw ValidationError("gate candidate '" + cand.name + "' is not aligned with G-D");
        }
        std::vector<double> y, x;
        for (std::size_t t = 0; t < gd.size(); ++t) {
            if (!is_missing(cand.values[t]) && !is_missing(fwd[t])) {
                y.push_back(fwd[t]);
                x.push_back(cand.values[t]);
            }
        }
        std::vector<double> y_no, x_no;
        for (std::size_t i = 0; i < y.size(); i += horizon) {
            y_no.push_back(y[i]);
            x_no.push_back(x[i]);
        }
        if (y.size() < 2 * horizon || y_no.size() < 5) {
            throw ValidationError("gate '" + cand.name + "' has too few observations (" +
                                  std::to_string(y.size()) + ")");
        }
        MainEffectRow row;
        row.name = cand.name;
        row.expected_sign = cand.expected_sign;
        row.n = y.size();
        const auto overlap = simple_hac(y, x, static_cast<int>(horizon) + 5);
        row.coef = overlap.coef;
        row.hac_t = overlap.t;
        row.n_nonoverlap = y_no.size();
        const auto sparse = simple_hac(y_no, x_no, default_hac_lags(y_no.size()));
        row.nonoverlap_coef = sparse.coef;
        row.nonoverlap_t = sparse.t;
        row.pass = sign_of(row.coef) == cand.expected_sign &&
                   sign_of(row.nonoverlap_coef) == cand.expected_sign;
        out.push_back(std::move(row));
    }
    return out;
}

InteractionRow interaction_gate(const std::string& name, std::span<const double> interaction,
                                std::span<const double> r, std::span<const double> gd,
                                std::size_t horizon) {
    if (interaction.size() != gd.size() || r.size() != gd.size()) {
        throw ValidationError("interaction gate inputs are not aligned");
    }
    const auto fwd = forward_compounded(gd, horizon);
    std::vector<double> y, x, rr;
    for (std::size_t t = 0; t < gd.size(); ++t) {
        if (!is_missing(interaction[t]) && !is_missing(r[t]) && !is_missing(fwd[t])) {
            y.push_back(fwd[t]);
            x.push_back(interaction[t]);
            rr.push_back(r[t]);
        }
    }
    if (y.size() < 2 * horizon) {
        throw ValidationError("interaction gate '" + name + "' has too few observations");
    }
    const int lags = static_cast<int>(horizon) + 5;
    InteractionRow row;
    row.name = name;
    row.n = y.size();
    const auto raw = simple_hac(y, x, lags);
    row.raw_coef = raw.coef;
    row.raw_t = raw.t;
    const auto on_r = simple_hac(y, rr, lags);
    const auto resid = simple_hac(on_r.residuals, x, lags);
    row.residual_coef = resid.coef;
    row.residual_t = resid.t;
    return row;
}

GateTable gate_regressions(const SignalFrame& frame, std::span<const double> gd,
                           std::size_t horizon) {
    if (gd.size() != frame.size()) throw ValidationError("gate_regressions: G-D not on frame calendar");
    std::vector<GateCandidate> candidates{{"r", frame.directional.r, 1},
                                          {"d", frame.directional.d, 1},
                                          {"g126", frame.directional.g126, -1}};
    if (frame.has_credit()) candidates.push_back({"ce", frame.credit.ce, 1});
    GateTable table;
    table.main_effects = main_effect_gate(candidates, gd, horizon);
    if (frame.has_credit()) {
        table.interaction = interaction_gate("r x cs", frame.credit.rcs_z, frame.directional.r, gd, horizon);
    }
    return table;
}

}  // namespace styletiming
