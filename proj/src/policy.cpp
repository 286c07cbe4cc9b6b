#include "styletiming/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

void PolicyConfig::validate() const {
    score.validate();
    if (!(max_tilt > 0.0 && max_tilt <= 0.5)) throw ValidationError("max_tilt must lie in (0, 0.5]");
    if (!(tau_w > 0.0)) throw ValidationError("tau_w must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
    if (!(cost_bps >= 0.0)) throw ValidationError("cost_bps must be nonnegative");
    if (!(w0 >= 0.5 - max_tilt && w0 <= 0.5 + max_tilt)) {
        throw ValidationError("w0 must lie within 0.5 +/- max_tilt");
    }
}

std::string PolicyConfig::id() const {
    char buf[160];
    int len = 0;
    switch (kind) {
        case ScoreKind::smooth:
            len = std::snprintf(buf, sizeof buf, "a%.2f ls%.2f lc%.2f", score.alpha, score.lambda_s,
                                score.lambda_c);
            break;
        case ScoreKind::tnx_only:
            buf[0] = '\0';
            break;
        case ScoreKind::core_only:
        case ScoreKind::credit_core:
            len = std::snprintf(buf, sizeof buf, "a%.2f", score.alpha);
            break;
        case ScoreKind::credit_replacement:
            len = std::snprintf(buf, sizeof buf, "a%.2f lc%.2f lrxcs%.2f", score.alpha,
                                score.lambda_c, score.lambda_rxcs);
            break;
    }
    if (kind == ScoreKind::smooth && (score.lambda_credit != 0.0 || score.lambda_rxcs != 0.0)) {
        len += std::snprintf(buf + len, sizeof buf - static_cast<std::size_t>(len),
                             " lcredit%.2f lrxcs%.2f", score.lambda_credit, score.lambda_rxcs);
    }
    std::snprintf(buf + len, sizeof buf - static_cast<std::size_t>(len), "%stilt%.2f tau%.2f eta%.2f",
                  len > 0 ? " " : "", max_tilt, tau_w, eta);
    if (kind == ScoreKind::smooth) return buf;
    return to_string(kind) + " " + buf;
}

PolicyConfig selected_config() {
    PolicyConfig c;
    c.score.alpha = 0.50;
    c.score.lambda_s = 0.50;
    c.score.lambda_c = 0.05;
    c.max_tilt = 0.50;
    c.tau_w = 0.75;
    c.eta = 0.05;
    return c;
}

double target_weight(double score_z, double max_tilt, double tau_w) {
    if (is_missing(score_z)) return kMissing;
    return 0.5 + max_tilt * std::tanh(score_z / tau_w);
}

std::vector<double> target_weights(std::span<const double> scores, double max_tilt, double tau_w) {
    std::vector<double> out(scores.size());
    for (std::size_t t = 0; t < scores.size(); ++t) out[t] = target_weight(scores[t], max_tilt, tau_w);
    return out;
}

std::vector<double> ewma_weights(std::span<const double> targets, double eta, double w0) {
    if (!(eta > 0.0 && eta <= 1.0)) throw ValidationError("eta must lie in (0, 1]");
    std::vector<double> out(targets.size());
    double w = w0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (!is_missing(targets[t])) w = (1.0 - eta) * w + eta * targets[t];
        out[t] = w;
    }
    return out;
}

std::vector<double> apply_execution_lag(std::span<const double> decided, double w0) {
    std::vector<double> out(decided.size());
    for (std::size_t t = 0; t < decided.size(); ++t) out[t] = t == 0 ? w0 : decided[t - 1];
    return out;
}

double transaction_cost(double dw, double cost_bps) {
    return 2.0 * std::abs(dw) * cost_bps / 10000.0;
}

double max_drawdown(std::span<const double> returns) {
    double wealth = 1.0;
    double peak = 1.0;
    double worst = 0.0;
    for (double r : returns) {
        wealth *= 1.0 + r;
        peak = std::max(peak, wealth);
        worst = std::min(worst, wealth / peak - 1.0);
    }
    return worst;
}

Metrics compute_metrics(std::span<const double> net, std::span<const double> weights,
                        std::optional<double> initial_weight) {
    if (net.empty()) throw ValidationError("compute_metrics: empty return series");
    Metrics m;
    m.n = net.size();
    const double n = static_cast<double>(net.size());
    const double annual = static_cast<double>(kTradingDaysPerYear);
    for (double r : net) m.final_wealth *= 1.0 + r;
    m.cagr = std::pow(m.final_wealth, annual / n) - 1.0;

    const double mu = mean(net);
    const double sd = sample_stddev(net);
    m.vol = is_missing(sd) ? kMissing : sd * std::sqrt(annual);
    m.sharpe = sd > 0.0 ? mu / sd * std::sqrt(annual) : kMissing;
    double downside = 0.0;
    for (double r : net) downside += std::min(r, 0.0) * std::min(r, 0.0);
    downside = std::sqrt(downside / n);
    m.sortino = downside > 0.0 ? mu / downside * std::sqrt(annual) : kMissing;

    m.max_dd = max_drawdown(net);
    m.calmar = m.max_dd < 0.0 ? m.cagr / std::abs(m.max_dd) : kMissing;

    if (weights.empty()) {
        m.turnover_annual = 0.0;
        m.avg_g = kMissing;
    } else {
        if (weights.size() != net.size()) {
            throw ValidationError("compute_metrics: weights and returns lengths differ");
        }
        double traded = 0.0;
        double prev = initial_weight.value_or(weights.front());
        for (double w : weights) {
            traded += 2.0 * std::abs(w - prev);
            prev = w;
        }
        m.turnover_annual = annual / n * traded;
        m.avg_g = mean(weights);
    }
    return m;
}

ReturnPair ReturnPair::from(const ReturnSeries& g, const ReturnSeries& d) {
    if (g.dates != d.dates) {
        throw ValidationError("G and D returns are on different calendars");
    }
    return ReturnPair{g.dates, g.values, d.values};
}

WindowRange resolve_window(const ReturnPair& returns, const SignalFrame& frame, DateWindow window) {
    if (returns.dates.empty()) throw ValidationError("no return data");
    if (window.end < window.start) {
        throw ValidationError("window start " + format_date(window.start) + " is after end " +
                              format_date(window.end));
    }
    if (window.start < returns.dates.front()) {
        throw ValidationError("window start " + format_date(window.start) +
                              " precedes the data start " + format_date(returns.dates.front()));
    }
    WindowRange range;
    range.begin = lower_index(returns.dates, window.start);
    range.end = upper_index(returns.dates, window.end);
    if (range.end <= range.begin) {
        throw ValidationError("window " + format_date(window.start) + " to " +
                              format_date(window.end) + " contains no trading days");
    }
    const Date first = returns.dates[range.begin];
    const std::size_t offset = lower_index(frame.dates, first);
    if (offset + (range.end - range.begin) > frame.size() || frame.dates[offset] != first) {
        throw ValidationError("signal frame does not cover the backtest window");
    }
    for (std::size_t i = range.begin; i < range.end; ++i) {
        if (frame.dates[offset + (i - range.begin)] != returns.dates[i]) {
            throw ValidationError("signal frame and returns calendars differ at " +
                                  format_date(returns.dates[i]));
        }
    }
    const std::size_t feasible = frame.first_complete_input();
    if (feasible >= frame.size()) {
        throw ValidationError("signal warmup never completes on the available data");
    }
    if (offset < feasible) {
        throw ValidationError("window start " + format_date(first) +
                              " precedes the signal warmup; first feasible date is " +
                              format_date(frame.dates[feasible]));
    }
    range.frame_offset = offset;
    return range;
}

BacktestResult replay_weights(const ReturnPair& returns, const WindowRange& range,
                              std::span<const double> applied_weights, double cost_bps,
                              double initial_weight) {
    const std::size_t len = range.end - range.begin;
    if (applied_weights.size() != len) {
        throw ValidationError("replay_weights: weight path length differs from the window");
    }
    BacktestResult out;
    out.dates.assign(returns.dates.begin() + static_cast<std::ptrdiff_t>(range.begin),
                     returns.dates.begin() + static_cast<std::ptrdiff_t>(range.end));
    out.weights_g.assign(applied_weights.begin(), applied_weights.end());
    out.gross.resize(len);
    out.costs.resize(len);
    out.net.resize(len);
    out.equity.resize(len);
    double prev = initial_weight;
    double wealth = 1.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double w = applied_weights[i];
        const std::size_t k = range.begin + i;
        out.gross[i] = w * returns.g[k] + (1.0 - w) * returns.d[k];
        out.costs[i] = transaction_cost(w - prev, cost_bps);
        out.net[i] = out.gross[i] - out.costs[i];
        wealth *= 1.0 + out.net[i];
        out.equity[i] = wealth;
        prev = w;
    }
    out.metrics = compute_metrics(out.net, out.weights_g, initial_weight);
    return out;
}

BacktestResult simulate_policy(const PolicyConfig& config, const ReturnPair& returns,
                               std::span<const double> score_z, const WindowRange& range) {
    config.validate();
    const std::size_t len = range.end - range.begin;
    if (range.frame_offset + len > score_z.size()) {
        throw ValidationError("score series does not cover the backtest window");
    }
    const auto targets =
        target_weights(score_z.subspan(range.frame_offset, len), config.max_tilt, config.tau_w);
    const auto decided = ewma_weights(targets, config.eta, config.w0);
    const auto applied = apply_execution_lag(decided, config.w0);
    auto out = replay_weights(returns, range, applied, config.cost_bps, config.w0);
    out.name = config.id();
    return out;
}

BacktestResult run_backtest(const PolicyConfig& config, const ReturnSeries& g,
                            const ReturnSeries& d, const SignalFrame& frame, DateWindow window) {
    const auto returns = ReturnPair::from(g, d);
    const auto range = resolve_window(returns, frame, window);
    const auto score = compose_score(frame, config.kind, config.score);
    return simulate_policy(config, returns, score.score_z, range);
}

}  // namespace styletiming
