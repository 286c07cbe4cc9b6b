#include "styletiming/benchmarks.hpp"

#include <cmath>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

std::vector<double> static_mix(double weight_g, std::span<const double> g, std::span<const double> d) {
    if (!(weight_g >= 0.0 && weight_g <= 1.0)) {
        throw ValidationError("static mix weight must lie in [0, 1]");
    }
    if (g.size() != d.size()) throw ValidationError("static_mix: G and D lengths differ");
    std::vector<double> out(g.size());
    for (std::size_t t = 0; t < g.size(); ++t) out[t] = weight_g * g[t] + (1.0 - weight_g) * d[t];
    return out;
}

ReturnSeries static_mix(double weight_g, const ReturnSeries& g, const ReturnSeries& d) {
    if (g.dates != d.dates) throw ValidationError("static_mix: G and D calendars differ");
    ReturnSeries out;
    out.symbol = "static";
    out.dates = g.dates;
    out.values = static_mix(weight_g, g.values, d.values);
    return out;
}

Metrics static_mix_metrics(double weight_g, std::span<const double> g, std::span<const double> d) {
    const auto mix = static_mix(weight_g, g, d);
    Metrics m = compute_metrics(mix);
    m.avg_g = weight_g;
    return m;
}

VolMatch vol_match_weight(std::span<const double> base, double target_vol) {
    const double sd = sample_stddev(base);
    if (!(sd > 0.0)) throw ValidationError("vol_match_weight: base series has zero volatility");
    VolMatch out;
    out.weight = target_vol / (sd * std::sqrt(static_cast<double>(kTradingDaysPerYear)));
    out.levered = out.weight > 1.0;
    return out;
}

std::vector<double> scale_series(std::span<const double> base, double weight) {
    std::vector<double> out(base.size());
    for (std::size_t t = 0; t < base.size(); ++t) out[t] = weight * base[t];
    return out;
}

StaticMatch matched_static_search(MatchCriterion criterion, double target,
                                  std::span<const double> g, std::span<const double> d,
                                  double grid_step) {
    const double steps_f = 1.0 / grid_step;
    const auto steps = static_cast<long>(std::llround(steps_f));
    if (!(grid_step > 0.0) || std::abs(steps_f - static_cast<double>(steps)) > 1e-9) {
        throw ValidationError("grid_step must divide [0, 1]");
    }
    StaticMatch best;
    double best_key = 0.0;
    bool have = false;
    for (long i = 0; i <= steps; ++i) {
        const double w = static_cast<double>(i) / static_cast<double>(steps);
        const Metrics m = static_mix_metrics(w, g, d);
        double key = 0.0;
        switch (criterion) {
            case MatchCriterion::vol: key = -std::abs(m.vol - target); break;
            case MatchCriterion::maxdd: key = -std::abs(m.max_dd - target); break;
            case MatchCriterion::sharpe: key = is_missing(m.sharpe) ? -INFINITY : m.sharpe; break;
        }
        // Strict improvement only: ties keep the lower weight.
        if (!have || key > best_key) {
            best = {w, m};
            best_key = key;
            have = true;
        }
    }
    return best;
}

PolicyConfig matched_policy(MatchedPolicyKind kind, const PolicyConfig& base) {
    base.validate();
    PolicyConfig out = base;
    out.kind = kind == MatchedPolicyKind::tnx_only ? ScoreKind::tnx_only : ScoreKind::core_only;
    out.score.lambda_s = 0.0;
    out.score.lambda_c = 0.0;
    out.score.lambda_credit = 0.0;
    out.score.lambda_rxcs = 0.0;
    return out;
}

PairStats pair_stats(std::span<const double> a, std::span<const double> b, bool compounded) {
    if (a.size() != b.size() || a.empty()) {
        throw ValidationError("pair_stats: series must be nonempty and aligned");
    }
    std::vector<double> diff(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) diff[t] = a[t] - b[t];
    const double annual = static_cast<double>(kTradingDaysPerYear);
    const double mu = mean(diff);
    PairStats out;
    out.annual_excess = compounded ? std::pow(1.0 + mu, annual) - 1.0 : mu * annual;
    const double sd = sample_stddev(diff);
    out.tracking_error = is_missing(sd) ? 0.0 : sd * std::sqrt(annual);
    out.info_ratio = out.tracking_error > 0.0 ? out.annual_excess / out.tracking_error : kMissing;
    out.maxdd_diff = max_drawdown(a) - max_drawdown(b);
    return out;
}

}  // namespace styletiming
