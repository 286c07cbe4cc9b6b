#include "styletiming/signal_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

std::vector<double> expanding_z(std::span<const double> x, std::size_t min_obs) {
    if (min_obs < 2) {
        throw ValidationError("expanding_z: min_obs must be at least 2");
    }
    std::vector<double> out(x.size(), kMissing);
    std::size_t count = 0;
    double running_mean = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double v = x[t];
        if (is_missing(v)) continue;
        ++count;
        const double delta = v - running_mean;
        running_mean += delta / static_cast<double>(count);
        m2 += delta * (v - running_mean);
        if (count < min_obs) continue;
        const double sd = std::sqrt(std::max(0.0, m2) / static_cast<double>(count - 1));
        if (!(sd > 1e-12 * std::max(1.0, std::abs(running_mean)))) continue;
        out[t] = (v - running_mean) / sd;
    }
    return out;
}

namespace {

std::vector<double> lagged_change(const std::vector<double>& x, std::size_t horizon) {
    std::vector<double> out(x.size(), kMissing);
    for (std::size_t t = horizon; t < x.size(); ++t) out[t] = x[t] - x[t - horizon];
    return out;
}

std::vector<double> negate(std::vector<double> x) {
    for (auto& v : x) v = -v;
    return x;
}

struct Term {
    double weight;
    std::span<const double> values;
};

// Weighted sum over terms with nonzero weight; missing if any included term is missing.
std::vector<double> combine(std::size_t n, std::initializer_list<Term> terms) {
    std::vector<double> out(n, 0.0);
    for (const auto& term : terms) {
        if (term.weight == 0.0) continue;
        if (term.values.size() != n) {
            throw ValidationError("score term length mismatch");
        }
        for (std::size_t t = 0; t < n; ++t) out[t] += term.weight * term.values[t];
    }
    return out;
}

void require_credit(const SignalFrame& frame) {
    if (!frame.has_credit()) {
        throw DataCoverageError("credit signals require the BAA10Y series");
    }
}

}  // namespace

DerivedInputs derive_inputs(const RawStateInputs& raw, const SignalSettings& settings) {
    const std::size_t n = raw.dates.size();
    if (raw.tnx.size() != n || raw.vix.size() != n || raw.spy.size() != n || raw.gd.size() != n ||
        (!raw.baa10y.empty() && raw.baa10y.size() != n)) {
        throw ValidationError("derive_inputs: state series are not on one calendar");
    }
    DerivedInputs out;
    out.tnx_change = lagged_change(raw.tnx, settings.change_horizon);
    out.vix_change = lagged_change(raw.vix, settings.change_horizon);

    out.vix_percentile.assign(n, kMissing);
    for (std::size_t t = 0; t < n; ++t) {
        const double current = raw.vix[t];
        if (is_missing(current)) continue;
        const std::size_t lo = t + 1 >= settings.vix_window ? t + 1 - settings.vix_window : 0;
        std::size_t valid = 0;
        std::size_t below = 0;
        for (std::size_t s = lo; s <= t; ++s) {
            if (is_missing(raw.vix[s])) continue;
            ++valid;
            if (raw.vix[s] <= current) ++below;
        }
        if (valid >= settings.vix_min_obs) {
            out.vix_percentile[t] = static_cast<double>(below) / static_cast<double>(valid);
        }
    }

    out.spy_drawdown.assign(n, kMissing);
    double peak = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (is_missing(raw.spy[t])) continue;
        peak = std::max(peak, raw.spy[t]);
        out.spy_drawdown[t] = raw.spy[t] / peak - 1.0;
    }

    out.gd_trailing.assign(n, kMissing);
    const std::size_t w = settings.gd_window;
    for (std::size_t t = w; t <= n && w > 0; ++t) {
        double growth = 1.0;
        for (std::size_t s = t - w; s < t; ++s) growth *= 1.0 + raw.gd[s];
        out.gd_trailing[t - 1] = growth - 1.0;  // NaN propagates through missing days
    }

    if (!raw.baa10y.empty()) {
        out.baa_change = lagged_change(raw.baa10y, settings.change_horizon);
        out.baa_level = raw.baa10y;
    }
    return out;
}

DirectionalSignals directional_z(const DerivedInputs& derived, std::size_t min_obs) {
    DirectionalSignals out;
    out.r = negate(expanding_z(derived.tnx_change, min_obs));
    out.d = negate(expanding_z(derived.spy_drawdown, min_obs));
    out.vh = expanding_z(derived.vix_percentile, min_obs);
    out.vr = negate(expanding_z(derived.vix_change, min_obs));
    out.g126 = expanding_z(derived.gd_trailing, min_obs);
    return out;
}

double softplus(double x, double tau) {
    if (!(tau > 0.0)) {
        throw ValidationError("softplus: tau must be positive");
    }
    const double u = x / tau;
    if (u > 0.0) return x + tau * std::log1p(std::exp(-u));
    return tau * std::log1p(std::exp(u));
}

SmoothComponents smooth_components(const DirectionalSignals& s, double tau) {
    const std::size_t n = s.r.size();
    SmoothComponents c;
    c.high_vix.resize(n);
    c.vix_relief.resize(n);
    c.low_vix.resize(n);
    c.growth_ext.resize(n);
    c.rate_quiet.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        c.high_vix[t] = softplus(s.vh[t], tau);
        c.vix_relief[t] = softplus(s.vr[t], tau);
        c.low_vix[t] = softplus(-s.vh[t], tau);
        c.growth_ext[t] = softplus(s.g126[t], tau);
        c.rate_quiet[t] = std::exp(-0.5 * s.r[t] * s.r[t]);
    }
    return c;
}

Interactions interactions(const SmoothComponents& c, std::span<const double> r,
                          std::span<const double> vh) {
    const std::size_t n = r.size();
    Interactions out;
    out.i1.resize(n);
    out.i2.resize(n);
    out.i3.resize(n);
    out.i4.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        out.i1[t] = r[t] * vh[t];
        out.i2[t] = c.high_vix[t] * c.vix_relief[t];
        out.i3[t] = c.growth_ext[t] * c.low_vix[t];
        out.i4[t] = c.growth_ext[t] * c.low_vix[t] * c.rate_quiet[t];
    }
    return out;
}

CreditSignals credit_signals(std::span<const double> baa_level, std::span<const double> r,
                             const SignalSettings& settings) {
    if (baa_level.size() != r.size()) {
        throw ValidationError("credit_signals: BAA10Y and r are not aligned");
    }
    const std::vector<double> level(baa_level.begin(), baa_level.end());
    CreditSignals out;
    out.ce = negate(expanding_z(lagged_change(level, settings.change_horizon), settings.z_min_obs));
    out.cs = expanding_z(level, settings.z_min_obs);
    std::vector<double> product(r.size());
    for (std::size_t t = 0; t < r.size(); ++t) product[t] = r[t] * out.cs[t];
    out.rcs_z = expanding_z(product, settings.z_min_obs);
    return out;
}

void ScoreParams::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("score alpha must lie in [0, 1]");
    if (!(lambda_s >= 0.0) || !(lambda_c >= 0.0) || !(lambda_credit >= 0.0) || !(lambda_rxcs >= 0.0)) {
        throw ValidationError("score lambdas must be nonnegative");
    }
    if (!(tau_softplus > 0.0)) throw ValidationError("softplus tau must be positive");
}

std::string to_string(ScoreKind kind) {
    switch (kind) {
        case ScoreKind::smooth: return "smooth";
        case ScoreKind::tnx_only: return "tnx_only";
        case ScoreKind::core_only: return "core_only";
        case ScoreKind::credit_replacement: return "credit_replacement";
        case ScoreKind::credit_core: return "credit_core";
    }
    return "unknown";
}

ScoreKind score_kind_from_string(const std::string& name) {
    for (auto k : {ScoreKind::smooth, ScoreKind::tnx_only, ScoreKind::core_only,
                   ScoreKind::credit_replacement, ScoreKind::credit_core}) {
        if (to_string(k) == name) return k;
    }
    throw UsageError("unknown score kind '" + name + "'");
}

std::size_t SignalFrame::first_complete_input() const {
    for (std::size_t t = 0; t < size(); ++t) {
        if (!is_missing(derived.tnx_change[t]) && !is_missing(derived.vix_change[t]) &&
            !is_missing(derived.vix_percentile[t]) && !is_missing(derived.spy_drawdown[t]) &&
            !is_missing(derived.gd_trailing[t])) {
            return t;
        }
    }
    return size();
}

std::vector<std::pair<std::string, const std::vector<double>*>> SignalFrame::columns() const {
    std::vector<std::pair<std::string, const std::vector<double>*>> cols{
        {"tnx_change21", &derived.tnx_change},
        {"vix_change21", &derived.vix_change},
        {"vix_percentile756", &derived.vix_percentile},
        {"spy_drawdown", &derived.spy_drawdown},
        {"gd_trailing126", &derived.gd_trailing},
        {"r", &directional.r},
        {"d", &directional.d},
        {"vh", &directional.vh},
        {"vr", &directional.vr},
        {"g126", &directional.g126},
        {"HighVIX", &components.high_vix},
        {"VIXRelief", &components.vix_relief},
        {"LowVIX", &components.low_vix},
        {"GrowthExt", &components.growth_ext},
        {"RateQuiet", &components.rate_quiet},
        {"i1", &inter.i1},
        {"i2", &inter.i2},
        {"i3", &inter.i3},
        {"i4", &inter.i4},
    };
    if (has_credit()) {
        cols.emplace_back("ce", &credit.ce);
        cols.emplace_back("cs", &credit.cs);
        cols.emplace_back("rcs_z", &credit.rcs_z);
    }
    return cols;
}

SignalFrame assemble_frame(Calendar dates, DerivedInputs derived, DirectionalSignals directional,
                           const SignalSettings& settings) {
    SignalFrame frame;
    frame.dates = std::move(dates);
    frame.settings = settings;
    frame.derived = std::move(derived);
    frame.directional = std::move(directional);
    frame.components = smooth_components(frame.directional, settings.softplus_tau);
    frame.inter = interactions(frame.components, frame.directional.r, frame.directional.vh);
    frame.inter_z.i1 = expanding_z(frame.inter.i1, settings.z_min_obs);
    frame.inter_z.i2 = expanding_z(frame.inter.i2, settings.z_min_obs);
    frame.inter_z.i3 = expanding_z(frame.inter.i3, settings.z_min_obs);
    frame.inter_z.i4 = expanding_z(frame.inter.i4, settings.z_min_obs);
    if (!frame.derived.baa_level.empty()) {
        frame.credit = credit_signals(frame.derived.baa_level, frame.directional.r, settings);
    }
    return frame;
}

SignalFrame build_signal_frame(const RawStateInputs& raw, const SignalSettings& settings) {
    DerivedInputs derived = derive_inputs(raw, settings);
    DirectionalSignals directional = directional_z(derived, settings.z_min_obs);
    return assemble_frame(raw.dates, std::move(derived), std::move(directional), settings);
}

ScoreSeries policy_score(const SignalFrame& frame, const ScoreParams& params) {
    params.validate();
    const std::size_t n = frame.size();
    const auto& s = frame.directional;
    ScoreSeries out;
    out.core = combine(n, {{params.alpha, s.r}, {1.0 - params.alpha, s.d}});
    out.stress = combine(n, {{0.5, frame.inter_z.i1}, {0.5, frame.inter_z.i2}});
    out.crowded = combine(n, {{0.5, frame.inter_z.i3}, {0.5, frame.inter_z.i4}});
    out.raw = combine(n, {{1.0, out.core}, {params.lambda_s, out.stress}, {-params.lambda_c, out.crowded}});
    out.score_z = expanding_z(out.raw, frame.settings.z_min_obs);
    return out;
}

StandardizedScore incremental_score(std::span<const double> base_raw, std::span<const double> ce,
                                    std::span<const double> rcs_z, const ScoreParams& params,
                                    std::size_t min_obs) {
    StandardizedScore out;
    out.raw = combine(base_raw.size(), {{1.0, base_raw},
                                        {params.lambda_credit, ce},
                                        {params.lambda_rxcs, rcs_z}});
    out.score_z = expanding_z(out.raw, min_obs);
    return out;
}

ScoreSeries compose_score(const SignalFrame& frame, ScoreKind kind, const ScoreParams& params) {
    params.validate();
    const std::size_t n = frame.size();
    const std::size_t min_obs = frame.settings.z_min_obs;
    const auto& s = frame.directional;
    ScoreSeries out;
    switch (kind) {
        case ScoreKind::smooth: {
            out = policy_score(frame, params);
            if (params.lambda_credit != 0.0 || params.lambda_rxcs != 0.0) {
                require_credit(frame);
                auto overlay = incremental_score(out.raw, frame.credit.ce, frame.credit.rcs_z,
                                                 params, min_obs);
                out.raw = std::move(overlay.raw);
                out.score_z = std::move(overlay.score_z);
            }
            return out;
        }
        case ScoreKind::tnx_only:
            out.core = s.r;
            break;
        case ScoreKind::core_only:
            out.core = combine(n, {{params.alpha, s.r}, {1.0 - params.alpha, s.d}});
            break;
        case ScoreKind::credit_core:
            require_credit(frame);
            out.core = combine(n, {{params.alpha, s.d}, {1.0 - params.alpha, frame.credit.ce}});
            break;
        case ScoreKind::credit_replacement:
            require_credit(frame);
            out.core = combine(n, {{params.alpha, s.d}, {1.0 - params.alpha, frame.credit.ce}});
            out.raw = combine(n, {{1.0, out.core},
                                  {-params.lambda_c, s.g126},
                                  {params.lambda_rxcs, frame.credit.rcs_z}});
            out.score_z = expanding_z(out.raw, min_obs);
            return out;
    }
    out.raw = out.core;
    out.score_z = expanding_z(out.raw, min_obs);
    return out;
}

}  // namespace styletiming
