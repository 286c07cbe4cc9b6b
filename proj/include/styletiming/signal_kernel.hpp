#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "styletiming/date.hpp"

namespace styletiming {

/// Window lengths and standardization settings for the state variables.
struct SignalSettings {
    std::size_t z_min_obs = 60;       // expanding z-score warmup, every z in the pipeline
    std::size_t change_horizon = 21;  // dTNX, dVIX, dBAA10Y
    std::size_t vix_window = 756;
    std::size_t vix_min_obs = 252;    // expanding percentile until the full window exists
    std::size_t gd_window = 126;
    double softplus_tau = 1.0;
};

/// Causal expanding z-score over the non-missing observations up to and including t, with the
/// sample (n-1) standard deviation. Missing before `min_obs` observations, on missing inputs,
/// and where the running variance is zero.
std::vector<double> expanding_z(std::span<const double> x, std::size_t min_obs);

/// Raw state series on one calendar; kMissing marks absent values. `baa10y` may be empty.
struct RawStateInputs {
    Calendar dates;
    std::vector<double> tnx;
    std::vector<double> vix;
    std::vector<double> spy;
    std::vector<double> gd;
    std::vector<double> baa10y;
};

struct DerivedInputs {
    std::vector<double> tnx_change;      // TNX_t - TNX_{t-21}
    std::vector<double> vix_change;      // VIX_t - VIX_{t-21}
    std::vector<double> vix_percentile;  // inclusive rank in trailing 756 obs, in [0, 1]
    std::vector<double> spy_drawdown;    // SPY_t / running peak - 1, <= 0
    std::vector<double> gd_trailing;     // compounded trailing 126-day G-D return
    std::vector<double> baa_change;      // empty without BAA10Y
    std::vector<double> baa_level;
};

DerivedInputs derive_inputs(const RawStateInputs& raw, const SignalSettings& settings = {});

/// Direction-normalized signals: larger r = more rate relief, larger d = deeper drawdown,
/// larger vh = higher VIX, larger vr = stronger VIX relief, larger g126 = growth extension.
struct DirectionalSignals {
    std::vector<double> r;
    std::vector<double> d;
    std::vector<double> vh;
    std::vector<double> vr;
    std::vector<double> g126;
};

DirectionalSignals directional_z(const DerivedInputs& derived, std::size_t min_obs);

/// tau * log(1 + exp(x / tau)), evaluated without overflow.
double softplus(double x, double tau = 1.0);

struct SmoothComponents {
    std::vector<double> high_vix;
    std::vector<double> vix_relief;
    std::vector<double> low_vix;
    std::vector<double> growth_ext;
    std::vector<double> rate_quiet;
};

SmoothComponents smooth_components(const DirectionalSignals& signals, double tau = 1.0);

struct Interactions {
    std::vector<double> i1;  // r * vh
    std::vector<double> i2;  // HighVIX * VIXRelief
    std::vector<double> i3;  // GrowthExt * LowVIX
    std::vector<double> i4;  // GrowthExt * LowVIX * RateQuiet
};

Interactions interactions(const SmoothComponents& components, std::span<const double> r,
                          std::span<const double> vh);

struct CreditSignals {
    std::vector<double> ce;     // -z(dBAA10Y_21)
    std::vector<double> cs;     // z(BAA10Y)
    std::vector<double> rcs_z;  // z(r * cs)
};

/// `baa_level` is aligned with `r`; days without BAA10Y are missing in all three outputs.
CreditSignals credit_signals(std::span<const double> baa_level, std::span<const double> r,
                             const SignalSettings& settings = {});

struct ScoreParams {
    double alpha = 0.50;
    double lambda_s = 0.50;
    double lambda_c = 0.05;
    double lambda_credit = 0.0;
    double lambda_rxcs = 0.0;
    double tau_softplus = 1.0;

    void validate() const;
};

/// Which raw composite feeds the final standardization.
enum class ScoreKind {
    smooth,              // core + ls*stress - lc*crowded (+ credit overlay when its lambdas are set)
    tnx_only,            // r
    core_only,           // a*r + (1-a)*d
    credit_replacement,  // a*d + (1-a)*ce - lc*g126 + lrxcs*z(r*cs)
    credit_core,         // a*d + (1-a)*ce
};

std::string to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

/// Everything the score needs, computed in one causal pass over the state calendar.
struct SignalFrame {
    Calendar dates;
    SignalSettings settings;
    DerivedInputs derived;
    DirectionalSignals directional;
    SmoothComponents components;
    Interactions inter;
    Interactions inter_z;  // expanding z of i1..i4
    CreditSignals credit;  // empty without BAA10Y

    bool has_credit() const { return !credit.ce.empty(); }
    std::size_t size() const { return dates.size(); }
    /// First index at which every raw derived input (not yet z-scored) is available.
    std::size_t first_complete_input() const;
    /// Named columns for the audit dump.
    std::vector<std::pair<std::string, const std::vector<double>*>> columns() const;
};

/// Builds the frame from already-derived inputs (lets tests inject directional signals).
SignalFrame assemble_frame(Calendar dates, DerivedInputs derived, DirectionalSignals directional,
                           const SignalSettings& settings);
SignalFrame build_signal_frame(const RawStateInputs& raw, const SignalSettings& settings = {});

struct ScoreSeries {
    std::vector<double> core;
    std::vector<double> stress;
    std::vector<double> crowded;
    std::vector<double> raw;
    std::vector<double> score_z;
};

/// Core/stress/crowded composite and its expanding standardization. A term whose weight is
/// exactly zero is left out, so its missing values cannot blank the score.
ScoreSeries policy_score(const SignalFrame& frame, const ScoreParams& params);

struct StandardizedScore {
    std::vector<double> raw;
    std::vector<double> score_z;
};

/// Base raw score + lambda_credit * ce + lambda_rxcs * z(r*cs), re-standardized.
StandardizedScore incremental_score(std::span<const double> base_raw, std::span<const double> ce,
                                    std::span<const double> rcs_z, const ScoreParams& params,
                                    std::size_t min_obs);

/// Score for any ScoreKind. Credit kinds (and credit lambdas) require BAA10Y in the frame.
ScoreSeries compose_score(const SignalFrame& frame, ScoreKind kind, const ScoreParams& params);

}  // namespace styletiming
