#pragma once

#include <span>
#include <string>
#include <vector>

#include "styletiming/policy.hpp"

namespace styletiming {

/// wG * G + (1 - wG) * D every day; no costs, no turnover.
std::vector<double> static_mix(double weight_g, std::span<const double> g, std::span<const double> d);
ReturnSeries static_mix(double weight_g, const ReturnSeries& g, const ReturnSeries& d);

/// Metrics of a static mix, with avg G equal to the weight and zero turnover.
Metrics static_mix_metrics(double weight_g, std::span<const double> g, std::span<const double> d);

struct VolMatch {
    double weight = 1.0;
    bool levered = false;  // weight > 1: no borrowing cost is modeled
};

/// Scaling against zero-return cash so that vol(weight * base) equals target_vol.
VolMatch vol_match_weight(std::span<const double> base, double target_vol);
std::vector<double> scale_series(std::span<const double> base, double weight);

enum class MatchCriterion { vol, maxdd, sharpe };

struct StaticMatch {
    double weight_g = 0.0;
    Metrics metrics;
};

/// Exhaustive scan of wG over {0, step, ..., 1}. vol/maxdd pick the weight whose metric is closest
/// to `target` (ties go to the lower weight); sharpe picks the maximum.
StaticMatch matched_static_search(MatchCriterion criterion, double target,
                                  std::span<const double> g, std::span<const double> d,
                                  double grid_step = 0.01);

enum class MatchedPolicyKind { tnx_only, core_only };

/// Same MaxTilt, tau_w, eta and costs; score restricted to r (tnx_only) or a*r + (1-a)*d.
PolicyConfig matched_policy(MatchedPolicyKind kind, const PolicyConfig& base);

struct PairStats {
    double annual_excess = 0.0;
    double tracking_error = 0.0;
    double info_ratio = 0.0;  // NaN when tracking error is zero
    double maxdd_diff = 0.0;
};

/// Excess = 252 * mean(a - b) (or (1 + mean)^252 - 1 when `compounded`), TE = std(a - b) sqrt(252).
PairStats pair_stats(std::span<const double> a, std::span<const double> b, bool compounded = false);

}  // namespace styletiming
