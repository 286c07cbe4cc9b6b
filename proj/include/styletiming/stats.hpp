#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace styletiming {

/// Missing observations are represented as quiet NaN throughout the engine.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) { return std::isnan(x); }

inline constexpr int kTradingDaysPerYear = 252;

inline double mean(std::span<const double> x) {
    if (x.empty()) return kMissing;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Sample standard deviation (n-1 denominator); missing for fewer than two points.
inline double sample_stddev(std::span<const double> x) {
    if (x.size() < 2) return kMissing;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

}  // namespace styletiming
