#pragma once

#include <cstdint>

#include "styletiming/dataset.hpp"

namespace styletiming {

struct SynthParams {
    std::uint64_t seed = 7;
    std::size_t n_days = 3000;
    Date end_date = Date{std::chrono::year{2026}, std::chrono::month{5}, std::chrono::day{15}};
    /// Multiplies every shock and drift; 0 gives constant prices and levels.
    double vol_scale = 1.0;
    /// G-D gains this times yesterday's unit-variance rate-relief state (minus scaled 21-day TNX change).
    double planted_rate_effect = 0.0005;
    /// Per-day probability that a member bar is absent (never two in a row).
    double missing_bar_prob = 0.001;
    /// COWZ and FDVV list late, as in the real sample, when the calendar reaches back that far.
    bool staggered_listings = true;
    bool include_credit = true;
    bool include_factors = true;
};

/// Seeded weekday-calendar data set in the loader's shapes, with default baskets.
RawDataSet synth_data(const SynthParams& params);

}  // namespace styletiming
