#pragma once

#include "styletiming/dataset.hpp"
#include "styletiming/experiments.hpp"
#include "styletiming/synthetic.hpp"

namespace stltest {

inline styletiming::StudyData synthetic_study(std::uint64_t seed, std::size_t n_days = 3000,
                                              double planted = 0.0005) {
    styletiming::SynthParams p;
    p.seed = seed;
    p.n_days = n_days;
    p.planted_rate_effect = planted;
    return styletiming::prepare_study(styletiming::synth_data(p));
}

inline styletiming::DateWindow main_window() {
    return {styletiming::parse_date("2017-06-28"), styletiming::parse_date("2026-05-15")};
}

}  // namespace stltest
