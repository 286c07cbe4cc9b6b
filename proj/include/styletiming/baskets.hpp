#pragma once

#include <span>
#include <string>
#include <vector>

#include "styletiming/market_data.hpp"

namespace styletiming {

struct BasketDef {
    std::string name;
    std::vector<std::string> members;
};

/// QQQ, XLK, VGT, SPYG, VUG.
BasketDef default_growth_basket();
/// SCHD, VYM, VTV, FDVV, COWZ.
BasketDef default_defensive_basket();

/// Daily-rebalanced equal-weight basket: the mean of member returns each day. The basket
/// starts at the latest member first-return date; every member must have a return on every
/// basket date (the union of member dates from that start).
ReturnSeries basket_returns(const std::string& name, std::span<const ReturnSeries> members);

/// R^G - R^D on identical calendars.
struct RelativeSeries {
    Calendar dates;
    std::vector<double> values;

    std::size_t size() const { return dates.size(); }
};

RelativeSeries relative(const ReturnSeries& growth, const ReturnSeries& defensive);

}  // namespace styletiming
