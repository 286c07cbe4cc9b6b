#include "styletiming/baskets.hpp"

#include <algorithm>

#include "styletiming/errors.hpp"

namespace styletiming {

BasketDef default_growth_basket() { return {"G", {"QQQ", "XLK", "VGT", "SPYG", "VUG"}}; }

BasketDef default_defensive_basket() { return {"D", {"SCHD", "VYM", "VTV", "FDVV", "COWZ"}}; }

ReturnSeries basket_returns(const std::string& name, std::span<const ReturnSeries> members) {
    if (members.empty()) {
        throw ValidationError("basket '" + name + "' has no members");
    }
    Date start = members.front().dates.empty() ? Date{} : members.front().dates.front();
    for (const auto& m : members) {
        if (m.empty()) {
            throw ValidationError("basket '" + name + "' member '" + m.symbol + "' has no returns");
        }
        start = std::max(start, m.dates.front());
    }
    std::vector<const DatedSeries*> ptrs;
    for (const auto& m : members) ptrs.push_back(&m);
    Calendar all = union_calendar(ptrs);
    all.erase(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(lower_index(all, start)));

    ReturnSeries out;
    out.symbol = name;
    out.dates = all;
    out.values.assign(all.size(), 0.0);
    // Summation in symbol order keeps the result bitwise independent of member order.
    std::vector<const ReturnSeries*> ordered;
    for (const auto& m : members) ordered.push_back(&m);
    std::sort(ordered.begin(), ordered.end(),
              [](const ReturnSeries* a, const ReturnSeries* b) { return a->symbol < b->symbol; });
    for (const auto* mp : ordered) {
        const auto& m = *mp;
        std::size_t j = lower_index(m.dates, start);
        for (std::size_t k = 0; k < all.size(); ++k, ++j) {
            if (j >= m.size() || m.dates[j] != all[k]) {
                throw ValidationError("basket '" + name + "' member '" + m.symbol +
                                      "' has no return on " + format_date(all[k]));
            }
            out.values[k] += m.values[j];
        }
    }
    const double n = static_cast<double>(members.size());
    for (auto& v : out.values) v /= n;
    return out;
}

RelativeSeries relative(const ReturnSeries& growth, const ReturnSeries& defensive) {
    if (growth.dates != defensive.dates) {
        throw ValidationError("relative: '" + growth.symbol + "' and '" + defensive.symbol +
                              "' are on different calendars");
    }
    RelativeSeries out;
    out.dates = growth.dates;
    out.values.resize(growth.size());
    for (std::size_t i = 0; i < growth.size(); ++i) {
        out.values[i] = growth.values[i] - defensive.values[i];
    }
    return out;
}

}  // namespace styletiming
