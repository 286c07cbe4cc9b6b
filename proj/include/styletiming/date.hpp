#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

namespace styletiming {

using Date = std::chrono::year_month_day;
using Calendar = std::vector<Date>;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws ValidationError.
Date parse_date(std::string_view text);
std::string format_date(Date date);

/// Serial day number, handy for hashing and arithmetic.
inline long day_number(Date date) {
    return std::chrono::sys_days{date}.time_since_epoch().count();
}

inline Date from_day_number(long days) {
    return Date{std::chrono::sys_days{std::chrono::days{days}}};
}

inline bool is_weekday(Date date) {
    const std::chrono::weekday wd{std::chrono::sys_days{date}};
    return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
}

inline int year_of(Date date) { return static_cast<int>(date.year()); }

struct DateWindow {
    Date start;
    Date end;
};

/// Index of the first calendar date >= `date` (calendar.size() if none).
std::size_t lower_index(const Calendar& calendar, Date date);
/// Index one past the last calendar date <= `date`.
std::size_t upper_index(const Calendar& calendar, Date date);

}  // namespace styletiming
