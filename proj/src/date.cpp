#include "styletiming/date.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "styletiming/errors.hpp"

namespace styletiming {

namespace {

int parse_digits(std::string_view text, std::string_view whole) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError("invalid date '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Date parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ValidationError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    const int y = parse_digits(text.substr(0, 4), text);
    const int m = parse_digits(text.substr(5, 2), text);
    const int d = parse_digits(text.substr(8, 2), text);
    const Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                    std::chrono::day{static_cast<unsigned>(d)}};
    if (!date.ok()) {
        throw ValidationError("invalid date '" + std::string(text) + "'");
    }
    return date;
}

std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::size_t lower_index(const Calendar& calendar, Date date) {
    return static_cast<std::size_t>(std::lower_bound(calendar.begin(), calendar.end(), date) -
                                    calendar.begin());
}

std::size_t upper_index(const Calendar& calendar, Date date) {
    return static_cast<std::size_t>(std::upper_bound(calendar.begin(), calendar.end(), date) -
                                    calendar.begin());
}

}  // namespace styletiming
