#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "styletiming/date.hpp"
#include "styletiming/market_data.hpp"

namespace stltest {

using namespace styletiming;

inline Date d(const char* text) { return parse_date(text); }

// n consecutive weekdays from `start` (inclusive if a weekday)
inline Calendar weekdays(Date start, std::size_t n) {
    Calendar out;
    long k = day_number(start);
    while (out.size() < n) {
        const Date x = from_day_number(k++);
        if (is_weekday(x)) out.push_back(x);
    }
    return out;
}

inline ReturnSeries returns_on(std::string symbol, const Calendar& dates, std::vector<double> v) {
    ReturnSeries r;
    r.symbol = std::move(symbol);
    r.dates = dates;
    r.values = std::move(v);
    return r;
}

inline std::vector<double> normals(std::size_t n, std::uint64_t seed, double sd = 1.0, double mu = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(mu, sd);
    std::vector<double> out(n);
    for (auto& x : out) x = nd(rng);
    return out;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("stl_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace stltest
