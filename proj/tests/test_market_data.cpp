#include <fstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

using namespace stltest;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST(Dates, ParseRoundTrip) {
    EXPECT_EQ(format_date(d("2016-12-21")), "2016-12-21");
    EXPECT_THROW(parse_date("2016-13-01"), ValidationError);
    EXPECT_THROW(parse_date("2016-02-30"), ValidationError);
    EXPECT_THROW(parse_date("20161221"), ValidationError);
}

TEST(PriceSeries, MinimalInput) {
    const auto s = make_price_series("X", {{d("2020-01-02"), 100.0}, {d("2020-01-03"), 101.0}});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.values[1], 101.0);
}

TEST(PriceSeries, OutOfOrderRowsSorted) {
    const auto sorted = make_price_series(
        "X", {{d("2020-01-02"), 100.0}, {d("2020-01-03"), 101.0}, {d("2020-01-06"), 99.0}});
    const auto shuffled = make_price_series(
        "X", {{d("2020-01-06"), 99.0}, {d("2020-01-02"), 100.0}, {d("2020-01-03"), 101.0}});
    EXPECT_EQ(sorted.dates, shuffled.dates);
    EXPECT_EQ(sorted.values, shuffled.values);
}

TEST(PriceSeries, DuplicateDateNamed) {
    try {
        make_price_series("X", {{d("2020-01-02"), 100.0}, {d("2020-01-02"), 101.0}});
        FAIL() << "no error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("2020-01-02"), std::string::npos);
    }
}

TEST(PriceSeries, NonPositiveRejected) {
    EXPECT_THROW(make_price_series("X", {{d("2020-01-02"), 0.0}}), ValidationError);
    EXPECT_THROW(make_price_series("X", {{d("2020-01-02"), -3.0}}), ValidationError);
}

TEST(Loader, ReadsFileAndReportsLine) {
    TempDir tmp("md");
    const auto good = tmp.path / "QQQ.csv";
    write_file(good, "date,value\n2020-01-03,101\n2020-01-02,100\n");
    const auto s = load_price_series(good);
    EXPECT_EQ(s.symbol, "QQQ");
    EXPECT_EQ(s.dates.front(), d("2020-01-02"));

    const auto bad = tmp.path / "BAD.csv";
    write_file(bad, "date,value\n2020-01-02,100\n2020-01-03,abc\n");
    try {
        load_price_series(bad);
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(load_price_series(tmp.path / "nope.csv"), DataCoverageError);
}

TEST(ForwardFill, GapOfTwoFilled) {
    const auto cal = weekdays(d("2020-01-06"), 6);
    PriceSeries s;
    s.symbol = "X";
    s.dates = {cal[0], cal[3], cal[4]};
    s.values = {10.0, 13.0, 14.0};
    const auto f = forward_fill_bounded(s, cal, 3);
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(f.values[1], 10.0);
    EXPECT_EQ(f.values[2], 10.0);
    EXPECT_EQ(f.values[3], 13.0);
}

TEST(ForwardFill, GapOfFourLeftMissing) {
    const auto cal = weekdays(d("2020-01-06"), 7);
    PriceSeries s;
    s.symbol = "X";
    s.dates = {cal[0], cal[5], cal[6]};
    s.values = {10.0, 13.0, 14.0};
    const auto f = forward_fill_bounded(s, cal, 3);
    EXPECT_EQ(f.dates, (Calendar{cal[0], cal[5], cal[6]}));
}

TEST(ForwardFill, PreListingUntouched) {
    const auto cal = weekdays(d("2020-01-06"), 6);
    PriceSeries s;
    s.symbol = "X";
    s.dates = {cal[3], cal[4], cal[5]};
    s.values = {1.0, 2.0, 3.0};
    const auto f = forward_fill_bounded(s, cal, 3);
    EXPECT_EQ(f.dates.front(), cal[3]);
    EXPECT_EQ(f.size(), 3u);
}

TEST(Returns, Arithmetic) {
    const auto cal = weekdays(d("2020-01-06"), 2);
    auto ret = [&](double a, double b) {
        PriceSeries p;
        p.symbol = "X";
        p.dates = cal;
        p.values = {a, b};
        return to_returns(p).values.at(0);
    };
    EXPECT_NEAR(ret(100, 101), 0.01, 1e-15);
    EXPECT_EQ(ret(100, 100), 0.0);
    EXPECT_EQ(ret(100, 50), -0.5);
}

TEST(Returns, CalendarGapProducesNoReturn) {
    const auto cal = weekdays(d("2020-01-06"), 5);
    PriceSeries p;
    p.symbol = "X";
    p.dates = {cal[0], cal[1], cal[3], cal[4]};
    p.values = {1.0, 1.1, 1.2, 1.3};
    const auto r = to_returns(p, cal);
    EXPECT_EQ(r.dates, (Calendar{cal[1], cal[4]}));
}

TEST(Returns, CumulateInverts) {
    const auto cal = weekdays(d("2020-01-06"), 30);
    PriceSeries p;
    p.symbol = "X";
    p.dates = cal;
    double level = 50.0;
    for (double x : normals(30, 3, 0.01)) p.values.push_back(level *= 1.0 + x);
    const auto r = to_returns(p);
    const auto back = cumulate(r, cal[0], p.values[0]);
    ASSERT_EQ(back.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(back.values[i], p.values[i], 1e-9);
}

TEST(Align, SelfIntersectionUnchanged) {
    const auto cal = weekdays(d("2020-01-06"), 10);
    DatedSeries a{"A", cal, std::vector<double>(10, 1.0)};
    DatedSeries b{"B", cal, std::vector<double>(10, 2.0)};
    const auto panel = align({a, b}, cal.front(), cal.back());
    EXPECT_EQ(panel.dates, cal);
    EXPECT_EQ(panel.column("B")[3], 2.0);
}

TEST(Align, DisjointCalendarsRejected) {
    const auto cal = weekdays(d("2020-01-06"), 10);
    DatedSeries a{"A", Calendar(cal.begin(), cal.begin() + 5), std::vector<double>(5, 1.0)};
    DatedSeries b{"B", Calendar(cal.begin() + 5, cal.end()), std::vector<double>(5, 1.0)};
    EXPECT_THROW(align({a, b}, cal.front(), cal.back()), ValidationError);
}

TEST(Align, CoverageAndOrderIndependence) {
    const auto cal = weekdays(d("2016-12-19"), 20);
    DatedSeries a{"QQQ", cal, std::vector<double>(20, 0.0)};
    DatedSeries b{"COWZ", Calendar(cal.begin() + 2, cal.end()), std::vector<double>(18, 0.0)};
    const auto p1 = align({a, b}, cal.front(), cal.back());
    const auto p2 = align({b, a}, cal.front(), cal.back());
    EXPECT_EQ(p1.names, p2.names);
    EXPECT_EQ(p1.dates, p2.dates);
    EXPECT_EQ(p1.dates.front(), d("2016-12-21"));
    bool found = false;
    for (const auto& row : p1.coverage) {
        if (row.symbol == "COWZ") {
            found = true;
            EXPECT_EQ(row.first_date, d("2016-12-21"));
            EXPECT_EQ(row.count, 18u);
        }
    }
    EXPECT_TRUE(found);
}

TEST(FactorFile, PercentScaleRejected) {
    TempDir tmp("ff");
    const auto p = tmp.path / "ff.csv";
    std::string text = "date,mkt_rf,smb,hml,rmw,cma,mom,rf\n";
    for (const auto& day : weekdays(d("2020-01-06"), 5)) text += format_date(day) + ",1.2,0.1,0.1,0.1,0.1,0.1,0.01\n";
    write_file(p, text);
    EXPECT_THROW(load_factor_file(p), ValidationError);
}
