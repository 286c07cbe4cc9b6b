#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "styletiming/attribution.hpp"
#include "styletiming/baskets.hpp"
#include "styletiming/errors.hpp"

using namespace stltest;

TEST(Basket, EqualMembers) {
    const auto cal = weekdays(d("2020-01-06"), 4);
    std::vector<ReturnSeries> m{returns_on("A", cal, {0.01, 0.01, 0.01, 0.01}),
                                returns_on("B", cal, {0.01, 0.01, 0.01, 0.01})};
    const auto b = basket_returns("G", m);
    for (double v : b.values) EXPECT_DOUBLE_EQ(v, 0.01);
}

TEST(Basket, TwoMemberMean) {
    const auto cal = weekdays(d("2020-01-06"), 1);
    std::vector<ReturnSeries> m{returns_on("A", cal, {0.02}), returns_on("B", cal, {0.0})};
    EXPECT_DOUBLE_EQ(basket_returns("T", m).values.at(0), 0.01);
}

TEST(Basket, StartsAtLatestListing) {
    const auto cal = weekdays(d("2016-12-19"), 6);
    std::vector<ReturnSeries> m{
        returns_on("QQQ", cal, {0.0, 0.0, 0.01, 0.01, 0.01, 0.01}),
        returns_on("COWZ", Calendar(cal.begin() + 2, cal.end()), {0.03, 0.03, 0.03, 0.03})};
    const auto b = basket_returns("D", m);
    EXPECT_EQ(b.dates.front(), d("2016-12-21"));
    EXPECT_DOUBLE_EQ(b.values.front(), 0.02);
}

TEST(Basket, MissingMemberDayRejected) {
    const auto cal = weekdays(d("2020-01-06"), 4);
    std::vector<ReturnSeries> m{returns_on("A", cal, {0.0, 0.0, 0.0, 0.0}),
                                returns_on("B", {cal[0], cal[1], cal[3]}, {0.0, 0.0, 0.0})};
    EXPECT_THROW(basket_returns("G", m), ValidationError);
}

TEST(Relative, Arithmetic) {
    const auto cal = weekdays(d("2020-01-06"), 2);
    const auto g = returns_on("G", cal, {0.02, 0.01});
    const auto dd = returns_on("D", cal, {0.005, 0.01});
    const auto r = relative(g, dd);
    EXPECT_DOUBLE_EQ(r.values[0], 0.015);
    EXPECT_EQ(r.values[1], 0.0);
    EXPECT_THROW(relative(g, returns_on("D", weekdays(d("2021-01-04"), 2), {0, 0})), ValidationError);
}

namespace {

// Gaussian elimination with partial pivoting on the normal equations.
std::vector<double> normal_equations(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    const std::size_t k = x[0].size();
    std::vector<std::vector<double>> a(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t r = 0; r < x.size(); ++r) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) a[i][j] += x[r][i] * x[r][j];
            a[i][k] += x[r][i] * y[r];
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < k; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
        }
    }
    std::vector<double> b(k);
    for (std::size_t i = 0; i < k; ++i) b[i] = a[i][k] / a[i][i];
    return b;
}

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::vector<double>> rows;
    std::vector<double> yv;
};

Problem make_problem(std::uint64_t seed, std::size_t n, std::size_t k) {
    Problem p;
    const auto z = normals(n * k + n, seed);
    p.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    p.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> row(k);
        double yy = z[n * k + r] * 0.5;
        for (std::size_t c = 0; c < k; ++c) {
            row[c] = c == 0 ? 1.0 : z[r * k + c];
            yy += row[c] * (0.3 * static_cast<double>(c) - 0.4);
            p.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        p.rows.push_back(row);
        p.yv.push_back(yy);
        p.y(static_cast<Eigen::Index>(r)) = yy;
    }
    return p;
}

}  // namespace

TEST(Ols, ExactFit) {
    const auto cal = weekdays(d("2020-01-06"), 40);
    RegressionSpec spec;
    spec.dates = cal;
    std::vector<double> x = normals(40, 1);
    for (double v : x) spec.dependent.push_back(2.0 * v);
    spec.regressors.push_back({"X", x});
    const auto r = ols_hac(spec);
    EXPECT_NEAR(r.beta("X"), 2.0, 1e-12);
    EXPECT_NEAR(r.alpha_daily, 0.0, 1e-12);
    EXPECT_NEAR(r.r2, 1.0, 1e-12);
}

TEST(Ols, MatchesNormalEquationsOracle) {
    const auto p = make_problem(11, 50, 4);
    const auto fit = fit_ols_hac(p.x, p.y, 3);
    const auto oracle = normal_equations(p.rows, p.yv);
    for (std::size_t i = 0; i < oracle.size(); ++i)
        EXPECT_NEAR(fit.coef(static_cast<Eigen::Index>(i)), oracle[i], 1e-10);
}

TEST(Ols, ZeroLagsIsWhite) {
    const auto p = make_problem(12, 80, 3);
    const auto fit = fit_ols_hac(p.x, p.y, 0);
    const Eigen::MatrixXd bread = (p.x.transpose() * p.x).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(3, 3);
    for (Eigen::Index r = 0; r < p.x.rows(); ++r) {
        const double e = fit.residuals(r);
        meat += e * e * p.x.row(r).transpose() * p.x.row(r);
    }
    const Eigen::MatrixXd white = bread * meat * bread;
    for (Eigen::Index i = 0; i < 3; ++i)
        EXPECT_NEAR(std::sqrt(fit.cov(i, i)), std::sqrt(white(i, i)), 1e-10);
}

TEST(Ols, RankDeficientThrows) {
    Eigen::MatrixXd x(5, 2);
    x << 1, 2, 1, 2, 1, 2, 1, 2, 1, 2;
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 5;
    EXPECT_THROW(fit_ols_hac(x, y, 1), SingularMatrixError);
}

TEST(Ols, DefaultLagRule) {
    EXPECT_EQ(default_hac_lags(100), 4);
    EXPECT_EQ(default_hac_lags(2330), static_cast<int>(std::floor(4.0 * std::pow(23.30, 2.0 / 9.0))));
}

TEST(ExcessDependent, Cases) {
    const std::vector<double> a{0.0010, -0.02};
    const std::vector<double> rf{0.0002, 0.0002};
    EXPECT_EQ(excess_dependent(a, rf, true), a);
    EXPECT_EQ(excess_dependent(a, std::vector<double>{0.0, 0.0}, false), a);
    EXPECT_NEAR(excess_dependent(a, rf, false)[0], 0.0008, 1e-15);
}

TEST(AnnualizeAlpha, Values) {
    EXPECT_EQ(annualize_alpha(0.0), 0.0);
    EXPECT_NEAR(annualize_alpha(0.0001), 0.025518911987694626, 1e-14);
    EXPECT_LT(annualize_alpha(-0.0001), 0.0);
}

namespace {

RegressionSpec regime_spec(std::size_t n, double beta_first, double beta_second, double noise) {
    RegressionSpec spec;
    spec.dates = weekdays(d("2019-01-01"), n);
    const auto x = normals(n, 5, 0.01);
    const auto e = normals(n, 6, noise);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = i < n / 2 ? beta_first : beta_second;
        spec.dependent.push_back(0.0001 + b * x[i] + e[i]);
    }
    spec.regressors.push_back({"MKT", x});
    return spec;
}

}  // namespace

TEST(Rolling, ConstantBetaEveryWindow) {
    const auto spec = regime_spec(300, 1.3, 1.3, 0.0);
    for (const auto& w : rolling_attribution(spec, 60)) EXPECT_NEAR(w.result.beta("MKT"), 1.3, 1e-8);
}

TEST(Rolling, WindowEqualsSliceRefit) {
    const auto spec = regime_spec(200, 1.0, 1.5, 0.002);
    const auto rolled = rolling_attribution(spec, 50);
    ASSERT_EQ(rolled.size(), 151u);
    for (std::size_t t : {0u, 37u, 150u}) {
        const auto direct = ols_hac(slice_spec(spec, t, t + 50));
        EXPECT_EQ(rolled[t].date, spec.dates[t + 49]);
        EXPECT_NEAR(rolled[t].result.beta("MKT"), direct.beta("MKT"), 1e-14);
        EXPECT_NEAR(rolled[t].result.alpha_t_nw, direct.alpha_t_nw, 1e-12);
    }
}

TEST(Periods, SinglePeriodEqualsFullFit) {
    const auto spec = regime_spec(200, 1.0, 1.0, 0.002);
    const std::vector<NamedPeriod> one{{"All", spec.dates.front(), spec.dates.back()}};
    const auto res = period_attribution(spec, one);
    ASSERT_EQ(res.size(), 1u);
    EXPECT_NEAR(res[0].result.beta("MKT"), ols_hac(spec).beta("MKT"), 1e-14);
}

TEST(Periods, RegimesRecovered) {
    const auto spec = regime_spec(400, 1.0, 2.0, 0.0005);
    const std::vector<NamedPeriod> two{{"First", spec.dates[0], spec.dates[199]},
                                       {"Second", spec.dates[200], spec.dates[399]}};
    const auto res = period_attribution(spec, two);
    EXPECT_NEAR(res[0].result.beta("MKT"), 1.0, 0.05);
    EXPECT_NEAR(res[1].result.beta("MKT"), 2.0, 0.05);
}
