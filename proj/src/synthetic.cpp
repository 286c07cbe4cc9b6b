#include "styletiming/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "styletiming/errors.hpp"

namespace styletiming {

namespace {

Date listing(int y, unsigned m, unsigned d) {
    return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

}  // namespace

RawDataSet synth_data(const SynthParams& p) {
    if (p.n_days < 1000) throw ValidationError("synthetic data needs at least 1000 days");
    if (p.vol_scale < 0.0) throw ValidationError("vol_scale must be nonnegative");
    if (p.missing_bar_prob < 0.0 || p.missing_bar_prob >= 1.0) {
        throw ValidationError("missing_bar_prob must lie in [0, 1)");
    }

    Calendar dates;
    for (long day = day_number(p.end_date); dates.size() < p.n_days; --day) {
        const Date d = from_day_number(day);
        if (is_weekday(d)) dates.push_back(d);
    }
    std::reverse(dates.begin(), dates.end());
    const std::size_t n = dates.size();

    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s = p.vol_scale;

    std::vector<double> tnx(n), vix(n), baa(n), mkt(n), smb(n), hml(n), rmw(n), cma(n), mom(n);
    const double rf = 0.00008;
    const double tnx_mean = 2.5, tnx_kappa = 0.005, tnx_sigma = 0.06 * s;
    const double vix_mean = std::log(18.0), vix_kappa = 0.02, vix_sigma = 0.07 * s;
    const double baa_mean = 2.0, baa_kappa = 0.01, baa_sigma = 0.03 * s;
    double lv = vix_mean;
    tnx[0] = tnx_mean;
    baa[0] = baa_mean;
    vix[0] = std::exp(lv);
    for (std::size_t t = 0; t < n; ++t) {
        const double em = z(rng);
        const double ev = z(rng);
        if (t > 0) {
            tnx[t] = tnx[t - 1] + tnx_kappa * (tnx_mean - tnx[t - 1]) + tnx_sigma * z(rng);
            lv += vix_kappa * (vix_mean - lv) + vix_sigma * (-0.7 * em + std::sqrt(1.0 - 0.49) * ev);
            vix[t] = std::exp(lv);
            baa[t] = baa[t - 1] + baa_kappa * (baa_mean - baa[t - 1]) +
                     baa_sigma * (-0.3 * em + std::sqrt(1.0 - 0.09) * z(rng));
        }
        const double prev_vix = t > 0 ? vix[t - 1] : vix[0];
        mkt[t] = s * (0.0004 + 0.01 * (prev_vix / 18.0) * em);
        smb[t] = s * 0.005 * z(rng);
        hml[t] = s * 0.005 * z(rng);
        rmw[t] = s * 0.004 * z(rng);
        cma[t] = s * 0.004 * z(rng);
        mom[t] = s * 0.006 * z(rng);
    }

    // Planted state: rate relief scaled to unit variance of the 21-day change.
    const double change_sd = tnx_sigma * std::sqrt(21.0);
    std::vector<double> relief(n, 0.0);
    for (std::size_t t = 21; t < n && change_sd > 0.0; ++t) {
        relief[t] = -(tnx[t] - tnx[t - 21]) / change_sd;
    }

    std::vector<double> g_ret(n), d_ret(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double excess = mkt[t] - s * rf;
        const double planted = t > 0 ? 0.5 * p.planted_rate_effect * relief[t - 1] : 0.0;
        g_ret[t] = s * rf + 1.15 * excess + 0.10 * smb[t] - 0.30 * hml[t] - 0.10 * rmw[t] + planted;
        d_ret[t] = s * rf + 0.87 * excess + 0.25 * hml[t] + 0.10 * rmw[t] + 0.05 * cma[t] - planted;
    }

    RawDataSet data;
    data.growth = default_growth_basket();
    data.defensive = default_defensive_basket();

    auto make_prices = [&](const std::string& sym, const std::vector<double>& base, Date first,
                           double idio) {
        PriceSeries ps;
        ps.symbol = sym;
        double price = 100.0;
        bool dropped_prev = false;
        for (std::size_t t = 0; t < n; ++t) {
            const double r = base[t] + s * idio * z(rng);
            const bool drop_draw = u(rng) < p.missing_bar_prob;
            if (dates[t] < first) continue;
            if (!ps.empty()) price *= 1.0 + r;
            const bool drop = drop_draw && !dropped_prev && !ps.empty() && t + 1 < n;
            dropped_prev = drop;
            if (drop) continue;
            ps.dates.push_back(dates[t]);
            ps.values.push_back(price);
        }
        return ps;
    };

    const Date cowz = p.staggered_listings ? listing(2016, 12, 20) : dates.front();
    const Date fdvv = p.staggered_listings ? listing(2016, 9, 15) : dates.front();
    for (const auto& sym : data.growth.members) {
        data.members.push_back(make_prices(sym, g_ret, dates.front(), 0.003));
    }
    for (const auto& sym : data.defensive.members) {
        const Date first = sym == "COWZ" ? cowz : (sym == "FDVV" ? fdvv : dates.front());
        data.members.push_back(make_prices(sym, d_ret, first, 0.003));
    }
    {
        PriceSeries spy;
        spy.symbol = "SPY";
        double price = 300.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (t > 0) price *= 1.0 + mkt[t];
            spy.dates.push_back(dates[t]);
            spy.values.push_back(price);
        }
        data.spy = std::move(spy);
    }
    auto level = [&](const std::string& sym, const std::vector<double>& v) {
        LevelSeries ls;
        ls.symbol = sym;
        ls.dates = dates;
        ls.values = v;
        return ls;
    };
    data.tnx = level("TNX", tnx);
    data.vix = level("VIX", vix);
    if (p.include_credit) data.baa10y = level("BAA10Y", baa);
    if (p.include_factors) {
        FactorPanel f;
        f.dates = dates;
        f.factors = {std::vector<double>(n), smb, hml, rmw, cma, mom};
        for (std::size_t t = 0; t < n; ++t) f.factors[0][t] = mkt[t] - s * rf;
        f.rf.assign(n, s * rf);
        data.factors = std::move(f);
    }
    return data;
}

}  // namespace styletiming
