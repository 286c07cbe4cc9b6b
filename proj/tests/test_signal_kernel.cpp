#include <cmath>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "styletiming/errors.hpp"
#include "styletiming/signal_kernel.hpp"
#include "styletiming/stats.hpp"

using namespace stltest;

TEST(ExpandingZ, HandValue) {
    const std::vector<double> x{0.0, 1.0};
    const auto z = expanding_z(x, 2);
    EXPECT_TRUE(is_missing(z[0]));
    EXPECT_NEAR(z[1], 0.7071067811865475, 1e-12);
}

TEST(ExpandingZ, ConstantIsMissing) {
    for (double v : expanding_z(std::vector<double>(100, 3.0), 10)) EXPECT_TRUE(is_missing(v));
}

TEST(ExpandingZ, MissingBeforeMinObsAndOnMissingInput) {
    auto x = normals(100, 2);
    x[70] = kMissing;
    const auto z = expanding_z(x, 60);
    for (std::size_t t = 0; t < 59; ++t) EXPECT_TRUE(is_missing(z[t]));
    EXPECT_FALSE(is_missing(z[59]));
    EXPECT_TRUE(is_missing(z[70]));
    EXPECT_FALSE(is_missing(z[71]));
}

TEST(ExpandingZ, AppendingKeepsPast) {
    const auto x = normals(400, 3);
    const auto full = expanding_z(x, 60);
    for (std::size_t cut : {60u, 137u, 399u}) {
        const auto part = expanding_z(std::span<const double>(x).first(cut), 60);
        for (std::size_t t = 0; t < cut; ++t) {
            if (is_missing(full[t])) {
                EXPECT_TRUE(is_missing(part[t]));
            } else {
                EXPECT_EQ(part[t], full[t]);
            }
        }
    }
}

namespace {

RawStateInputs flat_inputs(std::size_t n) {
    RawStateInputs raw;
    raw.dates = weekdays(d("2015-01-05"), n);
    raw.tnx.assign(n, 2.0);
    raw.vix.assign(n, 15.0);
    raw.spy.assign(n, 100.0);
    raw.gd.assign(n, 0.0);
    return raw;
}

}  // namespace

TEST(DeriveInputs, PeakDrawdownZero) {
    auto raw = flat_inputs(300);
    for (std::size_t t = 0; t < 300; ++t) raw.spy[t] = 100.0 + static_cast<double>(t);
    const auto der = derive_inputs(raw);
    for (double v : der.spy_drawdown) EXPECT_EQ(v, 0.0);
}

TEST(DeriveInputs, VixAtTrailingMaxIsOne) {
    auto raw = flat_inputs(800);
    const auto noise = normals(800, 4);
    for (std::size_t t = 0; t < 800; ++t) raw.vix[t] = 15.0 + noise[t];
    raw.vix[799] = 90.0;
    const auto der = derive_inputs(raw);
    EXPECT_EQ(der.vix_percentile[799], 1.0);
    EXPECT_TRUE(is_missing(der.vix_percentile[250]));
    EXPECT_FALSE(is_missing(der.vix_percentile[251]));
}

TEST(DeriveInputs, ZeroGdTrailingIsZero) {
    const auto der = derive_inputs(flat_inputs(200));
    EXPECT_TRUE(is_missing(der.gd_trailing[124]));
    EXPECT_EQ(der.gd_trailing[125], 0.0);
    EXPECT_EQ(der.tnx_change[21], 0.0);
    EXPECT_TRUE(is_missing(der.tnx_change[20]));
}

TEST(Directional, SignConventions) {
    auto raw = flat_inputs(400);
    const auto noise = normals(400, 8, 0.05);
    for (std::size_t t = 0; t < 400; ++t) {
        raw.tnx[t] = 2.0 + noise[t];
        raw.vix[t] = 15.0 + 10.0 * noise[t];
        raw.spy[t] = 100.0 * (1.0 + noise[t]);
    }
    // falling rates and VIX rising over 21 days at the end
    raw.tnx[399] = raw.tnx[378] - 1.0;
    raw.vix[399] = raw.vix[378] + 20.0;
    raw.spy[399] = 40.0;
    const auto der = derive_inputs(raw);
    const auto s = directional_z(der, 60);
    EXPECT_GT(s.r[399], 0.0);
    EXPECT_LT(s.vr[399], 0.0);
    EXPECT_GT(s.d[399], 0.0);
}

TEST(Softplus, Values) {
    EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-12);
    EXPECT_LT(softplus(50.0) - 50.0, 1e-12);
    EXPECT_LT(softplus(-50.0), 1e-12);
    EXPECT_TRUE(std::isfinite(softplus(1e6)));
    EXPECT_NEAR(softplus(0.0, 2.0), 2.0 * std::log(2.0), 1e-12);
}

TEST(Components, Identities) {
    DirectionalSignals s;
    s.r = {0.0, 40.0, 1.0};
    s.vh = {0.0, 1.0, -2.0};
    s.vr = {0.0, 0.0, 0.0};
    s.g126 = {0.0, 0.5, 3.0};
    s.d = {0.0, 0.0, 0.0};
    const auto c = smooth_components(s);
    EXPECT_EQ(c.rate_quiet[0], 1.0);
    EXPECT_NEAR(c.high_vix[0], std::log(2.0), 1e-15);
    EXPECT_NEAR(c.low_vix[0], std::log(2.0), 1e-15);
    EXPECT_LT(c.rate_quiet[1], 1e-300);
    const auto in = interactions(c, s.r, s.vh);
    EXPECT_EQ(in.i1[0], 0.0);
    EXPECT_EQ(in.i4[0], in.i3[0]);
}

TEST(Components, RandomBounds) {
    DirectionalSignals s;
    s.r = normals(5000, 1, 3.0);
    s.vh = normals(5000, 2, 3.0);
    s.vr = normals(5000, 3, 3.0);
    s.g126 = normals(5000, 4, 3.0);
    s.d = normals(5000, 5);
    const auto c = smooth_components(s);
    const auto in = interactions(c, s.r, s.vh);
    for (std::size_t t = 0; t < 5000; ++t) {
        EXPECT_GT(c.rate_quiet[t], 0.0);
        EXPECT_LE(c.rate_quiet[t], 1.0);
        EXPECT_GE(in.i2[t], 0.0);
        EXPECT_GE(in.i3[t], 0.0);
    }
}

namespace {

SignalFrame iid_frame(std::size_t n, std::uint64_t seed, bool credit = false) {
    DerivedInputs der;
    der.tnx_change.assign(n, 0.0);
    der.vix_change.assign(n, 0.0);
    der.vix_percentile.assign(n, 0.5);
    der.spy_drawdown.assign(n, 0.0);
    der.gd_trailing.assign(n, 0.0);
    if (credit) {
        der.baa_level = normals(n, seed + 10, 0.3, 2.0);
        der.baa_change.assign(n, 0.0);
    }
    DirectionalSignals s;
    s.r = normals(n, seed);
    s.d = normals(n, seed + 1);
    s.vh = normals(n, seed + 2);
    s.vr = normals(n, seed + 3);
    s.g126 = normals(n, seed + 4);
    return assemble_frame(weekdays(d("2010-01-04"), n), der, s, SignalSettings{});
}

}  // namespace

TEST(Score, ZeroLambdasGiveCore) {
    const auto f = iid_frame(500, 21);
    ScoreParams p;
    p.lambda_s = 0.0;
    p.lambda_c = 0.0;
    const auto s = policy_score(f, p);
    EXPECT_EQ(s.raw, s.core);
}

TEST(Score, AlphaOneIsRate) {
    const auto f = iid_frame(500, 22);
    ScoreParams p;
    p.alpha = 1.0;
    EXPECT_EQ(policy_score(f, p).core, f.directional.r);
    const auto core = compose_score(f, ScoreKind::core_only, p);
    const auto tnx = compose_score(f, ScoreKind::tnx_only, p);
    EXPECT_EQ(core.raw, tnx.raw);
}

TEST(Score, IidInputsCentered) {
    const auto f = iid_frame(4000, 23);
    const auto s = policy_score(f, ScoreParams{});
    double sum = 0.0;
    std::size_t n = 0;
    for (double v : s.score_z) {
        if (is_missing(v)) continue;
        sum += v;
        ++n;
    }
    EXPECT_GT(n, 3800u);
    EXPECT_LT(std::fabs(sum / static_cast<double>(n)), 0.1);
}

TEST(Credit, SignsAndDegenerate) {
    std::vector<double> baa(300);
    const auto noise = normals(300, 30, 0.02);
    for (std::size_t t = 0; t < 300; ++t) baa[t] = 2.0 + noise[t];
    baa[299] = baa[278] - 0.5;
    const std::vector<double> zero_r(300, 0.0);
    const auto c = credit_signals(baa, zero_r);
    EXPECT_GT(c.ce[299], 0.0);
    for (double v : c.rcs_z) EXPECT_TRUE(is_missing(v));
}

TEST(Credit, CsCenteredAtMean) {
    std::vector<double> baa(200);
    const auto noise = normals(199, 31, 0.1);
    double sum = 0.0;
    for (std::size_t t = 0; t < 199; ++t) sum += baa[t] = 2.0 + noise[t];
    baa[199] = sum / 199.0;
    const auto c = credit_signals(baa, std::vector<double>(200, 1.0));
    EXPECT_NEAR(c.cs[199], 0.0, 1e-12);
}

TEST(Credit, ZeroOverlayIsBase) {
    const auto f = iid_frame(500, 24, true);
    ScoreParams p;
    const auto base = policy_score(f, p);
    const auto over = incremental_score(base.raw, f.credit.ce, f.credit.rcs_z, p, 60);
    auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t t = 0; t < a.size(); ++t) {
            if (is_missing(a[t])) {
                EXPECT_TRUE(is_missing(b[t]));
            } else {
                EXPECT_EQ(a[t], b[t]);
            }
        }
    };
    same(base.raw, over.raw);
    same(base.score_z, over.score_z);
}

TEST(Credit, LocationShiftInvariant) {
    std::vector<double> baa = normals(300, 32, 0.2, 2.0);
    auto shifted = baa;
    for (auto& v : shifted) v += 5.0;
    const std::vector<double> r = normals(300, 33);
    const auto a = credit_signals(baa, r);
    const auto b = credit_signals(shifted, r);
    for (std::size_t t = 0; t < 300; ++t) {
        if (is_missing(a.ce[t])) {
            EXPECT_TRUE(is_missing(b.ce[t]));
        } else {
            EXPECT_NEAR(a.ce[t], b.ce[t], 1e-9);
        }
    }
}

TEST(Credit, KindsNeedBaa) {
    const auto f = iid_frame(200, 25);
    EXPECT_THROW(compose_score(f, ScoreKind::credit_replacement, ScoreParams{}), DataCoverageError);
    ScoreParams p;
    p.lambda_credit = 0.1;
    EXPECT_THROW(compose_score(f, ScoreKind::smooth, p), DataCoverageError);
}
