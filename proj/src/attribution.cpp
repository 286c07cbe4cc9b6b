#include "styletiming/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "styletiming/errors.hpp"
#include "styletiming/stats.hpp"

namespace styletiming {

double RegressionResult::beta(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw ValidationError("regression has no coefficient '" + name + "'");
    }
    return betas[static_cast<std::size_t>(it - names.begin())];
}

int default_hac_lags(std::size_t n) {
    return static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 2.0 / 9.0)));
}

Eigen::MatrixXd newey_west_covariance(const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd& residuals, int lags) {
    const Eigen::Index n = design.rows();
    const Eigen::MatrixXd scores = design.array().colwise() * residuals.array();
    Eigen::MatrixXd meat = scores.transpose() * scores;
    for (int l = 1; l <= lags && l < n; ++l) {
        const double weight = 1.0 - static_cast<double>(l) / static_cast<double>(lags + 1);
        const Eigen::MatrixXd gamma =
            scores.bottomRows(n - l).transpose() * scores.topRows(n - l);
        meat += weight * (gamma + gamma.transpose());
    }
    const Eigen::MatrixXd xtx = design.transpose() * design;
    const Eigen::MatrixXd bread =
        xtx.ldlt().solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
    return bread * meat * bread;
}

LinearFit fit_ols_hac(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, int lags) {
    if (design.rows() != y.size()) {
        throw ValidationError("regression: design and dependent lengths differ");
    }
    if (lags < 0) {
        throw ValidationError("regression: HAC lags must be nonnegative");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) {
        throw SingularMatrixError("regression: regressor matrix is rank deficient (rank " +
                                  std::to_string(qr.rank()) + " < " +
                                  std::to_string(design.cols()) + ")");
    }
    LinearFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - design * fit.coef;
    fit.cov = newey_west_covariance(design, fit.residuals, lags);
    const double ybar = y.mean();
    const double sst = (y.array() - ybar).square().sum();
    const double ssr = fit.residuals.squaredNorm();
    fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : kMissing;
    return fit;
}

namespace {

double t_stat(double coef, double se) { return se > 0.0 ? coef / se : kMissing; }

}  // namespace

RegressionResult ols_hac(const RegressionSpec& spec) {
    const std::size_t n = spec.dependent.size();
    const std::size_t k = spec.regressors.size();
    if (n <= k + 1) {
        throw ValidationError("regression: sample of " + std::to_string(n) +
                              " is too small for " + std::to_string(k) + " regressors");
    }
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k + 1));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        if (is_missing(spec.dependent[t])) {
            throw ValidationError("regression: dependent has a missing value");
        }
        y(static_cast<Eigen::Index>(t)) = spec.dependent[t];
        design(static_cast<Eigen::Index>(t), 0) = 1.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
        const auto& reg = spec.regressors[j];
        if (reg.values.size() != n) {
            throw ValidationError("regression: regressor '" + reg.name + "' has wrong length");
        }
        if (reg.values == spec.dependent) {
            throw SingularMatrixError("regression: regressor '" + reg.name +
                                      "' is the dependent variable");
        }
        for (std::size_t t = 0; t < n; ++t) {
            if (is_missing(reg.values[t])) {
                throw ValidationError("regression: regressor '" + reg.name + "' has a missing value");
            }
            design(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j + 1)) = reg.values[t];
        }
    }
    const int lags = spec.hac_lags.value_or(default_hac_lags(n));
    const LinearFit fit = fit_ols_hac(design, y, lags);

    RegressionResult out;
    out.n = n;
    out.hac_lags = lags;
    out.alpha_daily = fit.coef(0);
    out.alpha_annual = annualize_alpha(out.alpha_daily);
    out.alpha_se = std::sqrt(std::max(0.0, fit.cov(0, 0)));
    out.alpha_t_nw = t_stat(out.alpha_daily, out.alpha_se);
    for (std::size_t j = 0; j < k; ++j) {
        const auto idx = static_cast<Eigen::Index>(j + 1);
        out.names.push_back(spec.regressors[j].name);
        out.betas.push_back(fit.coef(idx));
        out.beta_se.push_back(std::sqrt(std::max(0.0, fit.cov(idx, idx))));
        out.beta_t_nw.push_back(t_stat(out.betas.back(), out.beta_se.back()));
    }
    out.r2 = fit.r2;
    out.adj_r2 = 1.0 - (1.0 - fit.r2) * static_cast<double>(n - 1) / static_cast<double>(n - k - 1);
    return out;
}

std::vector<double> excess_dependent(std::span<const double> asset, std::span<const double> rf,
                                     bool zero_cost) {
    std::vector<double> out(asset.begin(), asset.end());
    if (zero_cost) return out;
    if (rf.size() != asset.size()) {
        throw ValidationError("excess_dependent: asset and risk-free lengths differ");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rf[i];
    return out;
}

RegressionSpec slice_spec(const RegressionSpec& spec, std::size_t begin, std::size_t end) {
    RegressionSpec out;
    if (!spec.dates.empty()) {
        out.dates.assign(spec.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                         spec.dates.begin() + static_cast<std::ptrdiff_t>(end));
    }
    out.dependent.assign(spec.dependent.begin() + static_cast<std::ptrdiff_t>(begin),
                         spec.dependent.begin() + static_cast<std::ptrdiff_t>(end));
    for (const auto& r : spec.regressors) {
        out.regressors.push_back(
            {r.name, std::vector<double>(r.values.begin() + static_cast<std::ptrdiff_t>(begin),
                                         r.values.begin() + static_cast<std::ptrdiff_t>(end))});
    }
    out.hac_lags = spec.hac_lags;
    return out;
}

std::vector<DatedRegression> rolling_attribution(const RegressionSpec& spec, std::size_t window) {
    const std::size_t n = spec.dependent.size();
    if (spec.dates.size() != n) {
        throw ValidationError("rolling_attribution: spec needs one date per observation");
    }
    if (window == 0 || window > n) {
        throw ValidationError("rolling_attribution: window " + std::to_string(window) +
                              " exceeds sample of " + std::to_string(n));
    }
    std::vector<DatedRegression> out;
    out.reserve(n - window + 1);
    for (std::size_t end = window; end <= n; ++end) {
        out.push_back({spec.dates[end - 1], ols_hac(slice_spec(spec, end - window, end))});
    }
    return out;
}

std::vector<PeriodRegression> period_attribution(const RegressionSpec& spec,
                                                 std::span<const NamedPeriod> periods) {
    if (spec.dates.size() != spec.dependent.size() || spec.dates.empty()) {
        throw ValidationError("period_attribution: spec needs one date per observation");
    }
    std::vector<PeriodRegression> out;
    for (const auto& p : periods) {
        if (p.start < spec.dates.front() || p.end > spec.dates.back()) {
            throw ValidationError("period '" + p.name + "' lies outside the sample " +
                                  format_date(spec.dates.front()) + " to " +
                                  format_date(spec.dates.back()));
        }
        const auto lo = lower_index(spec.dates, p.start);
        const auto hi = upper_index(spec.dates, p.end);
        if (hi <= lo) {
            throw ValidationError("period '" + p.name + "' contains no observations");
        }
        out.push_back({p.name, ols_hac(slice_spec(spec, lo, hi))});
    }
    return out;
}

double annualize_alpha(double alpha_daily) {
    return std::pow(1.0 + alpha_daily, kTradingDaysPerYear) - 1.0;
}

RegressionSpec factor_regression_spec(const DatedSeries& asset, const FactorPanel& factors,
                                      bool zero_cost, DateWindow window,
                                      std::optional<int> hac_lags) {
    RegressionSpec spec;
    spec.hac_lags = hac_lags;
    std::vector<double> asset_values;
    std::vector<double> rf;
    std::vector<std::size_t> rows;
    std::size_t j = 0;
    for (std::size_t i = 0; i < asset.size(); ++i) {
        const Date d = asset.dates[i];
        if (d < window.start || d > window.end) continue;
        while (j < factors.size() && factors.dates[j] < d) ++j;
        if (j == factors.size() || factors.dates[j] != d) continue;
        spec.dates.push_back(d);
        asset_values.push_back(asset.values[i]);
        rf.push_back(factors.rf[j]);
        rows.push_back(j);
    }
    if (spec.dates.empty()) {
        throw DataCoverageError("no overlap between '" + asset.symbol +
                                "' and the factor file in the attribution window");
    }
    spec.dependent = excess_dependent(asset_values, rf, zero_cost);
    for (std::size_t f = 0; f < FactorPanel::kNames.size(); ++f) {
        Regressor r{FactorPanel::kNames[f], {}};
        r.values.reserve(rows.size());
        for (auto row : rows) r.values.push_back(factors.factors[f][row]);
        spec.regressors.push_back(std::move(r));
    }
    return spec;
}

}  // namespace styletiming
