#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "styletiming/market_data.hpp"

namespace styletiming {

struct Regressor {
    std::string name;
    std::vector<double> values;
};

/// Time-series regression of `dependent` on an intercept plus `regressors`.
/// `dates` is optional for a single fit and required for rolling/period fits.
struct RegressionSpec {
    Calendar dates;
    std::vector<double> dependent;
    std::vector<Regressor> regressors;
    std::optional<int> hac_lags;  // default: floor(4 (n/100)^(2/9))
};

struct RegressionResult {
    std::size_t n = 0;
    int hac_lags = 0;
    double alpha_daily = 0.0;
    double alpha_annual = 0.0;
    double alpha_se = 0.0;
    double alpha_t_nw = 0.0;
    std::vector<std::string> names;
    std::vector<double> betas;
    std::vector<double> beta_se;
    std::vector<double> beta_t_nw;
    double r2 = 0.0;
    double adj_r2 = 0.0;

    double beta(const std::string& name) const;
};

/// Newey-West automatic lag rule floor(4 (n/100)^(2/9)).
int default_hac_lags(std::size_t n);

struct LinearFit {
    Eigen::VectorXd coef;
    Eigen::MatrixXd cov;  // HAC sandwich covariance
    Eigen::VectorXd residuals;
    double r2 = 0.0;
};

/// Least squares on a design that already contains any intercept column, with a Bartlett-kernel
/// Newey-West covariance using `lags` lags (0 lags is White's HC0 estimator).
/// Throws SingularMatrixError when the design is rank deficient.
LinearFit fit_ols_hac(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, int lags);

/// Newey-West meat/bread sandwich for given residuals.
Eigen::MatrixXd newey_west_covariance(const Eigen::MatrixXd& design,
                                      const Eigen::VectorXd& residuals, int lags);

RegressionResult ols_hac(const RegressionSpec& spec);

/// asset - rf, or the asset unchanged for a zero-cost long/short portfolio.
std::vector<double> excess_dependent(std::span<const double> asset, std::span<const double> rf,
                                     bool zero_cost);

struct DatedRegression {
    Date date;
    RegressionResult result;
};

/// One fit per terminal date on exactly `window` trailing observations.
std::vector<DatedRegression> rolling_attribution(const RegressionSpec& spec, std::size_t window);

struct NamedPeriod {
    std::string name;
    Date start;
    Date end;
};

struct PeriodRegression {
    std::string name;
    RegressionResult result;
};

std::vector<PeriodRegression> period_attribution(const RegressionSpec& spec,
                                                 std::span<const NamedPeriod> periods);

/// (1 + alpha_daily)^252 - 1.
double annualize_alpha(double alpha_daily);

/// FF5+MOM regression spec for one asset over `window`, on the dates the asset and the factor
/// panel share. With `zero_cost` the dependent is the raw return (risk-free leg cancels).
RegressionSpec factor_regression_spec(const DatedSeries& asset, const FactorPanel& factors,
                                      bool zero_cost, DateWindow window,
                                      std::optional<int> hac_lags = std::nullopt);

/// Subset of a spec on observation indices [begin, end).
RegressionSpec slice_spec(const RegressionSpec& spec, std::size_t begin, std::size_t end);

}  // namespace styletiming
