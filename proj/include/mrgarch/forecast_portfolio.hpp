#pragma once

// Covariance forecasts, minimum-variance portfolios and out-of-sample
// evaluation.

#include <cstdint>
#include <string>
#include <vector>

#include "mrgarch/estimator.hpp"

namespace mrg {

enum class ForecastMode { kGaussian, kBootstrap };

const char* to_string(ForecastMode m);

struct ForecastDistribution {
  int horizon = 1;
  ForecastMode mode = ForecastMode::kGaussian;
  std::vector<Matrix> draws;  // H_{T+h} per draw
  Matrix mean;
  /// Quantiles at `levels` of the one-period variance of the GMV portfolio
  /// (weights from each draw) and of the equal-weight portfolio.
  std::vector<double> levels{0.05, 0.5, 0.95};
  std::vector<double> gmv_variance;
  std::vector<double> equal_weight_variance;
};

/// Simulates the model h steps past the end of a filter pass. Horizon 1 is
/// F_T-measurable, so every draw equals one_step_forecast. Gaussian mode
/// draws z ~ N(0, C), u ~ N(0, Sigma_hat); bootstrap mode resamples rows of
/// the filtered (z_t, u_t), with z_t whitened by its own C_t and recoloured
/// by the simulated C. `params.sigma` must hold Sigma_hat.
ForecastDistribution multi_step_forecast(const ModelParams& params, const StateSeries& states,
                                         const Dataset& data, int horizon, ForecastMode mode, int draws,
                                         std::uint64_t seed);

/// H^{-1} 1 / (1' H^{-1} 1). Throws DomainError when H is not numerically PD.
Vector gmv_weights(const Matrix& H);

Vector equal_weights(int p);

struct PortfolioSeries {
  std::string name;
  Vector returns;                // w_t' r_t per out-of-sample day
  double mean_squared = 0.0;     // daily percent^2
  double mean_abs_annual = 0.0;  // mean |return| * sqrt(252)
  double annual_vol = 0.0;       // sqrt(252 * mean_squared)
};

struct YearBreakdown {
  std::string year;
  Eigen::Index days = 0;
  std::vector<double> gmv_mean_squared;  // per model
  double equal_weight_mean_squared = 0.0;
  std::vector<double> mean_predictive_loglik;  // per model
};

struct BacktestReport {
  Eigen::Index split = 0;
  std::vector<std::string> dates;  // out-of-sample dates
  std::vector<std::string> models;
  std::vector<PortfolioSeries> gmv;  // per model
  PortfolioSeries equal_weight;
  std::vector<Vector> predictive_loglik;  // per model, per day
  std::vector<double> mean_predictive_loglik;
  /// Mean predictive return log-likelihood minus that of models[0].
  std::vector<double> relative_predictive_loglik;
  std::vector<YearBreakdown> years;
};

/// Fixed-scheme evaluation over rows [split, T): each fit filters the full
/// sample at its estimated parameters, the one-step-ahead H_t gives daily
/// GMV weights. Throws ArgumentError when split is outside (0, T).
BacktestReport backtest(const std::vector<FitResult>& fits, const std::vector<std::string>& names,
                        const Dataset& data, Eigen::Index split);

double normal_quantile(double prob);

struct QQPoints {
  Vector theoretical;  // Phi^{-1}((i - 0.5) / T)
  Vector empirical;    // sorted standardized series
  double correlation = 0.0;
};

/// Throws DataError for T < 10 or a constant series.
QQPoints qq_points(const Vector& series);

}  // namespace mrg
