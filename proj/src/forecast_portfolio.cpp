#include "mrgarch/forecast_portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

constexpr double kTradingDays = 252.0;

double quantile_sorted(const std::vector<double>& sorted, double level) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void fill_stats(PortfolioSeries& s) {
  const double n = static_cast<double>(s.returns.size());
  s.mean_squared = s.returns.squaredNorm() / n;
  s.mean_abs_annual = s.returns.cwiseAbs().sum() / n * std::sqrt(kTradingDays);
  s.annual_vol = std::sqrt(kTradingDays * s.mean_squared);
}

}  // namespace

const char* to_string(ForecastMode m) { return m == ForecastMode::kGaussian ? "gaussian" : "bootstrap"; }

ForecastDistribution multi_step_forecast(const ModelParams& params, const StateSeries& states,
                                         const Dataset& data, int horizon, ForecastMode mode, int draws,
                                         std::uint64_t seed) {
  if (horizon < 1) throw ArgumentError("forecast horizon must be at least 1");
  if (draws < 1) throw ArgumentError("forecast needs at least one draw");
  const ModelSpec& spec = params.spec;
  const Eigen::Index p = spec.p();
  const Eigen::Index m = spec.m();
  if (params.sigma.rows() != p + m || params.sigma.cols() != p + m)
    throw DimensionError("forecasting needs the concentrated measurement covariance");
  const bool is_static = spec.dynamics() == Dynamics::kStatic;
  const OneStepForecast first = one_step_forecast(params, states, data);

  ForecastDistribution out;
  out.horizon = horizon;
  out.mode = mode;
  out.draws.reserve(draws);

  // Whitened residual rows for the bootstrap.
  Matrix e_rows;
  if (mode == ForecastMode::kBootstrap) {
    if (states.T() < 1) throw ArgumentError("bootstrap needs filtered residuals");
    e_rows.resize(states.T(), p);
    for (Eigen::Index t = 0; t < states.T(); ++t) {
      Eigen::LLT<Matrix> llt(states.corr[t]);
      e_rows.row(t) = llt.matrixL().solve(Vector(states.z.row(t).transpose())).transpose();
    }
  }
  const Matrix sigma_root = psd_sqrt(params.sigma);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick(0, std::max<Eigen::Index>(states.T() - 1, 0));

  for (int draw = 0; draw < draws; ++draw) {
    Vector log_h = first.h.array().log();
    Vector zeta = first.zeta;
    Matrix corr = first.corr;
    Vector warm;
    for (int step = 1; step < horizon; ++step) {
      Eigen::LLT<Matrix> llt(corr);
      Vector e(p), u(p + m);
      if (mode == ForecastMode::kGaussian) {
        for (Eigen::Index i = 0; i < p; ++i) e(i) = n01(rng);
        Vector w(p + m);
        for (Eigen::Index i = 0; i < p + m; ++i) w(i) = n01(rng);
        u = sigma_root * w;
      } else {
        const Eigen::Index row = pick(rng);
        e = e_rows.row(row).transpose();
        u = states.u.row(row).transpose();
      }
      const Vector z = llt.matrixL() * e;
      const Vector log_x = params.xi + params.phi.cwiseProduct(log_h) +
                           leverage(z, params.delta1, params.delta2) + u.head(p);
      if (!is_static) {
        const Vector rho = spec.loading().expand(zeta);
        const Vector signal = spec.measurement_loading().condense(rho);
        const Vector y_meas = params.meas_xi + params.meas_phi.cwiseProduct(signal) + u.tail(m);
        const Vector y_check = spec.loading().condense(spec.measurement_loading().expand(y_meas));
        zeta = next_zeta(params, zeta, y_check);
        auto g = g_inverse_detailed(spec.loading().expand(zeta), warm);
        warm = g.log_diag;
        corr = std::move(g.corr);
      }
      log_h = next_log_h(params, log_h, z, log_x);
      if (!log_h.allFinite() || (log_h.array().abs() > 700.0).any())
        throw NumericalError("forecast variance overflowed", static_cast<long>(step));
    }
    out.draws.push_back(horizon == 1 ? first.H : covariance_from(log_h.array().exp(), corr));
  }

  out.mean = Matrix::Zero(p, p);
  for (const auto& H : out.draws) out.mean += H;
  out.mean /= static_cast<double>(draws);

  std::vector<double> gmv_var, eq_var;
  const Vector eq = equal_weights(static_cast<int>(p));
  for (const auto& H : out.draws) {
    const Vector w = gmv_weights(H);
    gmv_var.push_back(w.dot(H * w));
    eq_var.push_back(eq.dot(H * eq));
  }
  std::sort(gmv_var.begin(), gmv_var.end());
  std::sort(eq_var.begin(), eq_var.end());
  for (double level : out.levels) {
    out.gmv_variance.push_back(quantile_sorted(gmv_var, level));
    out.equal_weight_variance.push_back(quantile_sorted(eq_var, level));
  }
  return out;
}

Vector gmv_weights(const Matrix& H) {
  if (H.rows() != H.cols() || H.rows() == 0) throw DimensionError("covariance matrix must be square and non-empty");
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14))
    throw DomainError("covariance matrix is singular or not positive definite");
  const Vector x = llt.solve(Vector::Ones(H.rows()));
  return x / x.sum();
}

Vector equal_weights(int p) {
  if (p < 1) throw ArgumentError("equal weights need at least one asset");
  return Vector::Constant(p, 1.0 / p);
}

BacktestReport backtest(const std::vector<FitResult>& fits, const std::vector<std::string>& names,
                        const Dataset& data, Eigen::Index split) {
  if (fits.empty()) throw ArgumentError("backtest needs at least one model");
  if (names.size() != fits.size()) throw ArgumentError("one name per model is required");
  if (split <= 0 || split >= data.T()) throw ArgumentError("split must fall strictly inside the sample");
  const Eigen::Index n = data.T() - split;
  const int p = static_cast<int>(data.p());

  BacktestReport rep;
  rep.split = split;
  rep.models = names;
  if (!data.dates.empty()) rep.dates.assign(data.dates.begin() + split, data.dates.end());

  const Vector eq = equal_weights(p);
  rep.equal_weight.name = "equal-weight";
  rep.equal_weight.returns = data.returns.bottomRows(n) * eq;
  fill_stats(rep.equal_weight);

  for (std::size_t j = 0; j < fits.size(); ++j) {
    const FitResult& fit = fits[j];
    if (fit.params.spec.p() != p) throw DimensionError("model '" + names[j] + "' has the wrong number of assets");
    const StateSeries states = filter(fit.params, data, fit.init);
    PortfolioSeries s;
    s.name = names[j];
    s.returns.resize(n);
    Vector ll(n);
    for (Eigen::Index t = split; t < data.T(); ++t) {
      const Matrix H = covariance_from(states.h.row(t).transpose(), states.corr[t]);
      s.returns(t - split) = gmv_weights(H).dot(data.returns.row(t).transpose());
      const Vector z = states.z.row(t).transpose();
      ll(t - split) = return_loglik_t(z, states.h.row(t).transpose(), *states.factor[t]);
    }
    fill_stats(s);
    rep.gmv.push_back(std::move(s));
    rep.mean_predictive_loglik.push_back(ll.mean());
    rep.predictive_loglik.push_back(std::move(ll));
  }
  for (double v : rep.mean_predictive_loglik) rep.relative_predictive_loglik.push_back(v - rep.mean_predictive_loglik[0]);

  // Calendar-year groups keyed on the first four characters of the date.
  std::map<std::string, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n; ++i)
    groups[rep.dates.empty() ? std::string("all") : rep.dates[i].substr(0, 4)].push_back(i);
  for (const auto& [year, idx] : groups) {
    YearBreakdown yb;
    yb.year = year;
    yb.days = static_cast<Eigen::Index>(idx.size());
    auto mean_sq = [&](const Vector& r) {
      double acc = 0.0;
      for (auto i : idx) acc += r(i) * r(i);
      return acc / static_cast<double>(idx.size());
    };
    for (std::size_t j = 0; j < fits.size(); ++j) {
      yb.gmv_mean_squared.push_back(mean_sq(rep.gmv[j].returns));
      double acc = 0.0;
      for (auto i : idx) acc += rep.predictive_loglik[j](i);
      yb.mean_predictive_loglik.push_back(acc / static_cast<double>(idx.size()));
    }
    yb.equal_weight_mean_squared = mean_sq(rep.equal_weight.returns);
    rep.years.push_back(std::move(yb));
  }
  return rep;
}

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("normal quantile needs a probability in (0, 1)");
  // Acklam's rational approximation followed by one Halley step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (prob < lo) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - lo) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - prob;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

QQPoints qq_points(const Vector& series) {
  const Eigen::Index T = series.size();
  if (T < 10) throw DataError("Q-Q diagnostics need at least 10 observations");
  if (!series.allFinite()) throw DataError("series contains non-finite values");
  const double mean = series.mean();
  const double sd = std::sqrt((series.array() - mean).square().sum() / static_cast<double>(T - 1));
  if (!(sd > 0.0)) throw DataError("series has zero variance");

  QQPoints out;
  out.empirical = (series.array() - mean) / sd;
  std::sort(out.empirical.data(), out.empirical.data() + T);
  out.theoretical.resize(T);
  for (Eigen::Index i = 0; i < T; ++i)
    out.theoretical(i) = normal_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(T));
  const Vector a = out.theoretical.array() - out.theoretical.mean();
  const Vector b = out.empirical.array() - out.empirical.mean();
  out.correlation = a.dot(b) / (a.norm() * b.norm());
  return out;
}

}  // namespace mrg
