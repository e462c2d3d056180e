#include "mrgarch/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

Matrix psd_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  const Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Vector draw_normal(Eigen::Index n, std::mt19937_64& rng, std::normal_distribution<double>& n01) {
  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) e(i) = n01(rng);
  return e;
}

// Unconditional mean of log h implied by the reduced form, or omega when
// the recursion is not mean-reverting.
Vector stationary_log_h(const ModelParams& q) {
  Vector out(q.omega.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double denom = 1.0 - q.beta(i) - q.gamma(i) * q.phi(i);
    out(i) = denom > 1e-6 ? (q.omega(i) + q.gamma(i) * q.xi(i)) / denom : q.omega(i);
  }
  return out;
}

Vector stationary_zeta(const ModelParams& q) {
  const ModelSpec& spec = q.spec;
  if (spec.m() == 0) return q.corr_omega;
  const Vector xi_check = spec.loading().condense(spec.measurement_loading().expand(q.meas_xi));
  const Vector phi_check = spec.loading().condense(spec.measurement_loading().expand(q.meas_phi));
  Vector out(q.corr_omega.size());
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double denom = 1.0 - q.corr_beta(j) - q.corr_gamma(j) * phi_check(j);
    out(j) = denom > 1e-6 ? (q.corr_omega(j) + q.corr_gamma(j) * xi_check(j)) / denom : q.corr_omega(j);
  }
  return out;
}

}  // namespace

Simulation simulate_dataset(const SimConfig& cfg) {
  const ModelParams& q = cfg.truth;
  q.validate();
  const ModelSpec& spec = q.spec;
  const Eigen::Index p = spec.p();
  const Eigen::Index m = spec.m();
  const Eigen::Index k = spec.k();
  const Eigen::Index d = spec.d();
  if (cfg.T < 1) throw ArgumentError("simulation length must be positive");
  if (cfg.burn_in < 0) throw ArgumentError("burn-in must be non-negative");
  if (q.sigma.rows() != p + m || q.sigma.cols() != p + m)
    throw DimensionError("simulation needs a (p+m) x (p+m) measurement covariance");
  if (!cfg.assets.empty() && static_cast<Eigen::Index>(cfg.assets.size()) != p)
    throw ArgumentError("asset names do not match the number of assets");
  const bool is_static = spec.dynamics() == Dynamics::kStatic;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  const Matrix sigma_root = psd_sqrt(q.sigma);
  const double static_sd = std::sqrt(std::max(0.0, cfg.static_corr_noise_var));

  const Eigen::Index total = cfg.burn_in + cfg.T;
  Simulation out;
  Dataset& data = out.data;
  StateSeries& truth = out.truth;
  data.returns.resize(cfg.T, p);
  data.log_x.resize(cfg.T, p);
  data.y.resize(cfg.T, d);
  truth.h.resize(cfg.T, p);
  truth.zeta.resize(cfg.T, k);
  truth.rho.resize(cfg.T, d);
  truth.z.resize(cfg.T, p);
  truth.u.resize(cfg.T, p + m);
  truth.corr.reserve(cfg.T);

  Vector log_h = stationary_log_h(q);
  Vector zeta = is_static ? q.corr_omega : stationary_zeta(q);
  Vector warm;
  Matrix corr;
  Eigen::LLT<Matrix> corr_llt;
  for (Eigen::Index t = 0; t < total; ++t) {
    if (!log_h.allFinite() || (log_h.array().abs() > 700.0).any() || !zeta.allFinite() ||
        (zeta.array().abs() > 1e3).any())
      throw NumericalError("simulated state overflowed", static_cast<long>(t));
    const Vector rho = spec.loading().expand(zeta);
    if (!is_static || t == 0) {
      try {
        auto g = g_inverse_detailed(rho, warm);
        warm = std::move(g.log_diag);
        corr = std::move(g.corr);
      } catch (const NumericalError& e) {
        throw NumericalError(e.what(), static_cast<long>(t), e.residual());
      }
      corr_llt.compute(corr);
      if (corr_llt.info() != Eigen::Success)
        throw NumericalError("simulated correlation matrix is not positive definite", static_cast<long>(t));
    }

    const Vector z = corr_llt.matrixL() * draw_normal(p, rng, n01);
    const Vector u = sigma_root * draw_normal(p + m, rng, n01);
    const Vector h = log_h.array().exp();
    const Vector r = q.mu.array() + h.array().sqrt() * z.array();
    const Vector log_x = q.xi + q.phi.cwiseProduct(log_h) + leverage(z, q.delta1, q.delta2) + u.head(p);

    Vector y;
    if (is_static) {
      y = spec.loading().expand(zeta + static_sd * draw_normal(k, rng, n01));
    } else {
      const Vector signal = spec.measurement_loading().condense(rho);
      const Vector y_meas = q.meas_xi + q.meas_phi.cwiseProduct(signal) + u.tail(m);
      y = spec.measurement_loading().expand(y_meas);
    }

    if (t >= cfg.burn_in) {
      const Eigen::Index s = t - cfg.burn_in;
      data.returns.row(s) = r.transpose();
      data.log_x.row(s) = log_x.transpose();
      data.y.row(s) = y.transpose();
      truth.h.row(s) = h.transpose();
      truth.zeta.row(s) = zeta.transpose();
      truth.rho.row(s) = rho.transpose();
      truth.z.row(s) = z.transpose();
      truth.u.row(s) = u.transpose();
      truth.corr.push_back(corr);
    }

    log_h = next_log_h(q, log_h, z, log_x);
    if (!is_static) zeta = next_zeta(q, zeta, spec.loading().condense(y));
  }

  if (cfg.assets.empty()) {
    for (Eigen::Index i = 0; i < p; ++i) data.assets.push_back("A" + std::to_string(i + 1));
  } else {
    data.assets = cfg.assets;
  }
  data.dates = weekday_dates(cfg.start_date, cfg.T);
  return out;
}

std::vector<Matrix> emit_realized_covariances(const Dataset& data) {
  std::vector<Matrix> out;
  out.reserve(data.T());
  Vector warm;
  for (Eigen::Index t = 0; t < data.T(); ++t) {
    auto g = g_inverse_detailed(data.y.row(t).transpose(), warm);
    warm = g.log_diag;
    const Vector x = data.log_x.row(t).transpose().array().exp();
    out.push_back(covariance_from(x, g.corr));
  }
  return out;
}

ModelParams default_truth(const ModelSpec& spec) {
  ModelParams q = ModelParams::zeros(spec);
  const int p = spec.p();
  for (int i = 0; i < p; ++i) {
    const double beta = 0.55 + 0.05 * (i % 3);
    const double gamma = 0.41 - 0.05 * (i % 3) - 0.01 * (i % 2);
    const double level = std::log(1.0 + 0.5 * (i % 4));  // mean log h
    q.mu(i) = 0.03;
    q.beta(i) = beta;
    q.gamma(i) = gamma;
    q.xi(i) = -0.2;
    q.phi(i) = 1.0;
    q.omega(i) = (1.0 - beta - gamma) * level - gamma * q.xi(i);
    q.tau1(i) = -0.02;
    q.tau2(i) = 0.02;
    q.delta1(i) = -0.05;
    q.delta2(i) = 0.05;
  }

  // Target levels of zeta: stronger within than between blocks.
  Vector target(spec.k());
  if (spec.structure() == Structure::kFree) {
    const auto& part = spec.partition();
    Eigen::Index r = 0;
    for (int j = 0; j < p; ++j)
      for (int i = j + 1; i < p; ++i, ++r)
        target(r) = part.block_of(i) == part.block_of(j) ? 0.25 + 0.02 * (r % 3) : 0.12;
  } else {
    const auto cols = loading_columns(spec.algebra_partition());
    for (std::size_t c = 0; c < cols.size(); ++c)
      target(c) = cols[c].first == cols[c].second ? 0.3 + 0.05 * (cols[c].first % 3) : 0.12;
  }
  if (spec.dynamics() == Dynamics::kDynamic) {
    q.corr_beta.setConstant(0.75);
    q.corr_gamma.setConstant(0.2);
    q.corr_omega = (1.0 - 0.75 - 0.2) * target;
    q.meas_phi.setOnes();
  } else {
    q.corr_omega = target;
  }

  const Eigen::Index n = p + spec.m();
  q.sigma = Matrix::Zero(n, n);
  q.sigma.diagonal().head(p).setConstant(0.2);
  q.sigma.diagonal().tail(spec.m()).setConstant(0.005);
  return q;
}

std::vector<std::string> weekday_dates(const std::string& start, Eigen::Index n) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, da = 0;
  if (start.size() != 10 || start[4] != '-' || start[7] != '-' ||
      std::sscanf(start.c_str(), "%d-%u-%u", &y, &mo, &da) != 3)
    throw ArgumentError("start date must be YYYY-MM-DD: '" + start + "'");
  const year_month_day ymd{year{y}, month{mo}, day{da}};
  if (!ymd.ok()) throw ArgumentError("invalid start date '" + start + "'");
  sys_days cur{ymd};
  std::vector<std::string> out;
  out.reserve(n);
  char buf[16];
  while (static_cast<Eigen::Index>(out.size()) < n) {
    const weekday wd{cur};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day c{cur};
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(c.year()), static_cast<unsigned>(c.month()),
                    static_cast<unsigned>(c.day()));
      out.emplace_back(buf);
    }
    cur += days{1};
  }
  return out;
}

}  // namespace mrg
