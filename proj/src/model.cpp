#include "mrgarch/model.hpp"

#include <cmath>
#include <sstream>

#include "mrgarch/errors.hpp"

namespace mrg {

const char* to_string(Structure s) {
  switch (s) {
    case Structure::kEqui: return "equi";
    case Structure::kBlock: return "block";
    case Structure::kFree: return "free";
  }
  return "?";
}

const char* to_string(Dynamics d) { return d == Dynamics::kStatic ? "static" : "dynamic"; }

const char* to_string(MeasurementMode m) { return m == MeasurementMode::kCondensed ? "condensed" : "full"; }

ModelSpec::ModelSpec(Structure structure, Dynamics dynamics, BlockPartition partition,
                     MeasurementMode measurement)
    : structure_(structure), dynamics_(dynamics), measurement_(measurement), partition_(std::move(partition)) {
  const int p = partition_.p();
  if (p < 1) throw ArgumentError("model needs at least one asset");
  switch (structure_) {
    case Structure::kEqui:
      algebra_partition_ = BlockPartition::single(p);
      loading_ = build_loading(algebra_partition_);
      break;
    case Structure::kBlock:
      algebra_partition_ = partition_;
      loading_ = build_loading(algebra_partition_);
      break;
    case Structure::kFree:
      algebra_partition_ = partition_;
      loading_ = FactorLoading::identity(vecl_size(p));
      break;
  }
  measurement_loading_ =
      measurement_ == MeasurementMode::kFull ? FactorLoading::identity(vecl_size(p)) : loading_;
}

ModelSpec ModelSpec::equi(int p, Dynamics dyn) {
  return ModelSpec(Structure::kEqui, dyn, BlockPartition::single(p));
}

ModelSpec ModelSpec::block(BlockPartition part, Dynamics dyn) {
  return ModelSpec(Structure::kBlock, dyn, std::move(part));
}

ModelSpec ModelSpec::unrestricted(int p, Dynamics dyn) {
  return ModelSpec(Structure::kFree, dyn, BlockPartition::single(p));
}

ModelSpec ModelSpec::parse(const std::string& name, const BlockPartition& part) {
  const auto dash = name.find('-');
  if (dash == std::string::npos) throw ArgumentError("unknown model spec '" + name + "'");
  const std::string dyn = name.substr(0, dash);
  const std::string str = name.substr(dash + 1);
  Dynamics d;
  if (dyn == "static") d = Dynamics::kStatic;
  else if (dyn == "dynamic") d = Dynamics::kDynamic;
  else throw ArgumentError("unknown model spec '" + name + "' (dynamics must be static or dynamic)");
  Structure s;
  if (str == "equi") s = Structure::kEqui;
  else if (str == "block") s = Structure::kBlock;
  else if (str == "free") s = Structure::kFree;
  else throw ArgumentError("unknown model spec '" + name + "' (structure must be equi, block or free)");
  return ModelSpec(s, d, part);
}

int ModelSpec::m() const {
  return dynamics_ == Dynamics::kStatic ? 0 : static_cast<int>(measurement_loading_.cols());
}

std::string ModelSpec::name() const { return std::string(to_string(dynamics_)) + "-" + to_string(structure_); }

ModelParams ModelParams::zeros(const ModelSpec& spec) {
  ModelParams out;
  out.spec = spec;
  const auto p = spec.p();
  const auto k = spec.k();
  const auto m = spec.m();
  for (Vector* v : {&out.mu, &out.omega, &out.beta, &out.gamma, &out.tau1, &out.tau2, &out.xi, &out.phi,
                    &out.delta1, &out.delta2})
    *v = Vector::Zero(p);
  for (Vector* v : {&out.corr_omega, &out.corr_beta, &out.corr_gamma}) *v = Vector::Zero(k);
  for (Vector* v : {&out.meas_xi, &out.meas_phi}) *v = Vector::Zero(m);
  return out;
}

void ModelParams::validate() const {
  const auto p = spec.p();
  const auto k = spec.k();
  const auto m = spec.m();
  auto check = [](const Vector& v, Eigen::Index n, const char* name) {
    if (v.size() != n) {
      std::ostringstream os;
      os << "parameter " << name << " has length " << v.size() << ", expected " << n;
      throw DimensionError(os.str());
    }
    if (!v.allFinite()) throw DomainError(std::string("parameter ") + name + " is not finite");
  };
  check(mu, p, "mu");
  check(omega, p, "omega");
  check(beta, p, "beta");
  check(gamma, p, "gamma");
  check(tau1, p, "tau1");
  check(tau2, p, "tau2");
  check(xi, p, "xi");
  check(phi, p, "phi");
  check(delta1, p, "delta1");
  check(delta2, p, "delta2");
  check(corr_omega, k, "corr_omega");
  check(corr_beta, k, "corr_beta");
  check(corr_gamma, k, "corr_gamma");
  check(meas_xi, m, "meas_xi");
  check(meas_phi, m, "meas_phi");
  if (spec.dynamics() == Dynamics::kStatic && (corr_beta.any() || corr_gamma.any()))
    throw DomainError("static specification requires corr_beta = corr_gamma = 0");
  if (sigma.size() != 0) {
    if (sigma.rows() != p + m || sigma.cols() != p + m)
      throw DimensionError("sigma must be (p+m) x (p+m)");
    if (!sigma.allFinite()) throw DomainError("sigma is not finite");
  }
}

Vector ModelParams::variance_persistence() const { return beta + gamma; }

Vector ModelParams::correlation_persistence() const {
  if (spec.m() == 0) return corr_beta;
  const Vector phi_check = spec.loading().condense(spec.measurement_loading().expand(meas_phi));
  return corr_beta.array() + corr_gamma.array() * phi_check.array();
}

Dataset Dataset::slice(Eigen::Index begin, Eigen::Index end) const {
  if (begin < 0 || end > T() || begin > end) throw ArgumentError("dataset slice out of range");
  Dataset out;
  out.assets = assets;
  if (!dates.empty()) out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.returns = returns.middleRows(begin, end - begin);
  out.log_x = log_x.middleRows(begin, end - begin);
  out.y = y.middleRows(begin, end - begin);
  return out;
}

void Dataset::validate() const {
  const auto n = T();
  if (log_x.rows() != n || y.rows() != n) throw DataError("dataset series have different lengths");
  if (log_x.cols() != p() || y.cols() != vecl_size(p())) throw DataError("dataset column counts are inconsistent");
  if (!dates.empty() && static_cast<Eigen::Index>(dates.size()) != n) throw DataError("dates do not match rows");
  if (!assets.empty() && static_cast<Eigen::Index>(assets.size()) != p())
    throw DataError("asset names do not match columns");
  for (Eigen::Index t = 0; t < n; ++t)
    if (!returns.row(t).allFinite() || !log_x.row(t).allFinite() || !y.row(t).allFinite())
      throw DataError("non-finite value in dataset", static_cast<long>(t + 1));
}

InitialState default_initial_state(const Dataset& data, const ModelSpec& spec, int window) {
  if (data.T() < 1) throw DataError("empty dataset");
  const Eigen::Index n = std::min<Eigen::Index>(window, data.T());
  InitialState init;
  init.h1 = data.log_x.topRows(n).array().exp().colwise().mean().transpose();
  const Vector mean_y = data.y.topRows(n).colwise().mean().transpose();
  init.zeta1 = spec.loading().condense(mean_y);
  init.mode = InitMode::kSampleAverage;
  return init;
}

CorrelationFactor::CorrelationFactor(const Matrix& corr, const ModelSpec& spec)
    : factor_(std::in_place_index<1>) {
  if (spec.block_algebra()) {
    const auto& part = spec.algebra_partition();
    BlockCorrelation bc(block_params_from_matrix(corr, part), part);
    log_det_ = bc.log_det();
    factor_.emplace<0>(std::move(bc));
  } else {
    auto& llt = std::get<1>(factor_);
    llt.compute(corr);
    if (llt.info() != Eigen::Success) throw DomainError("correlation matrix is not positive definite");
    log_det_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
}

double CorrelationFactor::quadform(const Vector& z) const {
  if (factor_.index() == 0) return std::get<0>(factor_).quadform(z);
  const auto& llt = std::get<1>(factor_);
  return llt.matrixL().solve(z).squaredNorm();
}

PreparedSignals prepare_signals(const Dataset& data, const ModelSpec& spec) {
  const Eigen::Index T = data.T();
  PreparedSignals s;
  s.y_check.resize(T, spec.k());
  s.y_meas.resize(T, spec.m());
  const bool meas = spec.m() > 0;
  const bool same = spec.measurement_loading() == spec.loading();
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector yt = data.y.row(t).transpose();
    s.y_check.row(t) = spec.loading().condense(yt).transpose();
    if (!meas) continue;
    if (same) s.y_meas.row(t) = s.y_check.row(t);
    else s.y_meas.row(t) = spec.measurement_loading().condense(yt).transpose();
  }
  return s;
}

Vector leverage(const Vector& z, const Vector& a1, const Vector& a2) {
  return (a1.array() * z.array() + a2.array() * (z.array().square() - 1.0)).matrix();
}

Vector next_log_h(const ModelParams& params, const Vector& log_h, const Vector& z, const Vector& log_x) {
  return (params.omega.array() + params.beta.array() * log_h.array() +
          leverage(z, params.tau1, params.tau2).array() + params.gamma.array() * log_x.array())
      .matrix();
}

Vector next_zeta(const ModelParams& params, const Vector& zeta, const Vector& y_check) {
  return (params.corr_omega.array() + params.corr_beta.array() * zeta.array() +
          params.corr_gamma.array() * y_check.array())
      .matrix();
}

VariancePath filter_variances(const ModelParams& params, const Dataset& data, const Vector& h1) {
  const Eigen::Index T = data.T();
  const Eigen::Index p = data.p();
  if (params.spec.p() != p) throw DimensionError("parameters and data disagree on the number of assets");
  if (h1.size() != p) throw DimensionError("initial variances have the wrong length");
  if (!(h1.array() > 0.0).all()) throw DomainError("initial variances must be positive");

  VariancePath out;
  out.log_h.resize(T, p);
  out.z.resize(T, p);
  out.v.resize(T, p);
  Vector log_h = h1.array().log();
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) log_h = next_log_h(params, log_h, out.z.row(t - 1).transpose(), data.log_x.row(t - 1).transpose());
    const Vector z = (data.returns.row(t).transpose() - params.mu).array() * (-0.5 * log_h.array()).exp();
    if (!log_h.allFinite() || !z.allFinite() || (log_h.array().abs() > 700.0).any())
      throw NumericalError("non-finite conditional variance", static_cast<long>(t));
    out.log_h.row(t) = log_h.transpose();
    out.z.row(t) = z.transpose();
    out.v.row(t) = (data.log_x.row(t).transpose() - params.xi - params.phi.cwiseProduct(log_h) -
                    leverage(z, params.delta1, params.delta2))
                       .transpose();
  }
  return out;
}

CorrelationPath filter_correlations(const ModelParams& params, const PreparedSignals& signals,
                                    Eigen::Index T, const Vector& zeta1) {
  const ModelSpec& spec = params.spec;
  const bool is_static = spec.dynamics() == Dynamics::kStatic;
  if (!is_static && zeta1.size() != spec.k()) throw DimensionError("initial zeta has the wrong length");

  CorrelationPath out;
  out.zeta.resize(T, spec.k());
  out.rho.resize(T, spec.d());
  out.corr.reserve(T);
  out.factor.reserve(T);

  Vector zeta = is_static ? params.corr_omega : zeta1;
  Vector warm;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0 && !is_static) zeta = next_zeta(params, zeta, signals.y_check.row(t - 1).transpose());
    if (!zeta.allFinite() || (zeta.array().abs() > 1e3).any())
      throw NumericalError("non-finite correlation state", static_cast<long>(t));
    out.zeta.row(t) = zeta.transpose();
    const Vector rho = spec.loading().expand(zeta);
    out.rho.row(t) = rho.transpose();
    if (is_static && t > 0) {
      out.corr.push_back(out.corr.back());
      out.factor.push_back(out.factor.back());
      continue;
    }
    try {
      auto g = g_inverse_detailed(rho, warm);
      warm = std::move(g.log_diag);
      out.factor.push_back(std::make_shared<const CorrelationFactor>(g.corr, spec));
      out.corr.push_back(std::move(g.corr));
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), static_cast<long>(t), e.residual());
    }
  }
  return out;
}

Matrix correlation_residuals(const ModelParams& params, const PreparedSignals& signals,
                             const CorrelationPath& path) {
  const ModelSpec& spec = params.spec;
  const Eigen::Index T = path.zeta.rows();
  Matrix out(T, spec.m());
  if (spec.m() == 0) return out;
  const bool same = spec.measurement_loading() == spec.loading();
  for (Eigen::Index t = 0; t < T; ++t) {
    const Vector signal = same ? Vector(path.zeta.row(t).transpose())
                               : spec.measurement_loading().condense(path.rho.row(t).transpose());
    out.row(t) = (signals.y_meas.row(t).transpose() - params.meas_xi - params.meas_phi.cwiseProduct(signal))
                     .transpose();
  }
  return out;
}

StateSeries filter(const ModelParams& params, const Dataset& data, const InitialState& init) {
  params.validate();
  const PreparedSignals signals = prepare_signals(data, params.spec);
  VariancePath var = filter_variances(params, data, init.h1);
  CorrelationPath cor = filter_correlations(params, signals, data.T(), init.zeta1);

  StateSeries out;
  out.h = var.log_h.array().exp();
  out.z = std::move(var.z);
  out.u.resize(data.T(), params.spec.p() + params.spec.m());
  out.u.leftCols(params.spec.p()) = var.v;
  out.u.rightCols(params.spec.m()) = correlation_residuals(params, signals, cor);
  out.zeta = std::move(cor.zeta);
  out.rho = std::move(cor.rho);
  out.corr = std::move(cor.corr);
  out.factor = std::move(cor.factor);
  return out;
}

Matrix covariance_from(const Vector& h, const Matrix& corr) {
  const Vector sd = h.array().sqrt();
  Matrix H = sd.asDiagonal() * corr * sd.asDiagonal();
  return 0.5 * (H + H.transpose());
}

OneStepForecast one_step_forecast(const ModelParams& params, const StateSeries& states, const Dataset& data) {
  const Eigen::Index T = states.T();
  if (T < 1 || data.T() < T) throw ArgumentError("one_step_forecast needs a completed filter pass");
  const Eigen::Index last = T - 1;
  const ModelSpec& spec = params.spec;

  OneStepForecast out;
  const Vector log_h = next_log_h(params, states.h.row(last).transpose().array().log(),
                                  states.z.row(last).transpose(), data.log_x.row(last).transpose());
  if (!log_h.allFinite()) throw NumericalError("non-finite forecast variance", static_cast<long>(T));
  out.h = log_h.array().exp();
  if (spec.dynamics() == Dynamics::kStatic) {
    out.zeta = params.corr_omega;
  } else {
    const Vector y_check = spec.loading().condense(data.y.row(last).transpose());
    out.zeta = next_zeta(params, states.zeta.row(last).transpose(), y_check);
  }
  out.corr = g_inverse(spec.loading().expand(out.zeta));
  out.H = covariance_from(out.h, out.corr);
  return out;
}

}  // namespace mrg
