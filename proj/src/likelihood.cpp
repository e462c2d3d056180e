#include "mrgarch/likelihood.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

double log_det_spd(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw RankError("concentrated measurement covariance is singular");
  const double ld = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  if (!std::isfinite(ld)) throw RankError("concentrated measurement covariance is singular");
  return ld;
}

// Sum over t of the return-density kernel, i.e. without the c_p constant.
double return_kernel_sum(const Matrix& log_h, const Matrix& z,
                         const std::vector<std::shared_ptr<const CorrelationFactor>>& factor) {
  double acc = 0.0;
  for (Eigen::Index t = 0; t < z.rows(); ++t) {
    const CorrelationFactor& f = *factor[t];
    acc += log_h.row(t).sum() + f.log_det() + f.quadform(z.row(t).transpose());
  }
  return -0.5 * acc;
}

Vector correlation_key(const ModelParams& params, const Vector& zeta1) {
  const auto k = params.spec.k();
  Vector key(4 * k);
  key << params.corr_omega, params.corr_beta, params.corr_gamma,
      (zeta1.size() == k ? zeta1 : Vector::Zero(k));
  return key;
}

}  // namespace

double log_2pi_constant(Eigen::Index n) { return static_cast<double>(n) * std::log(2.0 * std::numbers::pi); }

double return_loglik_t(const Vector& z, const Vector& h, const CorrelationFactor& corr) {
  if (z.size() != h.size()) throw DimensionError("return_loglik_t: z and h differ in length");
  return -0.5 * (log_2pi_constant(z.size()) + h.array().log().sum() + corr.log_det() + corr.quadform(z));
}

double return_loglik_t(const Vector& z, const Vector& h, const Matrix& corr) {
  const ModelSpec dense = ModelSpec::unrestricted(static_cast<int>(corr.rows()), Dynamics::kStatic);
  return return_loglik_t(z, h, CorrelationFactor(corr, dense));
}

Matrix concentrate_sigma(const Matrix& u) {
  const Eigen::Index T = u.rows();
  if (T <= u.cols()) {
    std::ostringstream os;
    os << "need more periods (" << T << ") than measurement equations (" << u.cols() << ")";
    throw RankError(os.str());
  }
  Matrix s = (u.transpose() * u) / static_cast<double>(T);
  return 0.5 * (s + s.transpose());
}

LogLikReport loglik_report(const StateSeries& states, int p, int m, const std::string& signature) {
  LogLikReport r;
  r.T = states.T();
  r.p = p;
  r.m = m;
  r.measurement_signature = signature;
  r.return_per_t.resize(r.T);
  const double cp = log_2pi_constant(p);
  for (Eigen::Index t = 0; t < r.T; ++t) {
    const CorrelationFactor& f = *states.factor[t];
    const Vector z = states.z.row(t).transpose();
    r.return_per_t(t) = -0.5 * (cp + states.h.row(t).array().log().sum() + f.log_det() + f.quadform(z));
  }
  r.return_part = r.return_per_t.sum();
  const Matrix sigma = concentrate_sigma(states.u);
  const double Td = static_cast<double>(r.T);
  const int dim = p + m;
  // sum_t u_t' Sigma_hat^{-1} u_t = T (p+m) at the concentrated Sigma.
  r.measurement_part = -0.5 * Td * (log_2pi_constant(dim) + log_det_spd(sigma) + dim);
  r.total = r.return_part + r.measurement_part;
  r.constant = -0.5 * Td * (log_2pi_constant(p) + log_2pi_constant(dim) + dim);
  r.objective = r.total - r.constant;
  return r;
}

namespace {

std::string signature_of(const ModelSpec& spec) {
  std::ostringstream os;
  os << "p=" << spec.p() << ";corr_rows=" << spec.m();
  if (spec.m() > 0) {
    os << ";loading=";
    for (Eigen::Index r = 0; r < spec.measurement_loading().rows(); ++r)
      os << spec.measurement_loading().column_of_row(r) << ",";
  }
  return os.str();
}

}  // namespace

LogLikReport evaluate_loglik(const ModelParams& params, const Dataset& data, const InitialState& init,
                             Matrix* sigma_hat) {
  const StateSeries states = filter(params, data, init);
  if (sigma_hat) *sigma_hat = concentrate_sigma(states.u);
  return loglik_report(states, params.spec.p(), params.spec.m(), signature_of(params.spec));
}

double concentrated_objective(const ModelParams& params, const Dataset& data, const InitialState& init) {
  ObjectiveEvaluator eval(data, params.spec);
  return eval(params, init);
}

ObjectiveEvaluator::ObjectiveEvaluator(const Dataset& data, const ModelSpec& spec)
    : data_(data), spec_(spec), signals_(prepare_signals(data, spec)) {}

const CorrelationPath& ObjectiveEvaluator::correlation_path(const ModelParams& params, const Vector& zeta1) {
  const Vector key = correlation_key(params, zeta1);
  for (auto it = cache_.begin(); it != cache_.end(); ++it) {
    if (it->key.size() == key.size() && it->key == key) {
      if (it != cache_.begin()) cache_.splice(cache_.begin(), cache_, it);
      return cache_.front().path;
    }
  }
  ++misses_;
  CacheEntry entry;
  entry.key = key;
  entry.path = filter_correlations(params, signals_, data_.T(), zeta1);
  cache_.push_front(std::move(entry));
  if (cache_.size() > 2) cache_.pop_back();
  return cache_.front().path;
}

double ObjectiveEvaluator::operator()(const ModelParams& params, const InitialState& init) {
  if (!(params.spec == spec_)) throw ArgumentError("evaluator was built for a different specification");
  params.validate();
  const VariancePath var = filter_variances(params, data_, init.h1);
  const CorrelationPath& cor = correlation_path(params, init.zeta1);

  const Eigen::Index T = data_.T();
  const int p = spec_.p();
  const int m = spec_.m();
  Matrix u(T, p + m);
  u.leftCols(p) = var.v;
  if (m > 0) u.rightCols(m) = correlation_residuals(params, signals_, cor);

  const double ret = return_kernel_sum(var.log_h, var.z, cor.factor);
  const double meas = -0.5 * static_cast<double>(T) * log_det_spd(concentrate_sigma(u));
  const double out = ret + meas;
  if (!std::isfinite(out)) throw NumericalError("non-finite objective");
  return out;
}

double ObjectiveEvaluator::penalized(const ModelParams& params, const InitialState& init) {
  try {
    return (*this)(params, init);
  } catch (const Error&) {
    return kObjectivePenalty;
  }
}

PredictiveLogLik predictive_return_loglik(const ModelParams& params, const Dataset& data,
                                          const InitialState& init, Eigen::Index split) {
  if (split < 0 || split >= data.T()) throw ArgumentError("split outside the data range");
  params.validate();
  const PreparedSignals signals = prepare_signals(data, params.spec);
  const VariancePath var = filter_variances(params, data, init.h1);
  const CorrelationPath cor = filter_correlations(params, signals, data.T(), init.zeta1);
  PredictiveLogLik out;
  out.per_t.resize(data.T() - split);
  const double cp = log_2pi_constant(params.spec.p());
  for (Eigen::Index t = split; t < data.T(); ++t) {
    const CorrelationFactor& f = *cor.factor[t];
    out.per_t(t - split) =
        -0.5 * (cp + var.log_h.row(t).sum() + f.log_det() + f.quadform(var.z.row(t).transpose()));
  }
  out.mean = out.per_t.mean();
  return out;
}

}  // namespace mrg
