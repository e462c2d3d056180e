#pragma once

// Gaussian quasi-log-likelihood of the model. The measurement covariance is
// always concentrated out: Sigma_hat = T^{-1} sum u_t u_t'.

#include <list>

#include "mrgarch/model.hpp"

namespace mrg {

/// Penalty value handed to the optimizer when the objective is undefined.
inline constexpr double kObjectivePenalty = -1e12;

/// c_n = n log(2 pi).
double log_2pi_constant(Eigen::Index n);

/// -1/2 (p log 2pi + sum log h + log det C + z' C^{-1} z).
double return_loglik_t(const Vector& z, const Vector& h, const CorrelationFactor& corr);
double return_loglik_t(const Vector& z, const Vector& h, const Matrix& corr);

/// T^{-1} sum u_t u_t' (no mean removal). Throws RankError when T <= cols.
Matrix concentrate_sigma(const Matrix& u);

struct LogLikReport {
  double total = 0.0;             // return_part + measurement_part
  double return_part = 0.0;       // sum_t l_{r,t}
  double measurement_part = 0.0;  // sum_t l_{x,y|r,t} at Sigma_hat
  double constant = 0.0;          // -T/2 (c_p + c_{p+m} + p + m)
  double objective = 0.0;         // total - constant
  Vector return_per_t;            // l_{r,t}
  Eigen::Index T = 0;
  int p = 0;
  int m = 0;
  /// Totals are only comparable across specs sharing the measurement rows.
  std::string measurement_signature;
};

/// Evaluates all likelihood pieces for filtered states.
LogLikReport loglik_report(const StateSeries& states, int p, int m, const std::string& signature);

/// Runs the filter and reports the likelihood; Sigma_hat is returned
/// through `sigma_hat` when non-null.
LogLikReport evaluate_loglik(const ModelParams& params, const Dataset& data, const InitialState& init,
                             Matrix* sigma_hat = nullptr);

/// -1/2 sum_t {sum_i log h_it + log det C_t + z_t' C_t^{-1} z_t}
///   - T/2 log det(T^{-1} sum u_t u_t'). Throws on domain errors.
double concentrated_objective(const ModelParams& params, const Dataset& data, const InitialState& init);

/// Repeated evaluation of the concentrated objective on one dataset.
///
/// The correlation half of the filter (the expensive g_inverse calls) only
/// depends on corr_omega, corr_beta, corr_gamma and zeta1, so the last two
/// correlation paths are cached keyed on those values. Not thread-safe; use
/// one instance per optimization.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const Dataset& data, const ModelSpec& spec);

  /// Throws like concentrated_objective.
  double operator()(const ModelParams& params, const InitialState& init);
  /// Same, but maps every library error to kObjectivePenalty.
  double penalized(const ModelParams& params, const InitialState& init);

  const PreparedSignals& signals() const { return signals_; }
  long correlation_path_computations() const { return misses_; }

 private:
  struct CacheEntry {
    Vector key;
    CorrelationPath path;
  };
  const CorrelationPath& correlation_path(const ModelParams& params, const Vector& zeta1);

  const Dataset& data_;
  ModelSpec spec_;
  PreparedSignals signals_;
  std::list<CacheEntry> cache_;
  long misses_ = 0;
};

struct PredictiveLogLik {
  Vector per_t;
  double mean = 0.0;
};

/// l_{r,t} at fixed parameters over rows [split, T) of `data`. The filter
/// runs from `init` at row 0, which is the same as warm-starting from the
/// in-sample terminal state.
PredictiveLogLik predictive_return_loglik(const ModelParams& params, const Dataset& data,
                                          const InitialState& init, Eigen::Index split);

}  // namespace mrg
