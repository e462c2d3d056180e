#pragma once

// Quasi maximum likelihood estimation of the model: starting values, joint
// maximization of the concentrated objective and a two-stage variant.

#include <cstdint>
#include <string>
#include <vector>

#include "mrgarch/likelihood.hpp"
#include "mrgarch/optimizer.hpp"

namespace mrg {

struct EstimationSpec {
  ModelSpec model;
  InitMode init_mode = InitMode::kSampleAverage;
  int init_window = 50;
  OptimizerOptions optimizer;
  int multistart = 3;
  std::uint64_t seed = 1;
};

struct FitDiagnostics {
  int iterations = 0;
  long evaluations = 0;
  double gradient_norm = 0.0;
  std::string termination;
  std::vector<double> trace;         // accepted-step objective values of the best start
  std::vector<double> start_values;  // final objective of every start
  int best_start = 0;
  double initial_objective = 0.0;    // objective at init_params
};

struct FitResult {
  ModelParams params;  // sigma holds Sigma_hat
  InitialState init;
  LogLikReport report;
  FitDiagnostics diagnostics;
  std::string method;  // "joint" or "two-stage"
};

/// Parameter groups, used to estimate subsets of the parameters.
enum class ParamGroup { kVariance, kCorrelationMeasurement, kCorrelationDynamics };

/// Maps ModelParams (+ optionally estimated initial states) to a flat vector.
/// Order: mu, omega, beta, gamma, tau1, tau2, xi, phi, delta1, delta2,
/// log h1, meas_xi, meas_phi, corr_omega, corr_beta, corr_gamma, zeta1.
/// Correlation dynamics come last so that finite-difference sweeps perturb
/// them after everything that reuses the cached correlation path.
class ParamLayout {
 public:
  ParamLayout(const ModelSpec& spec, InitMode init_mode, std::vector<ParamGroup> groups);

  Eigen::Index size() const { return size_; }
  Vector pack(const ModelParams& params, const InitialState& init) const;
  void unpack(const Vector& x, ModelParams& params, InitialState& init) const;

 private:
  struct Segment {
    Vector ModelParams::* field = nullptr;  // null for initial states
    int init_slot = 0;                      // 1 = log h1, 2 = zeta1
    Eigen::Index size = 0;
  };
  std::vector<Segment> segments_;
  Eigen::Index size_ = 0;
};

/// Moment-based starting values. Throws DataError on a constant return
/// column or non-finite data.
ModelParams init_params(const Dataset& data, const ModelSpec& spec);

/// Joint QMLE over all parameters (and initial states when estimated).
FitResult estimate(const Dataset& data, const EstimationSpec& spec);

/// Univariate Realized GARCH fits per asset, then the correlation parameters
/// with the variance paths held fixed.
FitResult two_stage_estimate(const Dataset& data, const EstimationSpec& spec);

/// Objective, Sigma_hat and likelihood report at given parameters.
FitResult evaluate_fit(const Dataset& data, const ModelParams& params, const InitialState& init);

}  // namespace mrg
