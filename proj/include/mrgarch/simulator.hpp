#pragma once

// Synthetic data from the model itself.

#include <cstdint>
#include <string>
#include <vector>

#include "mrgarch/model.hpp"

namespace mrg {

struct SimConfig {
  /// Parameters to simulate from; `sigma` must be a (p+m) x (p+m) PSD matrix.
  ModelParams truth;
  Eigen::Index T = 1000;
  Eigen::Index burn_in = 500;
  std::uint64_t seed = 1;
  /// Static specs have no correlation measurement equation; their realized
  /// correlations are drawn as y = A (zeta + e), e ~ N(0, this * I).
  double static_corr_noise_var = 0.005;
  std::vector<std::string> assets;  // defaults to A1..Ap
  std::string start_date = "2000-01-03";
};

struct Simulation {
  Dataset data;
  StateSeries truth;  // h, zeta, rho, corr, z, u after burn-in
};

/// Throws NumericalError on state overflow and ArgumentError on a bad config.
Simulation simulate_dataset(const SimConfig& cfg);

/// RM_t = Lambda_{x_t}^{1/2} g_inverse(y_t) Lambda_{x_t}^{1/2}.
std::vector<Matrix> emit_realized_covariances(const Dataset& data);

/// Persistent, heterogeneous parameters typical of daily equity data, with a
/// diagonal Sigma. Deterministic in the spec.
ModelParams default_truth(const ModelSpec& spec);

/// `n` consecutive weekdays (ISO format) starting at `start`, or at the next
/// weekday when `start` falls on a weekend.
std::vector<std::string> weekday_dates(const std::string& start, Eigen::Index n);

}  // namespace mrg
