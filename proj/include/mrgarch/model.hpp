#pragma once

// Model types and the observation-driven filter.
//
// Variances follow a log-linear Realized GARCH recursion per asset;
// correlations follow a GARCH-type recursion on the k distinct transformed
// correlations zeta_t, mapped to the full vecl vector by a factor loading and
// back to a correlation matrix with g_inverse. All coefficient matrices are
// diagonal and stored as vectors.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mrgarch/block_algebra.hpp"
#include "mrgarch/corr_map.hpp"

namespace mrg {

enum class Structure { kEqui, kBlock, kFree };
enum class Dynamics { kStatic, kDynamic };

/// Which realized correlation signal enters the measurement equation:
/// the condensed y_check (default) or the full y vector.
enum class MeasurementMode { kCondensed, kFull };

const char* to_string(Structure s);
const char* to_string(Dynamics d);
const char* to_string(MeasurementMode m);

class ModelSpec {
 public:
  ModelSpec() = default;
  /// For equi the partition is ignored (one block of size p); for free it
  /// only records the asset grouping.
  ModelSpec(Structure structure, Dynamics dynamics, BlockPartition partition,
            MeasurementMode measurement = MeasurementMode::kCondensed);

  static ModelSpec equi(int p, Dynamics dyn);
  static ModelSpec block(BlockPartition part, Dynamics dyn);
  static ModelSpec unrestricted(int p, Dynamics dyn);

  /// Parses "<static|dynamic>-<equi|block|free>"; throws ArgumentError.
  static ModelSpec parse(const std::string& name, const BlockPartition& part);

  Structure structure() const { return structure_; }
  Dynamics dynamics() const { return dynamics_; }
  MeasurementMode measurement() const { return measurement_; }
  const BlockPartition& partition() const { return partition_; }

  int p() const { return partition_.p(); }
  int d() const { return static_cast<int>(vecl_size(p())); }
  /// Dimension of zeta.
  int k() const { return static_cast<int>(loading_.cols()); }
  /// Rows of the correlation measurement equation; zero for static specs.
  int m() const;

  /// Loading A mapping zeta to rho = A zeta.
  const FactorLoading& loading() const { return loading_; }
  /// Loading whose condensation defines the measured correlation signal.
  const FactorLoading& measurement_loading() const { return measurement_loading_; }

  /// True when C_t is handled through the block closed forms.
  bool block_algebra() const { return structure_ != Structure::kFree; }
  const BlockPartition& algebra_partition() const { return algebra_partition_; }

  std::string name() const;

  bool operator==(const ModelSpec& o) const {
    return structure_ == o.structure_ && dynamics_ == o.dynamics_ &&
           measurement_ == o.measurement_ && partition_ == o.partition_;
  }

 private:
  Structure structure_ = Structure::kFree;
  Dynamics dynamics_ = Dynamics::kDynamic;
  MeasurementMode measurement_ = MeasurementMode::kCondensed;
  BlockPartition partition_;
  BlockPartition algebra_partition_;
  FactorLoading loading_;
  FactorLoading measurement_loading_;
};

struct ModelParams {
  ModelSpec spec;
  Vector mu;  // p, percent per day

  // log h_t = omega + beta log h_{t-1} + tau(z_{t-1}) + gamma log x_{t-1}
  Vector omega, beta, gamma, tau1, tau2;
  // log x_t = xi + phi log h_t + delta(z_t) + v_t
  Vector xi, phi, delta1, delta2;

  // zeta_t = corr_omega + corr_beta zeta_{t-1} + corr_gamma y_check_{t-1}
  Vector corr_omega, corr_beta, corr_gamma;  // k
  // measured signal = meas_xi + meas_phi (condensed rho_t) + v_check_t
  Vector meas_xi, meas_phi;  // m

  /// Measurement covariance, (p+m) x (p+m); empty until concentrated out.
  Matrix sigma;

  /// Zero-filled parameters of the right dimensions.
  static ModelParams zeros(const ModelSpec& spec);

  /// Throws DimensionError / DomainError on inconsistent or non-finite values.
  void validate() const;

  /// beta + gamma per asset.
  Vector variance_persistence() const;
  /// corr_beta + corr_gamma * phi_check per zeta component, where phi_check is
  /// meas_phi condensed onto the loading (corr_beta alone for static specs).
  Vector correlation_persistence() const;
};

struct Dataset {
  std::vector<std::string> dates;
  std::vector<std::string> assets;
  Matrix returns;  // T x p
  Matrix log_x;    // T x p, log realized variances
  Matrix y;        // T x d, transformed realized correlations

  Eigen::Index T() const { return returns.rows(); }
  Eigen::Index p() const { return returns.cols(); }

  /// Rows [begin, end).
  Dataset slice(Eigen::Index begin, Eigen::Index end) const;
  /// Throws DataError on misaligned or non-finite content.
  void validate() const;
};

enum class InitMode { kSampleAverage, kEstimated };

struct InitialState {
  Vector h1;     // p, positive
  Vector zeta1;  // k
  InitMode mode = InitMode::kSampleAverage;
};

/// h1 = mean of x over the first `window` days, zeta1 = condense(mean y).
InitialState default_initial_state(const Dataset& data, const ModelSpec& spec, int window = 50);

/// Either closed-form block factorization or a dense Cholesky factor of C_t.
class CorrelationFactor {
 public:
  CorrelationFactor(const Matrix& corr, const ModelSpec& spec);

  double log_det() const { return log_det_; }
  double quadform(const Vector& z) const;

 private:
  std::variant<BlockCorrelation, Eigen::LLT<Matrix>> factor_;
  double log_det_ = 0.0;
};

/// Variance half of the filter; depends only on the variance parameters.
struct VariancePath {
  Matrix log_h;  // T x p
  Matrix z;      // T x p, standardized returns
  Matrix v;      // T x p, variance measurement residuals
};

/// Correlation half of the filter; depends only on corr_omega, corr_beta,
/// corr_gamma and zeta1.
struct CorrelationPath {
  Matrix zeta;               // T x k
  Matrix rho;                // T x d
  std::vector<Matrix> corr;  // T correlation matrices
  std::vector<std::shared_ptr<const CorrelationFactor>> factor;
};

/// Spec-dependent projections of the realized correlations, computed once.
struct PreparedSignals {
  Matrix y_check;  // T x k, condense(y, A)
  Matrix y_meas;   // T x m, condense(y, M); empty for static specs
};

PreparedSignals prepare_signals(const Dataset& data, const ModelSpec& spec);

VariancePath filter_variances(const ModelParams& params, const Dataset& data, const Vector& h1);
CorrelationPath filter_correlations(const ModelParams& params, const PreparedSignals& signals,
                                    Eigen::Index T, const Vector& zeta1);
/// Correlation measurement residuals, T x m.
Matrix correlation_residuals(const ModelParams& params, const PreparedSignals& signals,
                             const CorrelationPath& path);

struct StateSeries {
  Matrix h;     // T x p
  Matrix zeta;  // T x k
  Matrix rho;   // T x d
  std::vector<Matrix> corr;
  std::vector<std::shared_ptr<const CorrelationFactor>> factor;
  Matrix z;  // T x p
  Matrix u;  // T x (p+m)

  Eigen::Index T() const { return h.rows(); }
};

/// a1 z + a2 (z o z - 1), elementwise.
Vector leverage(const Vector& z, const Vector& a1, const Vector& a2);

Vector next_log_h(const ModelParams& params, const Vector& log_h, const Vector& z, const Vector& log_x);
Vector next_zeta(const ModelParams& params, const Vector& zeta, const Vector& y_check);

/// Runs both recursions over t = 1..T. Throws NumericalError carrying the
/// offending (0-based) time index on non-finite state.
StateSeries filter(const ModelParams& params, const Dataset& data, const InitialState& init);

struct OneStepForecast {
  Vector h;
  Vector zeta;
  Matrix corr;
  Matrix H;
};

/// H = Lambda_h^{1/2} C Lambda_h^{1/2}.
Matrix covariance_from(const Vector& h, const Matrix& corr);

/// Applies the recursions once past the last filtered period.
OneStepForecast one_step_forecast(const ModelParams& params, const StateSeries& states,
                                  const Dataset& data);

}  // namespace mrg
