#include "mrgarch/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

constexpr double kStartBeta = 0.6;
constexpr double kStartGamma = 0.3;
constexpr double kStartDelta2 = 0.05;
constexpr double kStartCorrBeta = 0.7;
constexpr double kStartCorrGamma = 0.2;

bool has(const std::vector<ParamGroup>& groups, ParamGroup g) {
  return std::find(groups.begin(), groups.end(), g) != groups.end();
}

Vector jitter(const Vector& x, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = x(i) * (1.0 + 0.05 * n01(rng)) + 0.01 * n01(rng);
  return out;
}

struct StartOutcome {
  OptimizerResult opt;
  bool ok = false;
};

// Runs the optimizer from `spec.multistart` starting points around `x0`
// (the first is x0 itself) and returns the best. The objective must be
// deterministic for the result to be reproducible.
std::vector<StartOutcome> run_starts(const std::function<double(const Vector&)>& objective, const Vector& x0,
                                     const EstimationSpec& spec, std::uint64_t salt) {
  std::mt19937_64 rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
  std::vector<StartOutcome> outcomes;
  const int starts = std::max(1, spec.multistart);
  for (int s = 0; s < starts; ++s) {
    const Vector start = s == 0 ? x0 : jitter(x0, rng);
    StartOutcome o;
    if (objective(start) <= kObjectivePenalty) {
      o.opt.x = start;
      o.opt.value = kObjectivePenalty;
      o.opt.termination = "infeasible start";
    } else {
      o.opt = maximize_bfgs(objective, start, spec.optimizer);
      o.ok = o.opt.value > kObjectivePenalty;
    }
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

int best_of(const std::vector<StartOutcome>& outcomes) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(outcomes.size()); ++i)
    if (outcomes[i].ok && (best < 0 || outcomes[i].opt.value > outcomes[best].opt.value)) best = i;
  return best;
}

void check_sample_size(const Dataset& data, const ModelSpec& spec) {
  if (data.T() <= spec.p() + spec.m()) {
    std::ostringstream os;
    os << "sample of " << data.T() << " periods is too short for " << spec.p() + spec.m()
       << " measurement equations";
    throw RankError(os.str());
  }
}

FitDiagnostics diagnostics_from(const std::vector<StartOutcome>& outcomes, int best, double initial) {
  FitDiagnostics d;
  const auto& o = outcomes[best].opt;
  d.iterations = o.iterations;
  d.gradient_norm = o.gradient_norm;
  d.termination = o.termination;
  d.trace = o.trace;
  d.best_start = best;
  d.initial_objective = initial;
  for (const auto& s : outcomes) {
    d.evaluations += s.opt.evaluations;
    d.start_values.push_back(s.opt.value);
  }
  return d;
}

}  // namespace

ParamLayout::ParamLayout(const ModelSpec& spec, InitMode init_mode, std::vector<ParamGroup> groups) {
  const Eigen::Index p = spec.p();
  const Eigen::Index k = spec.k();
  const Eigen::Index m = spec.m();
  const bool dynamic = spec.dynamics() == Dynamics::kDynamic;
  const bool est_init = init_mode == InitMode::kEstimated;
  auto add = [this](Vector ModelParams::* field, int slot, Eigen::Index n) {
    if (n == 0) return;
    segments_.push_back(Segment{field, slot, n});
    size_ += n;
  };
  if (has(groups, ParamGroup::kVariance)) {
    for (auto field : {&ModelParams::mu, &ModelParams::omega, &ModelParams::beta, &ModelParams::gamma,
                       &ModelParams::tau1, &ModelParams::tau2, &ModelParams::xi, &ModelParams::phi,
                       &ModelParams::delta1, &ModelParams::delta2})
      add(field, 0, p);
    if (est_init) add(nullptr, 1, p);
  }
  if (has(groups, ParamGroup::kCorrelationMeasurement)) {
    add(&ModelParams::meas_xi, 0, m);
    add(&ModelParams::meas_phi, 0, m);
  }
  if (has(groups, ParamGroup::kCorrelationDynamics)) {
    add(&ModelParams::corr_omega, 0, k);
    if (dynamic) {
      add(&ModelParams::corr_beta, 0, k);
      add(&ModelParams::corr_gamma, 0, k);
      if (est_init) add(nullptr, 2, k);
    }
  }
}

Vector ParamLayout::pack(const ModelParams& params, const InitialState& init) const {
  Vector x(size_);
  Eigen::Index pos = 0;
  for (const auto& s : segments_) {
    if (s.field) x.segment(pos, s.size) = params.*(s.field);
    else if (s.init_slot == 1) x.segment(pos, s.size) = init.h1.array().log();
    else x.segment(pos, s.size) = init.zeta1;
    pos += s.size;
  }
  return x;
}

void ParamLayout::unpack(const Vector& x, ModelParams& params, InitialState& init) const {
  Eigen::Index pos = 0;
  for (const auto& s : segments_) {
    if (s.field) params.*(s.field) = x.segment(pos, s.size);
    else if (s.init_slot == 1) init.h1 = x.segment(pos, s.size).array().exp();
    else init.zeta1 = x.segment(pos, s.size);
    pos += s.size;
  }
}

ModelParams init_params(const Dataset& data, const ModelSpec& spec) {
  data.validate();
  if (data.p() != spec.p()) throw DataError("data and specification disagree on the number of assets");
  if (data.T() < 2) throw DataError("need at least two periods");
  const Eigen::Index p = spec.p();
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto col = data.returns.col(i);
    if (col.maxCoeff() == col.minCoeff()) {
      std::ostringstream os;
      os << "return column " << i + 1 << " has zero variance";
      throw DataError(os.str());
    }
  }

  ModelParams params = ModelParams::zeros(spec);
  params.mu = data.returns.colwise().mean().transpose();
  params.beta.setConstant(kStartBeta);
  params.gamma.setConstant(kStartGamma);
  params.omega = (1.0 - kStartBeta - kStartGamma) * data.log_x.colwise().mean().transpose();
  params.phi.setOnes();
  params.delta2.setConstant(kStartDelta2);

  const PreparedSignals signals = prepare_signals(data, spec);
  const Vector mean_y_check = signals.y_check.colwise().mean().transpose();
  params.meas_phi.setOnes();
  if (spec.dynamics() == Dynamics::kDynamic) {
    params.corr_beta.setConstant(kStartCorrBeta);
    params.corr_gamma.setConstant(kStartCorrGamma);
    params.corr_omega = (1.0 - kStartCorrBeta - kStartCorrGamma) * mean_y_check;
  } else {
    params.corr_omega = mean_y_check;
  }
  return params;
}

FitResult evaluate_fit(const Dataset& data, const ModelParams& params, const InitialState& init) {
  FitResult fit;
  fit.params = params;
  fit.init = init;
  fit.report = evaluate_loglik(params, data, init, &fit.params.sigma);
  return fit;
}

FitResult estimate(const Dataset& data, const EstimationSpec& spec) {
  const ModelSpec& model = spec.model;
  check_sample_size(data, model);
  ModelParams base = init_params(data, model);
  InitialState base_init = default_initial_state(data, model, spec.init_window);
  base_init.mode = spec.init_mode;

  const ParamLayout layout(model, spec.init_mode,
                           {ParamGroup::kVariance, ParamGroup::kCorrelationMeasurement,
                            ParamGroup::kCorrelationDynamics});
  ObjectiveEvaluator eval(data, model);
  auto objective = [&](const Vector& x) {
    ModelParams params = base;
    InitialState init = base_init;
    layout.unpack(x, params, init);
    return eval.penalized(params, init);
  };

  const Vector x0 = layout.pack(base, base_init);
  const double initial = objective(x0);
  const auto outcomes = run_starts(objective, x0, spec, 0);
  const int best = best_of(outcomes);
  if (best < 0) throw EstimationError("no starting point produced a finite objective");

  ModelParams params = base;
  InitialState init = base_init;
  layout.unpack(outcomes[best].opt.x, params, init);
  FitResult fit = evaluate_fit(data, params, init);
  fit.diagnostics = diagnostics_from(outcomes, best, initial);
  fit.method = "joint";
  return fit;
}

FitResult two_stage_estimate(const Dataset& data, const EstimationSpec& spec) {
  const ModelSpec& model = spec.model;
  check_sample_size(data, model);
  ModelParams joint = init_params(data, model);
  InitialState joint_init = default_initial_state(data, model, spec.init_window);
  joint_init.mode = spec.init_mode;

  FitDiagnostics diag;
  diag.initial_objective = ObjectiveEvaluator(data, model).penalized(joint, joint_init);

  // Stage 1: one univariate Realized GARCH per asset.
  const ModelSpec uni = ModelSpec::unrestricted(1, Dynamics::kStatic);
  const ParamLayout uni_layout(uni, spec.init_mode, {ParamGroup::kVariance});
  for (int i = 0; i < model.p(); ++i) {
    Dataset d1;
    d1.returns = data.returns.col(i);
    d1.log_x = data.log_x.col(i);
    d1.y = Matrix(data.T(), 0);
    ModelParams base = init_params(d1, uni);
    InitialState init1 = default_initial_state(d1, uni, spec.init_window);
    init1.mode = spec.init_mode;
    ObjectiveEvaluator eval(d1, uni);
    auto objective = [&](const Vector& x) {
      ModelParams params = base;
      InitialState init = init1;
      uni_layout.unpack(x, params, init);
      return eval.penalized(params, init);
    };
    const auto outcomes = run_starts(objective, uni_layout.pack(base, init1), spec, 1 + i);
    const int best = best_of(outcomes);
    if (best < 0) throw EstimationError("univariate stage failed for asset " + std::to_string(i + 1));
    uni_layout.unpack(outcomes[best].opt.x, base, init1);
    for (auto field : {&ModelParams::mu, &ModelParams::omega, &ModelParams::beta, &ModelParams::gamma,
                       &ModelParams::tau1, &ModelParams::tau2, &ModelParams::xi, &ModelParams::phi,
                       &ModelParams::delta1, &ModelParams::delta2})
      (joint.*field)(i) = (base.*field)(0);
    joint_init.h1(i) = init1.h1(0);
    diag.iterations += outcomes[best].opt.iterations;
    for (const auto& o : outcomes) diag.evaluations += o.opt.evaluations;
  }

  // Stage 2: correlation parameters with the variance paths held fixed.
  const ParamLayout corr_layout(model, spec.init_mode,
                                {ParamGroup::kCorrelationMeasurement, ParamGroup::kCorrelationDynamics});
  ObjectiveEvaluator eval(data, model);
  auto objective = [&](const Vector& x) {
    ModelParams params = joint;
    InitialState init = joint_init;
    corr_layout.unpack(x, params, init);
    return eval.penalized(params, init);
  };
  const auto outcomes = run_starts(objective, corr_layout.pack(joint, joint_init), spec, 0);
  const int best = best_of(outcomes);
  if (best < 0) throw EstimationError("correlation stage produced no finite objective");
  corr_layout.unpack(outcomes[best].opt.x, joint, joint_init);

  FitResult fit = evaluate_fit(data, joint, joint_init);
  FitDiagnostics stage2 = diagnostics_from(outcomes, best, diag.initial_objective);
  stage2.iterations += diag.iterations;
  stage2.evaluations += diag.evaluations;
  fit.diagnostics = std::move(stage2);
  fit.method = "two-stage";
  return fit;
}

}  // namespace mrg
