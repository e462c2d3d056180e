#include "mrgarch/serialize.hpp"

#include <fstream>
#include <sstream>

#include "mrgarch/errors.hpp"

namespace mrg {

namespace {

const Json& at(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing JSON field '") + key + "'");
  return j.at(key);
}

Json series_json(const PortfolioSeries& s) {
  Json j;
  j["name"] = s.name;
  j["mean_squared"] = s.mean_squared;
  j["mean_abs_annual"] = s.mean_abs_annual;
  j["annual_vol"] = s.annual_vol;
  return j;
}

}  // namespace

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vector(m.row(r).transpose())));
  return j;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw DataError("expected a JSON array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError("expected a JSON array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw DataError("expected a JSON array of rows");
  if (j.empty()) return Matrix(0, 0);
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from_json(j[r]);
    if (row.size() != cols) throw DataError("ragged matrix in JSON");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Json to_json(const ModelSpec& spec) {
  Json j;
  j["name"] = spec.name();
  j["structure"] = to_string(spec.structure());
  j["dynamics"] = to_string(spec.dynamics());
  j["measurement"] = to_string(spec.measurement());
  j["partition"] = spec.partition().sizes();
  j["p"] = spec.p();
  j["k"] = spec.k();
  j["m"] = spec.m();
  return j;
}

ModelSpec spec_from_json(const Json& j) {
  const BlockPartition part(at(j, "partition").get<std::vector<int>>());
  ModelSpec base = ModelSpec::parse(at(j, "dynamics").get<std::string>() + "-" + at(j, "structure").get<std::string>(),
                                    part);
  MeasurementMode mode = MeasurementMode::kCondensed;
  if (j.contains("measurement")) {
    const auto s = j.at("measurement").get<std::string>();
    if (s == "full") mode = MeasurementMode::kFull;
    else if (s != "condensed") throw DataError("unknown measurement mode '" + s + "'");
  }
  return ModelSpec(base.structure(), base.dynamics(), part, mode);
}

Json to_json(const ModelParams& q) {
  Json j;
  j["spec"] = to_json(q.spec);
  j["mu"] = to_json(q.mu);
  j["omega"] = to_json(q.omega);
  j["beta"] = to_json(q.beta);
  j["gamma"] = to_json(q.gamma);
  j["tau1"] = to_json(q.tau1);
  j["tau2"] = to_json(q.tau2);
  j["xi"] = to_json(q.xi);
  j["phi"] = to_json(q.phi);
  j["delta1"] = to_json(q.delta1);
  j["delta2"] = to_json(q.delta2);
  j["corr_omega"] = to_json(q.corr_omega);
  j["corr_beta"] = to_json(q.corr_beta);
  j["corr_gamma"] = to_json(q.corr_gamma);
  j["meas_xi"] = to_json(q.meas_xi);
  j["meas_phi"] = to_json(q.meas_phi);
  j["sigma"] = to_json(q.sigma);
  j["variance_persistence"] = to_json(q.variance_persistence());
  j["correlation_persistence"] = to_json(q.correlation_persistence());
  return j;
}

ModelParams params_from_json(const Json& j) {
  ModelParams q = ModelParams::zeros(spec_from_json(at(j, "spec")));
  q.mu = vector_from_json(at(j, "mu"));
  q.omega = vector_from_json(at(j, "omega"));
  q.beta = vector_from_json(at(j, "beta"));
  q.gamma = vector_from_json(at(j, "gamma"));
  q.tau1 = vector_from_json(at(j, "tau1"));
  q.tau2 = vector_from_json(at(j, "tau2"));
  q.xi = vector_from_json(at(j, "xi"));
  q.phi = vector_from_json(at(j, "phi"));
  q.delta1 = vector_from_json(at(j, "delta1"));
  q.delta2 = vector_from_json(at(j, "delta2"));
  q.corr_omega = vector_from_json(at(j, "corr_omega"));
  q.corr_beta = vector_from_json(at(j, "corr_beta"));
  q.corr_gamma = vector_from_json(at(j, "corr_gamma"));
  q.meas_xi = vector_from_json(at(j, "meas_xi"));
  q.meas_phi = vector_from_json(at(j, "meas_phi"));
  if (j.contains("sigma")) q.sigma = matrix_from_json(j.at("sigma"));
  try {
    q.validate();
  } catch (const Error& e) {
    throw DataError(std::string("invalid parameters in JSON: ") + e.what());
  }
  return q;
}

Json to_json(const InitialState& init) {
  Json j;
  j["mode"] = init.mode == InitMode::kEstimated ? "estimated" : "sample-average";
  j["h1"] = to_json(init.h1);
  j["zeta1"] = to_json(init.zeta1);
  return j;
}

InitialState init_from_json(const Json& j) {
  InitialState init;
  init.h1 = vector_from_json(at(j, "h1"));
  init.zeta1 = vector_from_json(at(j, "zeta1"));
  init.mode = at(j, "mode").get<std::string>() == "estimated" ? InitMode::kEstimated : InitMode::kSampleAverage;
  return init;
}

Json to_json(const LogLikReport& r) {
  Json j;
  j["total"] = r.total;
  j["return_part"] = r.return_part;
  j["measurement_part"] = r.measurement_part;
  j["constant"] = r.constant;
  j["objective"] = r.objective;
  j["T"] = r.T;
  j["p"] = r.p;
  j["m"] = r.m;
  j["measurement_signature"] = r.measurement_signature;
  return j;
}

Json to_json(const FitDiagnostics& d) {
  Json j;
  j["iterations"] = d.iterations;
  j["evaluations"] = d.evaluations;
  j["gradient_norm"] = d.gradient_norm;
  j["termination"] = d.termination;
  j["initial_objective"] = d.initial_objective;
  j["best_start"] = d.best_start;
  j["start_values"] = d.start_values;
  j["trace"] = d.trace;
  return j;
}

Json to_json(const FitResult& fit) {
  Json j;
  j["method"] = fit.method;
  j["params"] = to_json(fit.params);
  j["init"] = to_json(fit.init);
  j["loglik"] = to_json(fit.report);
  j["diagnostics"] = to_json(fit.diagnostics);
  return j;
}

FitResult fit_from_json(const Json& j) {
  FitResult fit;
  fit.method = at(j, "method").get<std::string>();
  fit.params = params_from_json(at(j, "params"));
  fit.init = init_from_json(at(j, "init"));
  if (j.contains("loglik")) {
    const Json& r = j.at("loglik");
    fit.report.total = at(r, "total").get<double>();
    fit.report.return_part = at(r, "return_part").get<double>();
    fit.report.measurement_part = at(r, "measurement_part").get<double>();
    fit.report.constant = at(r, "constant").get<double>();
    fit.report.objective = at(r, "objective").get<double>();
    fit.report.T = at(r, "T").get<Eigen::Index>();
    fit.report.p = at(r, "p").get<int>();
    fit.report.m = at(r, "m").get<int>();
    fit.report.measurement_signature = at(r, "measurement_signature").get<std::string>();
  }
  return fit;
}

Json to_json(const BacktestReport& r) {
  Json j;
  j["split"] = r.split;
  j["out_of_sample_days"] = r.equal_weight.returns.size();
  if (!r.dates.empty()) {
    j["first_date"] = r.dates.front();
    j["last_date"] = r.dates.back();
  }
  j["annualization"] = "mean_abs_annual = mean|w'r| * sqrt(252); annual_vol = sqrt(252 * mean_squared)";
  Json models = Json::array();
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    Json m = series_json(r.gmv[i]);
    m["portfolio"] = "gmv";
    m["mean_predictive_loglik"] = r.mean_predictive_loglik[i];
    m["relative_predictive_loglik"] = r.relative_predictive_loglik[i];
    models.push_back(std::move(m));
  }
  j["baseline"] = r.models.front();
  j["models"] = std::move(models);
  j["equal_weight"] = series_json(r.equal_weight);
  Json years = Json::array();
  for (const auto& y : r.years) {
    Json yj;
    yj["year"] = y.year;
    yj["days"] = y.days;
    yj["gmv_mean_squared"] = y.gmv_mean_squared;
    yj["equal_weight_mean_squared"] = y.equal_weight_mean_squared;
    yj["mean_predictive_loglik"] = y.mean_predictive_loglik;
    years.push_back(std::move(yj));
  }
  j["years"] = std::move(years);
  return j;
}

Json to_json(const ForecastDistribution& fc) {
  Json j;
  j["horizon"] = fc.horizon;
  j["mode"] = to_string(fc.mode);
  j["draws"] = fc.draws.size();
  j["mean_H"] = to_json(fc.mean);
  j["quantile_levels"] = fc.levels;
  j["gmv_variance_quantiles"] = fc.gmv_variance;
  j["equal_weight_variance_quantiles"] = fc.equal_weight_variance;
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace mrg
