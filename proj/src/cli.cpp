#include "mrgarch/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <tuple>

#include "mrgarch/data_io.hpp"
#include "mrgarch/errors.hpp"
#include "mrgarch/serialize.hpp"
#include "mrgarch/simulator.hpp"

namespace mrg::cli {

namespace {

namespace fs = std::filesystem;

enum class Kind { kString, kInt, kUInt, kBool, kIntList, kStringList };

struct Setting {
  const char* flag;
  const char* key;
  Kind kind;
  const char* help;
};

// Flags that override keys of the JSON config file.
const Setting kSettings[] = {
    {"--returns", "returns", Kind::kString, "returns CSV (date,<assets>)"},
    {"--realized", "realized", Kind::kString, "realized covariance CSV (date,row_asset,col_asset,value)"},
    {"--out", "output", Kind::kString, "output directory"},
    {"--spec", "spec", Kind::kString, "model spec, <static|dynamic>-<equi|block|free>"},
    {"--partition", "partition", Kind::kIntList, "block sizes, e.g. 2,1"},
    {"--measurement", "measurement", Kind::kString, "correlation measurement: condensed or full"},
    {"--seed", "seed", Kind::kUInt, "RNG seed"},
    {"--split", "split", Kind::kString, "first out-of-sample date"},
    {"--repair-nonpd", "repair_nonpd", Kind::kBool, "repair non-PD realized measures"},
    {"--two-stage", "two_stage", Kind::kBool, "two-stage estimation"},
    {"--init-mode", "init_mode", Kind::kString, "initial states: sample-average or estimated"},
    {"--multistart", "multistart", Kind::kInt, "number of optimizer starts"},
    {"--max-iterations", "max_iterations", Kind::kInt, "optimizer iteration cap per start"},
    {"--fit", "fit", Kind::kString, "fit JSON written by estimate"},
    {"--horizon", "horizon", Kind::kInt, "forecast horizon"},
    {"--draws", "draws", Kind::kInt, "forecast draws"},
    {"--mode", "forecast_mode", Kind::kString, "forecast mode: gaussian or bootstrap"},
    {"--models", "models", Kind::kStringList, "backtest model specs, the first is the baseline"},
    {"--T", "T", Kind::kInt, "simulated sample length"},
    {"--burn-in", "burn_in", Kind::kInt, "simulation burn-in"},
};

struct RunConfig {
  std::string returns = "returns.csv";
  std::string realized = "realized.csv";
  std::string output = ".";
  std::string spec = "dynamic-block";
  std::vector<int> partition;
  std::map<std::string, std::string> labels;
  MeasurementMode measurement = MeasurementMode::kCondensed;
  std::uint64_t seed = 1;
  std::string split;
  bool repair_nonpd = false;
  bool two_stage = false;
  InitMode init_mode = InitMode::kSampleAverage;
  int init_window = 50;
  int multistart = 3;
  int max_iterations = 500;
  std::string fit = "fit.json";
  int horizon = 5;
  int draws = 1000;
  ForecastMode forecast_mode = ForecastMode::kGaussian;
  std::vector<std::string> models{"static-equi", "dynamic-block"};
  Eigen::Index T = 2000;
  Eigen::Index burn_in = 500;
  std::string truth;  // optional params JSON for simulate
  std::string start_date = "2000-01-03";
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Json flag_value(Kind kind, const std::string& text) {
  try {
    switch (kind) {
      case Kind::kString: return text;
      case Kind::kInt: return std::stoi(text);
      case Kind::kUInt: return static_cast<std::uint64_t>(std::stoull(text));
      case Kind::kBool: return true;
      case Kind::kIntList: {
        Json arr = Json::array();
        for (const auto& s : split_list(text)) arr.push_back(std::stoi(s));
        return arr;
      }
      case Kind::kStringList: return split_list(text);
    }
  } catch (const std::exception&) {
  }
  throw ArgumentError("invalid value '" + text + "'");
}

template <typename T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ArgumentError(std::string("config key '") + key + "' has the wrong type");
  }
}

RunConfig make_config(const Json& j) {
  RunConfig c;
  c.returns = get(j, "returns", c.returns);
  c.realized = get(j, "realized", c.realized);
  c.output = get(j, "output", c.output);
  c.spec = get(j, "spec", c.spec);
  c.partition = get(j, "partition", c.partition);
  c.labels = get(j, "labels", c.labels);
  const auto meas = get<std::string>(j, "measurement", "condensed");
  if (meas == "full") c.measurement = MeasurementMode::kFull;
  else if (meas != "condensed") throw ArgumentError("measurement must be condensed or full");
  c.seed = get(j, "seed", c.seed);
  c.split = get(j, "split", c.split);
  c.repair_nonpd = get(j, "repair_nonpd", c.repair_nonpd);
  c.two_stage = get(j, "two_stage", c.two_stage);
  const auto init = get<std::string>(j, "init_mode", "sample-average");
  if (init == "estimated") c.init_mode = InitMode::kEstimated;
  else if (init != "sample-average") throw ArgumentError("init_mode must be sample-average or estimated");
  c.init_window = get(j, "init_window", c.init_window);
  c.multistart = get(j, "multistart", c.multistart);
  c.max_iterations = get(j, "max_iterations", c.max_iterations);
  c.fit = get(j, "fit", c.fit);
  c.horizon = get(j, "horizon", c.horizon);
  c.draws = get(j, "draws", c.draws);
  const auto mode = get<std::string>(j, "forecast_mode", "gaussian");
  if (mode == "bootstrap") c.forecast_mode = ForecastMode::kBootstrap;
  else if (mode != "gaussian") throw ArgumentError("forecast_mode must be gaussian or bootstrap");
  c.models = get(j, "models", c.models);
  c.T = get(j, "T", c.T);
  c.burn_in = get(j, "burn_in", c.burn_in);
  c.truth = get(j, "truth", c.truth);
  c.start_date = get(j, "start_date", c.start_date);
  if (c.multistart < 1 || c.max_iterations < 1 || c.init_window < 1)
    throw ArgumentError("multistart, max_iterations and init_window must be positive");
  return c;
}

std::string out_path(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.output);
  return (fs::path(c.output) / name).string();
}

ModelSpec spec_for(const RunConfig& c, const std::string& name, int p) {
  const BlockPartition part = c.partition.empty() ? BlockPartition::single(p) : BlockPartition(c.partition);
  if (part.p() != p) throw ArgumentError("partition does not match the number of assets");
  const ModelSpec s = ModelSpec::parse(name, part);
  if (s.structure() == Structure::kEqui)
    return ModelSpec(Structure::kEqui, s.dynamics(), BlockPartition::single(p), c.measurement);
  return ModelSpec(s.structure(), s.dynamics(), part, c.measurement);
}

// Loads the data; group labels reorder the assets and define the partition.
Dataset load_data(RunConfig& c) {
  Dataset data = load_dataset(c.returns, c.realized, c.repair_nonpd ? NonPdPolicy::kRepair : NonPdPolicy::kReject);
  if (!c.labels.empty()) {
    const AssetGrouping g = group_assets(data.assets, c.labels);
    data = permute_assets(data, g.order);
    c.partition = g.partition.sizes();
  }
  return data;
}

EstimationSpec estimation_spec(const RunConfig& c, const ModelSpec& model) {
  EstimationSpec e;
  e.model = model;
  e.init_mode = c.init_mode;
  e.init_window = c.init_window;
  e.multistart = c.multistart;
  e.seed = c.seed;
  e.optimizer.max_iterations = c.max_iterations;
  return e;
}

FitResult fit_model(const RunConfig& c, const Dataset& data, const ModelSpec& model) {
  const EstimationSpec e = estimation_spec(c, model);
  return c.two_stage ? two_stage_estimate(data, e) : estimate(data, e);
}

Eigen::Index split_index(const RunConfig& c, const Dataset& data) {
  if (c.split.empty()) throw ArgumentError("backtest needs a split date");
  const auto it = std::lower_bound(data.dates.begin(), data.dates.end(), c.split);
  const auto idx = static_cast<Eigen::Index>(it - data.dates.begin());
  if (idx <= 0 || idx >= data.T()) throw ArgumentError("split date " + c.split + " is outside the sample");
  return idx;
}

int cmd_simulate(const RunConfig& c) {
  const int p = c.partition.empty() ? 3 : BlockPartition(c.partition).p();
  SimConfig sim;
  if (!c.truth.empty()) {
    sim.truth = params_from_json(read_json_file(c.truth));
  } else {
    sim.truth = default_truth(spec_for(c, c.spec, p));
  }
  sim.T = c.T;
  sim.burn_in = c.burn_in;
  sim.seed = c.seed;
  sim.start_date = c.start_date;
  const Simulation s = simulate_dataset(sim);

  write_returns(out_path(c, "returns.csv"), ReturnsTable{s.data.dates, s.data.assets, s.data.returns});
  write_realized(out_path(c, "realized.csv"), s.data.dates, s.data.assets, emit_realized_covariances(s.data));
  Json j;
  j["seed"] = c.seed;
  j["T"] = c.T;
  j["burn_in"] = c.burn_in;
  j["assets"] = s.data.assets;
  j["truth"] = to_json(sim.truth);
  write_text_file(out_path(c, "truth.json"), dump(j));
  return kExitOk;
}

int cmd_estimate(RunConfig c) {
  const Dataset data = load_data(c);
  const ModelSpec model = spec_for(c, c.spec, static_cast<int>(data.p()));
  const FitResult fit = fit_model(c, data, model);
  Json j = to_json(fit);
  j["assets"] = data.assets;
  j["seed"] = c.seed;
  write_text_file(out_path(c, "fit.json"), dump(j));
  return kExitOk;
}

// The fit's asset order must match the data after label grouping.
FitResult load_fit(const RunConfig& c, const Dataset& data) {
  const Json j = read_json_file(c.fit);
  FitResult fit = fit_from_json(j);
  if (j.contains("assets") && j.at("assets").get<std::vector<std::string>>() != data.assets)
    throw DataError("fit assets do not match the data columns");
  if (fit.params.spec.p() != data.p()) throw DataError("fit has the wrong number of assets");
  return fit;
}

int cmd_filter(RunConfig c) {
  const Dataset data = load_data(c);
  const FitResult fit = load_fit(c, data);
  const StateSeries states = filter(fit.params, data, fit.init);
  const LogLikReport rep = evaluate_loglik(fit.params, data, fit.init);

  std::string s = "date";
  for (const auto& a : data.assets) s += ",h_" + a;
  for (Eigen::Index j = 0; j < states.zeta.cols(); ++j) s += ",zeta_" + std::to_string(j + 1);
  for (const auto& a : data.assets) s += ",z_" + a;
  s += "\n";
  for (Eigen::Index t = 0; t < states.T(); ++t) {
    s += data.dates[t];
    for (Eigen::Index j = 0; j < states.h.cols(); ++j) s += "," + format_double(states.h(t, j));
    for (Eigen::Index j = 0; j < states.zeta.cols(); ++j) s += "," + format_double(states.zeta(t, j));
    for (Eigen::Index j = 0; j < states.z.cols(); ++j) s += "," + format_double(states.z(t, j));
    s += "\n";
  }
  write_text_file(out_path(c, "states.csv"), s);
  const OneStepForecast next = one_step_forecast(fit.params, states, data);
  Json j;
  j["loglik"] = to_json(rep);
  j["next_H"] = to_json(next.H);
  write_text_file(out_path(c, "filter.json"), dump(j));
  return kExitOk;
}

int cmd_forecast(RunConfig c) {
  const Dataset data = load_data(c);
  const FitResult fit = load_fit(c, data);
  const StateSeries states = filter(fit.params, data, fit.init);
  const ForecastDistribution fc =
      multi_step_forecast(fit.params, states, data, c.horizon, c.forecast_mode, c.draws, c.seed);
  Json j = to_json(fc);
  j["seed"] = c.seed;
  write_text_file(out_path(c, "forecast.json"), dump(j));
  return kExitOk;
}

int cmd_backtest(RunConfig c) {
  const Dataset data = load_data(c);
  const Eigen::Index split = split_index(c, data);
  const Dataset in_sample = data.slice(0, split);
  if (c.models.empty()) throw ArgumentError("backtest needs at least one model");
  std::vector<FitResult> fits;
  for (const auto& name : c.models)
    fits.push_back(fit_model(c, in_sample, spec_for(c, name, static_cast<int>(data.p()))));
  const BacktestReport rep = backtest(fits, c.models, data, split);

  Json j = to_json(rep);
  j["seed"] = c.seed;
  Json objectives = Json::array();
  for (const auto& f : fits) objectives.push_back(f.report.objective);
  j["in_sample_objective"] = std::move(objectives);
  write_text_file(out_path(c, "backtest.json"), dump(j));

  std::string s = "date";
  for (const auto& m : c.models) s += ",gmv_" + m;
  s += ",equal_weight\n";
  for (Eigen::Index t = 0; t < rep.equal_weight.returns.size(); ++t) {
    s += rep.dates[t];
    for (const auto& g : rep.gmv) s += "," + format_double(g.returns(t));
    s += "," + format_double(rep.equal_weight.returns(t)) + "\n";
  }
  write_text_file(out_path(c, "portfolio_returns.csv"), s);
  return kExitOk;
}

int cmd_qq(RunConfig c) {
  const Dataset data = load_data(c);
  const ModelSpec model = spec_for(c, c.spec, static_cast<int>(data.p()));
  const PreparedSignals sig = prepare_signals(data, model);
  std::string s = "component,theoretical,empirical\n";
  Json corr = Json::array();
  for (Eigen::Index j = 0; j < sig.y_check.cols(); ++j) {
    const QQPoints q = qq_points(sig.y_check.col(j));
    for (Eigen::Index i = 0; i < q.theoretical.size(); ++i)
      s += std::to_string(j + 1) + "," + format_double(q.theoretical(i)) + "," + format_double(q.empirical(i)) + "\n";
    corr.push_back(q.correlation);
  }
  write_text_file(out_path(c, "qq.csv"), s);
  Json j;
  j["spec"] = model.name();
  j["correlation"] = std::move(corr);
  write_text_file(out_path(c, "qq.json"), dump(j));
  return kExitOk;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kData:
    case ErrorCode::kArgument:
    case ErrorCode::kDimension: return kExitData;
    default: return kExitNumerical;
  }
}

}  // namespace

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Multivariate Realized GARCH toolkit", "mrgarch_cli"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::tuple<std::string, const Setting*, CLI::Option*>> registered;

  const char* commands[][2] = {{"simulate", "simulate a dataset from the model"},
                               {"estimate", "estimate a model by QMLE"},
                               {"filter", "filter states at fitted parameters"},
                               {"forecast", "multi-step covariance forecast"},
                               {"backtest", "fixed-scheme out-of-sample portfolio evaluation"},
                               {"qq", "Q-Q diagnostics of the realized correlation signal"}};
  std::vector<CLI::App*> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd[0], cmd[1]);
    sub->add_option("--config", config_path, "JSON config file");
    for (const Setting& s : kSettings) {
      CLI::Option* opt = s.kind == Kind::kBool ? sub->add_flag(s.flag, s.help)
                                               : sub->add_option(s.flag, values[std::string(cmd[0]) + s.key], s.help);
      registered.emplace_back(cmd[0], &s, opt);
    }
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitData;
  }

  try {
    std::string command;
    for (auto* sub : subs)
      if (sub->parsed()) command = sub->get_name();
    Json j = config_path.empty() ? Json::object() : read_json_file(config_path);
    if (!j.is_object()) throw ArgumentError("config file must hold a JSON object");
    for (const auto& [owner, s, opt] : registered) {
      if (owner != command || opt->count() == 0) continue;
      j[s->key] = flag_value(s->kind, s->kind == Kind::kBool ? "" : values[command + s->key]);
    }
    const RunConfig cfg = make_config(j);
    if (command == "simulate") return cmd_simulate(cfg);
    if (command == "estimate") return cmd_estimate(cfg);
    if (command == "filter") return cmd_filter(cfg);
    if (command == "forecast") return cmd_forecast(cfg);
    if (command == "backtest") return cmd_backtest(cfg);
    return cmd_qq(cfg);
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error[data_error]: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace mrg::cli
