// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mrgarch/block_algebra.hpp"
#include "mrgarch/cli.hpp"
#include "mrgarch/corr_map.hpp"
#include "mrgarch/estimator.hpp"
#include "mrgarch/forecast_portfolio.hpp"
#include "mrgarch/simulator.hpp"

namespace {

using namespace mrg;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Criterion 1
constexpr double kGolden3Tol = 0.01;
constexpr double kGolden3MaxSeconds = 1e-3;
// Criterion 2
constexpr double kGolden6Tol = 0.005;
constexpr double kBlockSpreadTol = 1e-9;
// Criterion 3
constexpr int kRoundTripsPerP = 1000;
constexpr double kRoundTripTol = 1e-8;
constexpr double kRoundTripMaxSeconds = 30.0;
// Criterion 4
constexpr int kBlockCases = 500;
constexpr int kBlockMaxP = 30;
constexpr int kBlockMaxB = 5;
constexpr double kBlockRelTol = 1e-9;
// Criterion 6
constexpr double kTraceRelTol = 1e-8;
// Criterion 7
constexpr std::uint64_t kRecoverySeeds[] = {11, 23, 37, 41, 53, 67, 79, 83, 97, 101};
constexpr Eigen::Index kRecoveryT = 3000;
constexpr double kBetaTol = 0.1;
constexpr double kPersistenceTol = 0.05;
constexpr int kRecoveryRequired = 8;
constexpr double kRecoveryMaxSeconds = 600.0;
// Criteria 8 and 9
constexpr std::uint64_t kBacktestSeed = 2024;
constexpr Eigen::Index kBacktestT = 3000;
constexpr Eigen::Index kBacktestSplit = 2000;
constexpr int kOptimalityCases = 1000;
// Criterion 10
constexpr Eigen::Index kQQT = 4000;
constexpr double kQQMinCorrelation = 0.995;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix random_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n01(rng);
  return m;
}

Matrix random_correlation(Eigen::Index p, std::mt19937_64& rng) {
  const Matrix g = random_normal(p, p + 3, rng);
  const Matrix w = g * g.transpose();
  const Vector s = w.diagonal().array().rsqrt();
  Matrix c = s.asDiagonal() * w * s.asDiagonal();
  c = 0.5 * (c + c.transpose());
  c.diagonal().setOnes();
  return c;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Outcome golden_3x3() {
  Matrix c(3, 3);
  c << 1, 0.8, 0, 0.8, 1, 0.2, 0, 0.2, 1;
  const Vector want_v = (Vector(3) << 1.14, -0.13, 0.28).finished();
  const Vector want_d = (Vector(3) << -0.53, -0.57, -0.03).finished();

  double best = 1e9;
  Vector v;
  Matrix l, back;
  for (int rep = 0; rep < 20; ++rep) {
    const auto t0 = Clock::now();
    v = g_transform(c);
    l = sym_log(c);
    back = g_inverse(want_v);
    best = std::min(best, seconds_since(t0));
  }
  const double ev = (v - want_v).cwiseAbs().maxCoeff();
  const double ed = (l.diagonal() - want_d).cwiseAbs().maxCoeff();
  const double eb = (back - c).cwiseAbs().maxCoeff();
  const bool ok = ev <= kGolden3Tol && ed <= kGolden3Tol && eb <= kGolden3Tol && best < kGolden3MaxSeconds;
  return {ok, "vecl err " + fmt("%.4f", ev) + ", diag err " + fmt("%.4f", ed) + ", inverse err " +
                  fmt("%.4f", eb) + ", time " + fmt("%.1f us", best * 1e6)};
}

Outcome golden_6x6() {
  const BlockPartition part({3, 3});
  BlockCorrParams r{Matrix(2, 2)};
  r.rho << 0.4, 0.2, 0.2, 0.6;
  const Matrix c = dense_block_matrix(r, part);
  const Matrix l = sym_log(c);

  // Every entry of a block must carry the same value.
  double spread = 0.0;
  Matrix lo = Matrix::Constant(2, 2, 1e9), hi = Matrix::Constant(2, 2, -1e9);
  Vector dlo = Vector::Constant(2, 1e9), dhi = Vector::Constant(2, -1e9);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const int bi = i / 3, bj = j / 3;
      if (i == j) {
        dlo(bi) = std::min(dlo(bi), l(i, j));
        dhi(bi) = std::max(dhi(bi), l(i, j));
      } else {
        lo(bi, bj) = std::min(lo(bi, bj), l(i, j));
        hi(bi, bj) = std::max(hi(bi, bj), l(i, j));
      }
    }
  spread = std::max((hi - lo).maxCoeff(), (dhi - dlo).maxCoeff());
  const double err = std::max({std::abs(l(1, 0) - 0.349), std::abs(l(4, 3) - 0.553), std::abs(l(3, 0) - 0.104),
                               std::abs(l(0, 0) + 0.16), std::abs(l(5, 5) + 0.36)});
  return {err <= kGolden6Tol && spread < kBlockSpreadTol,
          "max golden err " + fmt("%.4f", err) + ", within-block spread " + fmt("%.2e", spread)};
}

Outcome round_trip() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int p = 2; p <= 15; ++p)
    for (int rep = 0; rep < kRoundTripsPerP; ++rep) {
      const Matrix c = random_correlation(p, rng);
      worst = std::max(worst, (g_inverse(g_transform(c)) - c).cwiseAbs().maxCoeff());
    }
  const double secs = seconds_since(t0);
  return {worst < kRoundTripTol && secs < kRoundTripMaxSeconds,
          "max err " + fmt("%.2e", worst) + " over 14000 matrices, " + fmt("%.1f s", secs)};
}

Outcome block_vs_dense() {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> nb(1, kBlockMaxB);
  std::uniform_real_distribution<double> within(-0.2, 0.9), between(-0.3, 0.4);
  double worst = 0.0;
  int done = 0, max_p = 0;
  while (done < kBlockCases) {
    const int b = nb(rng);
    std::uniform_int_distribution<int> size(1, kBlockMaxP / b);
    std::vector<int> sizes(b);
    for (int& s : sizes) s = size(rng);
    const BlockPartition part(sizes);
    BlockCorrParams r{Matrix::Zero(b, b)};
    for (int i = 0; i < b; ++i) {
      r.rho(i, i) = part.size(i) >= 2 ? within(rng) : 0.0;
      for (int j = 0; j < i; ++j) r.rho(i, j) = r.rho(j, i) = between(rng);
    }
    if (!is_valid(r, part).valid) continue;
    const Matrix c = dense_block_matrix(r, part);
    const Vector z = random_normal(part.p(), 1, rng);
    const double det_err = std::abs(block_det(r, part) / c.partialPivLu().determinant() - 1.0);
    const Matrix id = c * block_inverse(r, part).dense();
    const double inv_err = (id - Matrix::Identity(part.p(), part.p())).cwiseAbs().maxCoeff();
    const double q = z.dot(c.ldlt().solve(z));
    const double q_err = std::abs(block_quadform(z, r, part) / q - 1.0);
    worst = std::max({worst, det_err, inv_err, q_err});
    max_p = std::max(max_p, part.p());
    ++done;
  }
  return {worst < kBlockRelTol, "max rel err " + fmt("%.2e", worst) + " over 500 cases, largest p " +
                                    std::to_string(max_p)};
}

Outcome loading_golden() {
  const FactorLoading a = build_loading(BlockPartition({2, 3}));
  // Displayed layout (within 1, between, within 2); ours is (within 1, within 2, between).
  Matrix displayed(3, 10);
  displayed << 1, 0, 0, 0, 0, 0, 0, 0, 0, 0,  //
      0, 1, 1, 1, 1, 1, 1, 0, 0, 0,       //
      0, 0, 0, 0, 0, 0, 0, 1, 1, 1;
  const Matrix at = a.dense().transpose();
  Matrix reordered(3, 10);
  reordered << at.row(0), at.row(2), at.row(1);
  bool exact = true;
  std::mt19937_64 rng(5);
  for (const auto& sizes : std::vector<std::vector<int>>{{2, 3}, {4}, {3, 1, 2}, {5, 5, 5, 5}, {1, 1, 1}}) {
    const FactorLoading l = build_loading(BlockPartition(sizes));
    for (int rep = 0; rep < 100; ++rep) {
      const Vector zeta = random_normal(l.cols(), 1, rng);
      exact = exact && (l.condense(l.expand(zeta)).array() == zeta.array()).all();
    }
  }
  const bool layout = reordered == displayed;
  return {layout && exact, std::string("A' matches up to column order: ") + (layout ? "yes" : "no") +
                               ", condense(expand(zeta)) == zeta exactly: " + (exact ? "yes" : "no")};
}

Outcome trace_identity() {
  double worst = 0.0;
  std::uint64_t seed = 7;
  for (const auto& spec : {ModelSpec::block(BlockPartition({2, 1}), Dynamics::kDynamic),
                           ModelSpec::block(BlockPartition({2, 3}), Dynamics::kDynamic),
                           ModelSpec::equi(4, Dynamics::kStatic)}) {
    SimConfig cfg;
    cfg.truth = default_truth(spec);
    cfg.T = 500;
    cfg.seed = seed++;
    const Dataset d = simulate_dataset(cfg).data;
    const StateSeries s = filter(cfg.truth, d, default_initial_state(d, spec));
    const Matrix sigma = concentrate_sigma(s.u);
    const Eigen::LLT<Matrix> llt(sigma);
    double sum = 0.0;
    for (Eigen::Index t = 0; t < s.T(); ++t) {
      const Vector u = s.u.row(t).transpose();
      sum += u.dot(llt.solve(u));
    }
    const double target = static_cast<double>(s.T() * (spec.p() + spec.m()));
    worst = std::max(worst, std::abs(sum / target - 1.0));
  }
  return {worst < kTraceRelTol, "max rel err " + fmt("%.2e", worst) + " over 3 specs"};
}

// Runs jobs on all hardware threads; results land in index order.
template <typename R>
std::vector<R> parallel_map(std::size_t n, const std::function<R(std::size_t)>& job) {
  std::vector<R> out(n);
  std::atomic<std::size_t> next{0};
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), n));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) out[i] = job(i);
    });
  for (auto& t : pool) t.join();
  return out;
}

ModelSpec recovery_spec() { return ModelSpec::block(BlockPartition({2, 1}), Dynamics::kDynamic); }

Outcome parameter_recovery() {
  const ModelSpec spec = recovery_spec();
  const ModelParams truth = default_truth(spec);
  const auto t0 = Clock::now();
  struct Rep {
    bool ok = false;
    double beta_err = 0.0, pi_err = 0.0;
    std::string error;
  };
  const std::size_t n = std::size(kRecoverySeeds);
  const auto reps = parallel_map<Rep>(n, [&](std::size_t i) {
    Rep r;
    try {
      SimConfig cfg;
      cfg.truth = truth;
      cfg.T = kRecoveryT;
      cfg.seed = kRecoverySeeds[i];
      const Dataset d = simulate_dataset(cfg).data;
      EstimationSpec es;
      es.model = spec;
      es.multistart = 1;
      es.seed = kRecoverySeeds[i];
      const FitResult fit = estimate(d, es);
      r.beta_err = (fit.params.beta - truth.beta).cwiseAbs().maxCoeff();
      r.pi_err = (fit.params.variance_persistence() - truth.variance_persistence()).cwiseAbs().maxCoeff();
      r.ok = r.beta_err <= kBetaTol && r.pi_err <= kPersistenceTol;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  });
  const double secs = seconds_since(t0);
  int passed = 0;
  std::string per;
  for (std::size_t i = 0; i < n; ++i) {
    passed += reps[i].ok;
    std::printf("  seed %3llu: %s max|beta err| %.3f, max|pi err| %.3f%s%s\n",
                static_cast<unsigned long long>(kRecoverySeeds[i]), reps[i].ok ? "ok  " : "miss", reps[i].beta_err,
                reps[i].pi_err, reps[i].error.empty() ? "" : ", error: ", reps[i].error.c_str());
  }
  return {passed >= kRecoveryRequired && secs < kRecoveryMaxSeconds,
          std::to_string(passed) + "/10 replications within tolerance, " + fmt("%.0f s", secs)};
}

struct BacktestRun {
  BacktestReport report;
  std::string error;
};

BacktestRun synthetic_backtest() {
  BacktestRun out;
  try {
    const ModelSpec truth_spec = recovery_spec();
    SimConfig cfg;
    cfg.truth = default_truth(truth_spec);
    cfg.T = kBacktestT;
    cfg.seed = kBacktestSeed;
    const Dataset d = simulate_dataset(cfg).data;
    const Dataset in_sample = d.slice(0, kBacktestSplit);
    std::vector<FitResult> fits;
    for (const auto& spec : {ModelSpec::equi(3, Dynamics::kStatic), truth_spec}) {
      EstimationSpec es;
      es.model = spec;
      es.multistart = 1;
      es.seed = kBacktestSeed;
      fits.push_back(estimate(in_sample, es));
    }
    out.report = backtest(fits, {"static-equi", "dynamic-block"}, d, kBacktestSplit);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

Outcome spec_ranking(const BacktestRun& run) {
  if (!run.error.empty()) return {false, "backtest failed: " + run.error};
  const auto& m = run.report.mean_predictive_loglik;
  return {m[1] > m[0], "mean predictive loglik dynamic-block " + fmt("%.4f", m[1]) + " vs static-equi " +
                           fmt("%.4f", m[0])};
}

Outcome gmv_dominance(const BacktestRun& run) {
  if (!run.error.empty()) return {false, "backtest failed: " + run.error};
  std::mt19937_64 rng(9);
  int violations = 0;
  for (int rep = 0; rep < kOptimalityCases; ++rep) {
    const Eigen::Index p = 2 + rep % 9;
    const Matrix g = random_normal(p, p + 2, rng);
    const Matrix h = g * g.transpose() / static_cast<double>(p + 2) + 0.05 * Matrix::Identity(p, p);
    const Vector w = gmv_weights(h);
    const double best = w.dot(h * w);
    for (int k = 0; k < 10; ++k) {
      Vector v = random_normal(p, 1, rng);
      v.array() += (1.0 - v.sum()) / static_cast<double>(p);
      if (v.dot(h * v) < best * (1 - 1e-12)) ++violations;
    }
  }
  const double gmv = run.report.gmv[1].mean_squared, ew = run.report.equal_weight.mean_squared;
  return {gmv < ew && violations == 0, "GMV (dynamic-block) mean sq " + fmt("%.4f", gmv) + " vs equal-weight " +
                                           fmt("%.4f", ew) + ", optimality violations " +
                                           std::to_string(violations) + "/10000"};
}

Outcome gaussian_diagnostic() {
  const ModelSpec spec = recovery_spec();
  SimConfig cfg;
  cfg.truth = default_truth(spec);
  cfg.T = kQQT;
  cfg.seed = 4000;
  const Dataset d = simulate_dataset(cfg).data;
  const PreparedSignals s = prepare_signals(d, spec);
  double worst = 1.0;
  for (Eigen::Index j = 0; j < s.y_check.cols(); ++j)
    worst = std::min(worst, qq_points(s.y_check.col(j)).correlation);
  return {worst > kQQMinCorrelation, "min quantile-pair correlation " + fmt("%.5f", worst) + " over " +
                                         std::to_string(s.y_check.cols()) + " components"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "mrgarch_acceptance_cli";
  fs::remove_all(root);
  std::vector<std::string> failures;
  int files = 0;
  for (const char* run : {"a", "b"}) {
    const std::string dir = (root / run).string();
    const std::string r = dir + "/returns.csv", x = dir + "/realized.csv", f = dir + "/fit.json";
    const std::vector<std::vector<std::string>> commands{
        {"simulate", "--T", "400", "--burn-in", "100", "--seed", "17", "--partition", "2,1", "--out", dir},
        {"estimate", "--returns", r, "--realized", x, "--partition", "2,1", "--multistart", "2", "--max-iterations",
         "25", "--seed", "17", "--out", dir},
        {"filter", "--returns", r, "--realized", x, "--fit", f, "--out", dir},
        {"forecast", "--returns", r, "--realized", x, "--fit", f, "--horizon", "4", "--draws", "200", "--seed", "17",
         "--out", dir},
        {"forecast", "--returns", r, "--realized", x, "--fit", f, "--horizon", "4", "--draws", "200", "--seed", "17",
         "--mode", "bootstrap", "--out", dir + "/boot"},
        {"backtest", "--returns", r, "--realized", x, "--partition", "2,1", "--split", "2001-01-01", "--multistart",
         "1", "--max-iterations", "15", "--seed", "17", "--out", dir},
        {"qq", "--returns", r, "--realized", x, "--partition", "2,1", "--out", dir}};
    for (const auto& c : commands)
      if (cli::run(c) != cli::kExitOk) failures.push_back(c.front() + " exited non-zero");
  }
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    ++files;
    if (slurp(entry.path()) != slurp(root / "b" / rel)) failures.push_back(rel.string() + " differs");
  }
  std::string detail = std::to_string(files) + " payload files compared across 7 commands";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty() && files >= 12, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  BacktestRun bt;
  bool bt_done = false;
  auto shared_backtest = [&]() -> const BacktestRun& {
    if (!bt_done) {
      bt = synthetic_backtest();
      bt_done = true;
    }
    return bt;
  };
  const std::vector<Criterion> criteria{
      {1, "golden 3x3 transform", golden_3x3},
      {2, "golden 6x6 block log", golden_6x6},
      {3, "g round trip p=2..15", round_trip},
      {4, "block vs dense algebra", block_vs_dense},
      {5, "loading golden and condense/expand", loading_golden},
      {6, "trace identity", trace_identity},
      {7, "parameter recovery", parameter_recovery},
      {8, "spec ranking (predictive loglik)", [&] { return spec_ranking(shared_backtest()); }},
      {9, "GMV dominance and optimality", [&] { return gmv_dominance(shared_backtest()); }},
      {10, "Gaussian Q-Q diagnostic", gaussian_diagnostic},
      {11, "CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %2d: %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
