#include <gtest/gtest.h>

#include <cmath>

#include "mrgarch/errors.hpp"
#include "mrgarch/model.hpp"
#include "mrgarch/simulator.hpp"
#include "test_util.hpp"

namespace mrg {
namespace {

// p = 2, one correlation, three periods of hand-set data.
struct TinyCase {
  ModelParams q;
  Dataset data;
  InitialState init;
};

TinyCase tiny_case() {
  TinyCase c;
  c.q = ModelParams::zeros(ModelSpec::equi(2, Dynamics::kDynamic));
  c.q.mu << 0.05, -0.02;
  c.q.omega << 0.1, 0.05;
  c.q.beta << 0.6, 0.7;
  c.q.gamma << 0.3, 0.25;
  c.q.tau1 << -0.03, -0.01;
  c.q.tau2 << 0.02, 0.04;
  c.q.xi << -0.2, -0.1;
  c.q.phi << 1.0, 0.9;
  c.q.delta1 << -0.05, 0.02;
  c.q.delta2 << 0.05, 0.03;
  c.q.corr_omega << 0.05;
  c.q.corr_beta << 0.7;
  c.q.corr_gamma << 0.2;
  c.q.meas_xi << 0.01;
  c.q.meas_phi << 0.95;
  c.data.returns.resize(3, 2);
  c.data.returns << 0.5, -1.2, 1.5, 0.3, -0.7, 0.9;
  c.data.log_x.resize(3, 2);
  c.data.log_x << 0.1, -0.3, 0.4, 0.2, -0.5, 0.0;
  c.data.y.resize(3, 1);
  c.data.y << 0.3, 0.5, 0.2;
  c.init.h1 = Vector(2);
  c.init.h1 << 1.2, 0.8;
  c.init.zeta1 = Vector::Constant(1, 0.25);
  return c;
}

TEST(Leverage, Identities) {
  const Vector a1 = Vector::LinSpaced(3, -0.1, 0.1);
  const Vector a2 = Vector::LinSpaced(3, 0.02, 0.06);
  EXPECT_EQ(leverage(Vector::Zero(3), a1, a2), Vector(-a2));
  EXPECT_TRUE(leverage(Vector::Constant(3, 1.7), Vector::Zero(3), Vector::Zero(3)).isZero(0.0));
  EXPECT_EQ(leverage(Vector::Ones(3), a1, a2), a1);
}

TEST(ModelSpec, DimensionsAndParsing) {
  const ModelSpec s = ModelSpec::parse("dynamic-block", BlockPartition({2, 3}));
  EXPECT_EQ(s.p(), 5);
  EXPECT_EQ(s.d(), 10);
  EXPECT_EQ(s.k(), 3);
  EXPECT_EQ(s.m(), 3);
  EXPECT_EQ(ModelSpec::parse("static-free", BlockPartition({4})).k(), 6);
  EXPECT_EQ(ModelSpec::parse("static-free", BlockPartition({4})).m(), 0);
  EXPECT_EQ(ModelSpec::equi(4, Dynamics::kDynamic).k(), 1);
  EXPECT_THROW(ModelSpec::parse("dynamic-blob", BlockPartition({2})), ArgumentError);
  EXPECT_THROW(ModelSpec::parse("nonsense", BlockPartition({2})), ArgumentError);
  const ModelSpec full(Structure::kBlock, Dynamics::kDynamic, BlockPartition({2, 3}), MeasurementMode::kFull);
  EXPECT_EQ(full.m(), 10);
}

TEST(Filter, MatchesHandRecursion) {
  const TinyCase c = tiny_case();
  const StateSeries s = filter(c.q, c.data, c.init);

  // Oracle: the recursions written out with scalars.
  double lh[3][2], z[3][2], zeta[3];
  lh[0][0] = std::log(1.2);
  lh[0][1] = std::log(0.8);
  zeta[0] = 0.25;
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 2; ++i) {
      if (t > 0) {
        const double zp = z[t - 1][i];
        lh[t][i] = c.q.omega(i) + c.q.beta(i) * lh[t - 1][i] + c.q.tau1(i) * zp +
                   c.q.tau2(i) * (zp * zp - 1) + c.q.gamma(i) * c.data.log_x(t - 1, i);
      }
      z[t][i] = (c.data.returns(t, i) - c.q.mu(i)) / std::sqrt(std::exp(lh[t][i]));
    }
    if (t > 0) zeta[t] = 0.05 + 0.7 * zeta[t - 1] + 0.2 * c.data.y(t - 1, 0);
  }
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(s.h(t, i), std::exp(lh[t][i]), 1e-12);
      EXPECT_NEAR(s.z(t, i), z[t][i], 1e-12);
      const double v = c.data.log_x(t, i) - c.q.xi(i) - c.q.phi(i) * lh[t][i] - c.q.delta1(i) * z[t][i] -
                       c.q.delta2(i) * (z[t][i] * z[t][i] - 1);
      EXPECT_NEAR(s.u(t, i), v, 1e-12);
    }
    EXPECT_NEAR(s.zeta(t, 0), zeta[t], 1e-12);
    EXPECT_NEAR(s.corr[t](0, 1), std::tanh(zeta[t]), 1e-12);
    EXPECT_NEAR(s.u(t, 2), c.data.y(t, 0) - 0.01 - 0.95 * zeta[t], 1e-12);
  }
}

TEST(Filter, DegenerateRecursions) {
  TinyCase c = tiny_case();
  c.q.beta.setZero();
  c.q.gamma.setZero();
  c.q.tau1.setZero();
  c.q.tau2.setZero();
  c.q.corr_beta.setZero();
  c.q.corr_gamma.setZero();
  const StateSeries s = filter(c.q, c.data, c.init);
  for (int t = 1; t < 3; ++t) {
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::log(s.h(t, i)), c.q.omega(i), 1e-15);
    EXPECT_EQ(s.zeta(t, 0), c.q.corr_omega(0));
  }

  ModelParams st = ModelParams::zeros(ModelSpec::equi(2, Dynamics::kStatic));
  st.mu = c.q.mu;
  st.omega = c.q.omega;
  st.beta = tiny_case().q.beta;
  st.gamma = tiny_case().q.gamma;
  st.phi.setOnes();
  st.corr_omega << 0.4;
  const StateSeries ss = filter(st, c.data, c.init);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(ss.zeta(t, 0), 0.4);
  EXPECT_EQ(ss.u.cols(), 2);
}

TEST(Filter, OverflowCarriesTimeIndex) {
  TinyCase c = tiny_case();
  c.q.omega << 500.0, 0.0;
  c.q.beta << 1.0, 0.5;
  try {
    filter(c.q, c.data, c.init);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.index(), 2);
  }
}

TEST(Filter, BlockPathAgreesWithDense) {
  const ModelSpec spec = ModelSpec::block(BlockPartition({2, 3}), Dynamics::kDynamic);
  SimConfig cfg;
  cfg.truth = default_truth(spec);
  cfg.T = 200;
  cfg.burn_in = 50;
  const Simulation sim = simulate_dataset(cfg);
  const StateSeries s = filter(cfg.truth, sim.data, default_initial_state(sim.data, spec));
  const ModelSpec dense = ModelSpec::unrestricted(5, Dynamics::kStatic);
  for (Eigen::Index t = 0; t < s.T(); t += 17) {
    const Matrix c = g_inverse(s.rho.row(t).transpose());
    EXPECT_LT((c - s.corr[t]).cwiseAbs().maxCoeff(), 1e-9);
    const CorrelationFactor df(c, dense);
    EXPECT_NEAR(s.factor[t]->log_det(), df.log_det(), 1e-9);
    const Vector z = s.z.row(t).transpose();
    EXPECT_NEAR(s.factor[t]->quadform(z), df.quadform(z), 1e-9);
  }
}

TEST(Filter, Deterministic) {
  const TinyCase c = tiny_case();
  const StateSeries a = filter(c.q, c.data, c.init);
  const StateSeries b = filter(c.q, c.data, c.init);
  EXPECT_EQ(a.h, b.h);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.zeta, b.zeta);
}

TEST(OneStepForecast, DegenerateParams) {
  TinyCase c = tiny_case();
  c.q.beta.setZero();
  c.q.gamma.setZero();
  c.q.tau1.setZero();
  c.q.tau2.setZero();
  c.q.corr_beta.setZero();
  c.q.corr_gamma.setZero();
  const StateSeries s = filter(c.q, c.data, c.init);
  const OneStepForecast f = one_step_forecast(c.q, s, c.data);
  const Vector h = c.q.omega.array().exp();
  const Matrix expected = covariance_from(h, g_inverse(c.q.spec.loading().expand(c.q.corr_omega)));
  EXPECT_LT((f.H - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(OneStepForecast, ReproducesNextFilteredState) {
  const TinyCase c = tiny_case();
  const StateSeries full = filter(c.q, c.data, c.init);
  const Dataset head = c.data.slice(0, 2);
  const StateSeries part = filter(c.q, head, c.init);
  const OneStepForecast f = one_step_forecast(c.q, part, head);
  EXPECT_LT((f.h - Vector(full.h.row(2).transpose())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(f.zeta(0), full.zeta(2, 0), 1e-12);
  EXPECT_LT((f.corr - full.corr[2]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OneStepForecast, SymmetricPdForRandomParams) {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int rep = 0; rep < 20; ++rep) {
    TinyCase c = tiny_case();
    c.q.corr_omega(0) = u(rng);
    c.q.omega = Vector::Constant(2, u(rng));
    const StateSeries s = filter(c.q, c.data, c.init);
    const Matrix H = one_step_forecast(c.q, s, c.data).H;
    EXPECT_EQ(H, H.transpose());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Matrix>(H).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(ModelParams, ValidateAndPersistence) {
  TinyCase c = tiny_case();
  EXPECT_NO_THROW(c.q.validate());
  EXPECT_NEAR(c.q.variance_persistence()(0), 0.9, 1e-15);
  EXPECT_NEAR(c.q.correlation_persistence()(0), 0.7 + 0.2 * 0.95, 1e-15);
  c.q.beta = Vector::Zero(3);
  EXPECT_THROW(c.q.validate(), DimensionError);
  ModelParams st = ModelParams::zeros(ModelSpec::equi(2, Dynamics::kStatic));
  st.corr_beta(0) = 0.5;
  EXPECT_THROW(st.validate(), Error);
}

TEST(InitialState, SampleAverages) {
  const TinyCase c = tiny_case();
  const InitialState init = default_initial_state(c.data, c.q.spec, 2);
  EXPECT_NEAR(init.h1(0), 0.5 * (std::exp(0.1) + std::exp(0.4)), 1e-15);
  EXPECT_NEAR(init.zeta1(0), 0.4, 1e-15);
}

}  // namespace
}  // namespace mrg
