#include <gtest/gtest.h>

#include <cmath>

#include "mrgarch/optimizer.hpp"

namespace mrg {
namespace {

TEST(Bfgs, ConcaveQuadratic) {
  Matrix a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Vector b = (Vector(3) << 1, -2, 0.5).finished();
  const auto f = [&](const Vector& x) { return -0.5 * x.dot(a * x) + b.dot(x); };
  OptimizerOptions opts;
  opts.max_initial_move = 1.0;
  const OptimizerResult r = maximize_bfgs(f, Vector::Zero(3), opts);
  const Vector x_star = a.ldlt().solve(b);
  EXPECT_LT((r.x - x_star).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_NEAR(r.value, f(x_star), 1e-8);
}

TEST(Bfgs, Rosenbrock) {
  const auto f = [](const Vector& x) {
    return -(std::pow(1 - x(0), 2) + 100 * std::pow(x(1) - x(0) * x(0), 2));
  };
  OptimizerOptions opts;
  opts.max_iterations = 2000;
  opts.max_initial_move = 0.1;
  const OptimizerResult r = maximize_bfgs(f, (Vector(2) << -1.2, 1.0).finished(), opts);
  EXPECT_NEAR(r.x(0), 1.0, 1e-3);
  EXPECT_NEAR(r.x(1), 1.0, 2e-3);
}

TEST(Bfgs, TraceIsMonotoneAndStartsAtX0) {
  const auto f = [](const Vector& x) { return -std::cosh(x(0) - 1) - std::pow(x(1) + 0.5, 4) - x(2) * x(2); };
  const Vector x0 = (Vector(3) << 3, 2, -1).finished();
  const OptimizerResult r = maximize_bfgs(f, x0);
  ASSERT_FALSE(r.trace.empty());
  EXPECT_EQ(r.trace.front(), f(x0));
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1]);
  EXPECT_EQ(r.trace.back(), r.value);
  EXPECT_FALSE(r.termination.empty());
  EXPECT_GT(r.evaluations, r.iterations);
}

TEST(Bfgs, BacksOffFromPenaltyRegion) {
  // Defined only for x < 1; the maximizer sits near the boundary.
  const auto f = [](const Vector& x) { return x(0) < 1.0 ? x(0) + std::log(1.0 - x(0)) * 0.1 : -1e12; };
  OptimizerOptions opts;
  opts.max_initial_move = 0.5;
  const OptimizerResult r = maximize_bfgs(f, Vector::Zero(1), opts);
  EXPECT_LT(r.x(0), 1.0);
  EXPECT_NEAR(r.x(0), 0.9, 1e-3);
}

TEST(Bfgs, IterationLimit) {
  const auto f = [](const Vector& x) { return -(std::pow(1 - x(0), 2) + 100 * std::pow(x(1) - x(0) * x(0), 2)); };
  OptimizerOptions opts;
  opts.max_iterations = 3;
  const OptimizerResult r = maximize_bfgs(f, (Vector(2) << -1.2, 1.0).finished(), opts);
  EXPECT_LE(r.iterations, 3);
}

}  // namespace
}  // namespace mrg
