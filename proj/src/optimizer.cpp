#include "mrgarch/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace mrg {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

struct Counted {
  const std::function<double(const Vector&)>& f;
  long calls = 0;
  double operator()(const Vector& x) {
    ++calls;
    const double v = f(x);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  }
};

Vector fd_gradient(Counted& f, const Vector& x, double fx, double rel_step) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    if (std::isfinite(fp) && fp > -1e11) {
      g(i) = (fp - fx) / h;
    } else {
      xp(i) = x(i) - h;
      const double fm = f(xp);
      g(i) = (std::isfinite(fm) && fm > -1e11) ? (fx - fm) / h : 0.0;
    }
    xp(i) = x(i);
  }
  return g;
}

}  // namespace

OptimizerResult maximize_bfgs(const std::function<double(const Vector&)>& objective, const Vector& x0,
                              const OptimizerOptions& opts) {
  Counted f{objective};
  const Eigen::Index n = x0.size();
  OptimizerResult res;
  Vector x = x0;
  double fx = f(x);
  res.trace.push_back(fx);
  if (n == 0) {
    res.x = x;
    res.value = fx;
    res.termination = "no free parameters";
    res.evaluations = f.calls;
    return res;
  }

  Vector g = fd_gradient(f, x, fx, opts.fd_step);
  // Inverse Hessian of -f; starts as a scaled identity chosen on the first step.
  Matrix H = Matrix::Identity(n, n);
  bool scaled = false;
  std::deque<double> recent;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter + 1;
    const double gmax = g.cwiseAbs().maxCoeff();
    if (gmax == 0.0) {
      res.termination = "zero gradient";
      break;
    }
    if (!scaled) H = Matrix::Identity(n, n) * (opts.max_initial_move / gmax);

    Vector dir = H * g;
    double slope = g.dot(dir);
    if (!(slope > 0.0)) {
      H = Matrix::Identity(n, n) * (opts.max_initial_move / gmax);
      scaled = false;
      dir = H * g;
      slope = g.dot(dir);
    }

    double alpha = 1.0;
    double f_new = -std::numeric_limits<double>::infinity();
    Vector x_new;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = x + alpha * dir;
      f_new = f(x_new);
      if (f_new >= fx + kArmijo * alpha * slope && f_new > fx) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (scaled) {
        // Retry once from a fresh scaled identity before giving up.
        scaled = false;
        continue;
      }
      res.termination = "line search failed";
      break;
    }

    const Vector s = x_new - x;
    const Vector g_new = fd_gradient(f, x_new, f_new, opts.fd_step);
    const Vector yv = g - g_new;  // gradient change of -f
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (!scaled) {
        H = Matrix::Identity(n, n) * (sy / yv.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector Hy = H * yv;
      H += rho * ((1.0 + rho * yv.dot(Hy)) * (s * s.transpose()) - (Hy * s.transpose() + s * Hy.transpose()));
    }

    const double improvement = f_new - fx;
    x = x_new;
    fx = f_new;
    g = g_new;
    res.trace.push_back(fx);

    recent.push_back(improvement);
    if (static_cast<int>(recent.size()) > opts.f_tolerance_window) recent.pop_front();
    if (s.cwiseAbs().maxCoeff() < opts.x_tolerance) {
      res.termination = "step tolerance";
      break;
    }
    if (static_cast<int>(recent.size()) == opts.f_tolerance_window &&
        std::accumulate(recent.begin(), recent.end(), 0.0) < opts.f_tolerance * std::max(1.0, std::abs(fx))) {
      res.termination = "function tolerance";
      break;
    }
    if (iter + 1 == opts.max_iterations) res.termination = "max iterations";
  }
  if (res.termination.empty()) res.termination = "max iterations";

  res.x = x;
  res.value = fx;
  res.gradient_norm = g.cwiseAbs().maxCoeff();
  res.evaluations = f.calls;
  return res;
}

}  // namespace mrg
