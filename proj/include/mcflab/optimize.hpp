#pragma once

#include "mcflab/core.hpp"

#include <functional>

namespace mcflab::opt {

struct LocalMaxResult {
  Eigen::VectorXd x;
  double value = -kInf;
  int iterations = 0;
  bool converged = false;
};

struct LocalMaxOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-13;
};

// Dense BFGS ascent with Armijo backtracking.  Meant for very small problem
// dimensions (the entropy search uses 3 or 4 unknowns).
inline LocalMaxResult maximize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& value_and_grad,
    const Eigen::VectorXd& start, const LocalMaxOptions& options = {}) {
  const int n = static_cast<int>(start.size());
  LocalMaxResult res;
  res.x = start;
  Eigen::VectorXd g(n);
  res.value = value_and_grad(res.x, &g);
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (g.norm() < options.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd dir = Hinv * g;
    if (dir.dot(g) <= 0) dir = g;  // reset on loss of ascent direction
    double step = 1.0;
    double new_value = -kInf;
    Eigen::VectorXd xn, gn(n);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      xn = res.x + step * dir;
      new_value = value_and_grad(xn, &gn);
      if (new_value >= res.value + 1e-4 * step * g.dot(dir)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || !(new_value > -kInf)) break;
    const Eigen::VectorXd s = xn - res.x;
    const Eigen::VectorXd y = gn - g;  // gradient of f, ascent: use -y for standard BFGS on -f
    if (s.norm() < options.step_tolerance * (1.0 + res.x.norm())) {
      res.x = xn;
      res.value = new_value;
      g = gn;
      res.converged = true;
      break;
    }
    // BFGS update for the maximization problem: treat (s, -y) as the
    // minimization pair of -f.
    const double sy = -s.dot(y);
    if (sy > 1e-18) {
      const Eigen::VectorXd hy = Hinv * (-y);
      const double yhy = (-y).dot(hy);
      Hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    } else {
      Hinv = Eigen::MatrixXd::Identity(n, n);
    }
    res.x = xn;
    res.value = new_value;
    g = gn;
  }
  return res;
}

}  // namespace mcflab::opt
