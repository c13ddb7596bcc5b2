#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace labornet::detail {

// Objective returning f(x) and writing its gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  double grad_tol = 1e-6;  // on the infinity norm of the projected gradient
  std::uint32_t max_iter = 5000;
  int memory = 10;
  double armijo = 1e-4;
  int max_backtracks = 60;
  double flat_tol = 1e-12;  // relative change in f treated as rounding
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double projected_grad_norm = 0.0;
  std::uint32_t iterations = 0;
  bool converged = false;
};

// Projected limited-memory BFGS minimization over lower <= x <= upper.
// Infinite bounds are allowed. Variables at an active bound are held fixed
// when computing the search direction.
LbfgsResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const LbfgsOptions& options = {});

// max_i |x_i - clamp(x_i - g_i)|.
double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

}  // namespace labornet::detail
