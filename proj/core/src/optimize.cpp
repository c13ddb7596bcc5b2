#include "optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace labornet::detail {

namespace {

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

// A variable is pinned when it sits on a bound and the descent direction
// points outside the box.
Eigen::Array<bool, Eigen::Dynamic, 1> pinned(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                                             const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  Eigen::Array<bool, Eigen::Dynamic, 1> out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    out(k) = (x(k) <= lower(k) && grad(k) > 0.0) || (x(k) >= upper(k) && grad(k) < 0.0);
  }
  return out;
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const Eigen::VectorXd& grad, const std::deque<Pair>& memory,
                         const Eigen::Array<bool, Eigen::Dynamic, 1>& fixed) {
  Eigen::VectorXd q = grad;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    if (fixed(k)) q(k) = 0.0;
  }
  std::vector<double> alpha(memory.size());
  for (std::size_t m = memory.size(); m-- > 0;) {
    alpha[m] = memory[m].rho * memory[m].s.dot(q);
    q -= alpha[m] * memory[m].y;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      if (fixed(k)) q(k) = 0.0;
    }
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t m = 0; m < memory.size(); ++m) {
    const double beta = memory[m].rho * memory[m].y.dot(q);
    q += (alpha[m] - beta) * memory[m].s;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      if (fixed(k)) q(k) = 0.0;
    }
  }
  return -q;
}

}  // namespace

double projected_gradient_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
  if (x.size() == 0) return 0.0;
  return (x - clamp(x - grad, lower, upper)).cwiseAbs().maxCoeff();
}

LbfgsResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const LbfgsOptions& options) {
  LbfgsResult result;
  Eigen::VectorXd x = clamp(x0, lower, upper);
  Eigen::VectorXd grad(x.size());
  double value = f(x, grad);
  std::deque<Pair> memory;
  bool steepest_retry = false;

  std::uint32_t iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const double pg = projected_gradient_norm(x, grad, lower, upper);
    if (!std::isfinite(value) || pg < options.grad_tol) break;

    const auto fixed = pinned(x, grad, lower, upper);
    Eigen::VectorXd direction = two_loop(grad, memory, fixed);
    if (memory.empty() || !(direction.dot(grad) < 0.0)) {
      direction = -grad;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (fixed(k)) direction(k) = 0.0;
      }
      if (memory.empty()) {
        const double norm = direction.cwiseAbs().maxCoeff();
        if (norm > 1.0) direction /= norm;
      }
    }

    // Armijo backtracking along the projected path. Near the optimum the
    // decrease drops below the resolution of f, so a step is also accepted
    // when f is flat to noise level and the slope along the step has not
    // turned strongly positive (approximate Wolfe).
    const double noise = options.flat_tol * std::abs(value);
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    Eigen::VectorXd grad_new(x.size());
    double value_new = value;
    for (int b = 0; b < options.max_backtracks; ++b) {
      x_new = clamp(x + step * direction, lower, upper);
      const Eigen::VectorXd delta = x_new - x;
      if (delta.cwiseAbs().maxCoeff() == 0.0) break;
      value_new = f(x_new, grad_new);
      if (!std::isfinite(value_new)) {
        step *= 0.5;
        continue;
      }
      const double slope = grad.dot(delta);
      if (value_new <= value + options.armijo * slope ||
          (value_new <= value + noise && grad_new.dot(delta) <= -0.8 * slope)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }

    if (!accepted) {
      if (memory.empty() || steepest_retry) break;
      memory.clear();
      steepest_retry = true;
      continue;
    }
    steepest_retry = false;

    Pair pair{x_new - x, grad_new - grad, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.y.squaredNorm() && sy > 0.0) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    x = std::move(x_new);
    grad = grad_new;
    value = value_new;
  }

  result.x = x;
  result.value = value;
  result.projected_grad_norm = projected_gradient_norm(x, grad, lower, upper);
  result.iterations = iter;
  result.converged = std::isfinite(value) && result.projected_grad_norm < options.grad_tol;
  return result;
}

}  // namespace labornet::detail
