#include "bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hhnet::detail {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr int kMaxLineSearchEvals = 40;

struct Trial {
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
};

class LineSearch {
 public:
  LineSearch(const ValueAndGradient& fn, const Eigen::VectorXd& x0, double f0,
             const Eigen::VectorXd& g0, const Eigen::VectorXd& dir)
      : fn_(fn), x0_(x0), dir_(dir), f0_(f0), slope0_(g0.dot(dir)) {
    origin_.step = 0.0;
    origin_.value = f0;
    origin_.slope = slope0_;
    origin_.x = x0;
    origin_.grad = g0;
  }

  // Returns a step meeting the strong Wolfe conditions, or failing that the
  // best step with sufficient decrease.
  std::optional<Trial> run(double initial_step) {
    Trial prev = origin_;
    double step = initial_step;
    for (int i = 0; i < kMaxLineSearchEvals && evals_ < kMaxLineSearchEvals; ++i) {
      Trial cur = evaluate(step);
      if (!std::isfinite(cur.value) || cur.value > f0_ + kArmijo * step * slope0_ ||
          (i > 0 && cur.value >= prev.value))
        return zoom(prev, cur);
      if (std::abs(cur.slope) <= -kCurvature * slope0_) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      step *= 2.0;
    }
    return prev.step > 0.0 ? std::optional<Trial>(prev) : std::nullopt;
  }

 private:
  Trial evaluate(double step) {
    ++evals_;
    Trial t;
    t.step = step;
    t.x = x0_ + step * dir_;
    t.grad.resize(t.x.size());
    t.value = fn_(t.x, t.grad);
    t.slope = std::isfinite(t.value) ? t.grad.dot(dir_) : 0.0;
    return t;
  }

  static double interpolate(const Trial& lo, const Trial& hi) {
    const double a = std::min(lo.step, hi.step);
    const double b = std::max(lo.step, hi.step);
    const double width = b - a;
    double step = 0.5 * (a + b);
    if (std::isfinite(lo.value) && std::isfinite(hi.value)) {
      // Cubic through both endpoints' values and slopes.
      const double d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (lo.step - hi.step);
      const double disc = d1 * d1 - lo.slope * hi.slope;
      if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), hi.step - lo.step);
        const double cubic = hi.step - (hi.step - lo.step) * (hi.slope + d2 - d1) /
                                           (hi.slope - lo.slope + 2.0 * d2);
        if (std::isfinite(cubic) && cubic > a + 0.1 * width && cubic < b - 0.1 * width)
          step = cubic;
      }
    }
    return step;
  }

  std::optional<Trial> zoom(Trial lo, Trial hi) {
    while (evals_ < kMaxLineSearchEvals) {
      if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, lo.step)) break;
      Trial cur = evaluate(interpolate(lo, hi));
      if (!std::isfinite(cur.value) || cur.value > f0_ + kArmijo * cur.step * slope0_ ||
          cur.value >= lo.value) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -kCurvature * slope0_) return cur;
        if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    if (lo.step > 0.0 && lo.value < f0_) return lo;
    return std::nullopt;
  }

  const ValueAndGradient& fn_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  Trial origin_;
  int evals_ = 0;
};

}  // namespace

BfgsResult bfgs_minimize(const ValueAndGradient& fn, Eigen::VectorXd x0, const BfgsOptions& opts) {
  const auto n = x0.size();
  BfgsResult result;
  result.x = std::move(x0);
  Eigen::VectorXd g(n);
  result.value = fn(result.x, g);
  result.gradient_norm = std::isfinite(result.value) ? g.lpNorm<Eigen::Infinity>() : INFINITY;
  if (!std::isfinite(result.value) || !g.allFinite()) {
    result.stop = BfgsStop::non_finite;
    return result;
  }

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  for (result.iterations = 0; result.iterations < opts.max_iterations; ++result.iterations) {
    if (result.gradient_norm <= opts.gradient_tolerance) {
      result.stop = BfgsStop::gradient;
      return result;
    }
    Eigen::VectorXd dir = -inv_hessian * g;
    if (!(g.dot(dir) < 0.0)) {
      inv_hessian.setIdentity();
      scaled = false;
      dir = -g;
    }
    const double initial_step = scaled ? 1.0 : std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());

    auto trial = LineSearch(fn, result.x, result.value, g, dir).run(initial_step);
    if (!trial && scaled) {
      // Stale curvature; retry once along steepest descent.
      inv_hessian.setIdentity();
      scaled = false;
      dir = -g;
      trial = LineSearch(fn, result.x, result.value, g, dir)
                  .run(std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>()));
    }
    if (!trial) {
      result.stop = BfgsStop::line_search;
      return result;
    }

    const Eigen::VectorXd s = trial->x - result.x;
    const Eigen::VectorXd y = trial->grad - g;
    const double decrease = result.value - trial->value;
    result.x = std::move(trial->x);
    result.value = trial->value;
    g = std::move(trial->grad);
    result.gradient_norm = g.lpNorm<Eigen::Infinity>();

    if (result.gradient_norm <= opts.gradient_tolerance) {
      ++result.iterations;
      result.stop = BfgsStop::gradient;
      return result;
    }
    if (decrease <= opts.objective_tolerance * std::max(1.0, std::abs(result.value))) {
      ++result.iterations;
      result.stop = BfgsStop::objective_change;
      return result;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hessian *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      const double yhy = y.dot(hy);
      inv_hessian.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      inv_hessian.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
    }
  }
  result.stop = BfgsStop::max_iterations;
  return result;
}

}  // namespace hhnet::detail
