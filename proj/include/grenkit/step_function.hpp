#pragma once

#include <vector>

namespace grenkit {

// Right-continuous step function: f(x) = values[j] for the largest j with
// knots[j] <= x, and f(x) = left_limit for x < knots[0]. Immutable after
// construction. With no knots the function is constant at left_limit.
class StepFunction {
 public:
  StepFunction(std::vector<double> knots, std::vector<double> values,
               double left_limit = 0.0, bool monotone = false);

  double operator()(double x) const;

  // Left-hand limit f(x-): value at the largest knot strictly below x.
  double value_before(double x) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double left_limit() const { return left_limit_; }
  bool monotone() const { return monotone_; }
  double max_value() const {
    return values_.empty() ? left_limit_ : values_.back();
  }
  bool empty() const { return knots_.empty(); }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double left_limit_;
  bool monotone_;
};

// inf{x : f(x) >= y}; for a step function, the smallest knot whose value is
// at least y. Requires the monotone flag. Throws "inverse out of range" if
// y exceeds the maximum value.
double generalized_inverse(const StepFunction& f, double y);

}  // namespace grenkit
