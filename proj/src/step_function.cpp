#include "grenkit/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grenkit {

StepFunction::StepFunction(std::vector<double> knots,
                           std::vector<double> values, double left_limit,
                           bool monotone)
    : knots_(std::move(knots)),
      values_(std::move(values)),
      left_limit_(left_limit),
      monotone_(monotone) {
  if (knots_.size() != values_.size()) {
    throw std::invalid_argument("knots and values must have equal length");
  }
  if (!std::isfinite(left_limit_)) {
    throw std::invalid_argument("non-finite input");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !std::isfinite(values_[i])) {
      throw std::invalid_argument("non-finite input");
    }
    if (i > 0 && knots_[i] <= knots_[i - 1]) {
      throw std::invalid_argument("knots must be strictly increasing");
    }
  }
  if (monotone_) {
    double prev = left_limit_;
    for (double v : values_) {
      if (v < prev) {
        throw std::invalid_argument("values must be non-decreasing");
      }
      prev = v;
    }
  }
}

double StepFunction::operator()(double x) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin()) return left_limit_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::value_before(double x) const {
  auto it = std::lower_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin()) return left_limit_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double generalized_inverse(const StepFunction& f, double y) {
  if (!f.monotone()) {
    throw std::logic_error("generalized inverse requires a monotone function");
  }
  if (f.empty() || y > f.max_value()) {
    throw std::invalid_argument("inverse out of range");
  }
  auto it = std::lower_bound(f.values().begin(), f.values().end(), y);
  return f.knots()[static_cast<std::size_t>(it - f.values().begin())];
}

}  // namespace grenkit
