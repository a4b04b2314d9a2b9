#include "grenkit/monotone_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grenkit {

DomainTransform DomainTransform::identity() {
  DomainTransform t;
  t.kind_ = Kind::Identity;
  return t;
}

DomainTransform DomainTransform::step(StepFunction f) {
  if (!f.monotone()) throw std::logic_error("transform must be monotone");
  DomainTransform t;
  t.kind_ = Kind::Step;
  t.step_.push_back(std::move(f));
  return t;
}

DomainTransform DomainTransform::piecewise_linear(std::vector<double> xs,
                                                  std::vector<double> vals,
                                                  double tail_slope) {
  if (xs.size() != vals.size() || xs.empty()) {
    throw std::invalid_argument("invalid piecewise-linear transform");
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] <= xs[i - 1] || vals[i] < vals[i - 1]) {
      throw std::invalid_argument("invalid piecewise-linear transform");
    }
  }
  if (tail_slope < 0.0) {
    throw std::invalid_argument("invalid piecewise-linear transform");
  }
  DomainTransform t;
  t.kind_ = Kind::PiecewiseLinear;
  t.xs_ = std::move(xs);
  t.vals_ = std::move(vals);
  t.tail_slope_ = tail_slope;
  return t;
}

double DomainTransform::operator()(double x) const {
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::Step:
      return step_.front()(x);
    case Kind::PiecewiseLinear: {
      if (x <= xs_.front()) return vals_.front();
      if (x >= xs_.back()) {
        return vals_.back() + tail_slope_ * (x - xs_.back());
      }
      auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
      std::size_t j = static_cast<std::size_t>(it - xs_.begin()) - 1;
      const double w = (x - xs_[j]) / (xs_[j + 1] - xs_[j]);
      return vals_[j] + w * (vals_[j + 1] - vals_[j]);
    }
  }
  throw std::logic_error("unreachable");
}

const StepFunction& DomainTransform::step_function() const {
  if (kind_ != Kind::Step) {
    throw std::logic_error("transform is not a step function");
  }
  return step_.front();
}

MonotoneEstimate::MonotoneEstimate(CusumDiagram diagram,
                                   DomainTransform transform, double domain_lo,
                                   double domain_hi, bool truncated)
    : diagram_(std::move(diagram)),
      minorant_(gcm(diagram_)),
      transform_(std::move(transform)),
      domain_lo_(domain_lo),
      domain_hi_(domain_hi),
      truncated_(truncated) {}

double MonotoneEstimate::operator()(double x) const {
  const double u = transform_(x);
  if (u <= 0.0) throw std::invalid_argument("evaluation at left boundary");
  return left_derivative(minorant_, u);
}

bool MonotoneEstimate::at_upper_boundary(double x) const {
  return transform_(x) >= diagram_.u_max();
}

}  // namespace grenkit
