#pragma once

#include <utility>
#include <vector>

#include "grenkit/gcm.hpp"
#include "grenkit/step_function.hpp"

namespace grenkit {

// Domain transform Phi_n. Three shapes occur: the identity (density
// estimation), a step function (the empirical distribution in regression),
// and a continuous piecewise-linear map (the restricted-mean transform for
// hazards). Beyond the last breakpoint a piecewise-linear transform extends
// with tail_slope.
class DomainTransform {
 public:
  enum class Kind { Identity, Step, PiecewiseLinear };

  static DomainTransform identity();
  static DomainTransform step(StepFunction f);
  static DomainTransform piecewise_linear(std::vector<double> xs,
                                          std::vector<double> vals,
                                          double tail_slope);

  double operator()(double x) const;
  Kind kind() const { return kind_; }
  const StepFunction& step_function() const;

 private:
  DomainTransform() = default;
  Kind kind_ = Kind::Identity;
  std::vector<StepFunction> step_;  // holds one element in Step kind
  std::vector<double> xs_, vals_;
  double tail_slope_ = 0.0;
};

// A fitted monotone function: the left GCM slope of `diagram`, read off at
// transform(x). Evaluation is non-decreasing in x over [domain_lo,
// domain_hi].
class MonotoneEstimate {
 public:
  MonotoneEstimate(CusumDiagram diagram, DomainTransform transform,
                   double domain_lo, double domain_hi, bool truncated = false);

  double operator()(double x) const;

  // True when transform(x) hits the right endpoint of the isotonization
  // interval, where Grenander-type estimators are unreliable.
  bool at_upper_boundary(double x) const;

  const CusumDiagram& diagram() const { return diagram_; }
  const ConvexMinorant& minorant() const { return minorant_; }
  const DomainTransform& transform() const { return transform_; }
  double u_max() const { return diagram_.u_max(); }
  std::pair<double, double> domain() const { return {domain_lo_, domain_hi_}; }
  bool truncated() const { return truncated_; }

 private:
  CusumDiagram diagram_;
  ConvexMinorant minorant_;
  DomainTransform transform_;
  double domain_lo_, domain_hi_;
  bool truncated_;
};

}  // namespace grenkit
