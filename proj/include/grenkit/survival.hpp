#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grenkit/monotone_estimate.hpp"
#include "grenkit/step_function.hpp"

namespace grenkit {

// Right-censored observations (y, delta, w): y = min(T, C) in a common time
// unit, delta = I(T <= C), w an optional covariate vector of fixed dimension.
struct SurvivalSample {
  std::vector<double> y;
  std::vector<int> delta;
  std::vector<std::vector<double>> w;  // one row per observation; may be empty

  SurvivalSample() = default;
  SurvivalSample(std::vector<double> times, std::vector<int> events,
                 std::vector<std::vector<double>> covariates = {});

  std::size_t size() const { return y.size(); }
  std::size_t covariate_dim() const { return w.empty() ? 0 : w.front().size(); }
};

// Empirical distribution function with jump 1/n at each order statistic
// (ties stack).
StepFunction ecdf(const std::vector<double>& times);

// Product-limit estimator in CDF form 1 - S_n, with knots at every distinct
// observed time. Events are processed before censorings at tied times. An
// uncensored sample reduces to the empirical distribution function; that
// case is computed directly so the identity is exact.
StepFunction kaplan_meier(const SurvivalSample& s);

// Exact integral of 1 - F over [0, u] for a CDF-form step function.
double restricted_mean(const StepFunction& cdf, double u);

// The full map u -> integral of (1 - F) over [0, u] as a piecewise-linear
// transform. Slopes are floored at zero so the transform stays
// non-decreasing even when F exceeds one (one-step curves can).
DomainTransform restricted_mean_curve(const StepFunction& cdf);

enum class EventRole { Event, Censoring };

struct CoxConvergence {
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

// Proportional-hazards fit: partial-likelihood coefficients with Breslow tie
// handling and the Breslow estimate of the cumulative baseline hazard.
struct CoxModel {
  std::vector<double> beta;
  StepFunction baseline_cumhaz{std::vector<double>{}, std::vector<double>{},
                               0.0, true};
  CoxConvergence convergence;
};

// Damped Newton on the Breslow partial likelihood; converges to gradient
// norm <= 1e-8 or throws carrying the last iterate. Fitting the censoring
// role flips the event indicator.
CoxModel cox_fit(const SurvivalSample& s, EventRole role);

// exp(-exp(beta'w) * baseline_cumhaz(t)).
double conditional_survival(const CoxModel& m, double t,
                            const std::vector<double>& w);

}  // namespace grenkit
