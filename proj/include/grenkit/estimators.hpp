#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "grenkit/monotone_estimate.hpp"
#include "grenkit/survival.hpp"

namespace grenkit {

// Default right endpoint of the isotonization interval: the largest
// observed time. A finite domain_cap restricts the cusum diagram to
// observations at or below it, for targets that are monotone only on a
// sub-interval of the support; the primitive estimates still use the full
// sample.
inline constexpr double kFullRange = std::numeric_limits<double>::infinity();

// Nuisance estimators for the covariate-adjusted regression estimator:
// outcome regression mu(a, w) and exposure density ratio
// g(a, w) = f(a | w) / f(a), which must be strictly positive on the sample.
struct NuisancePair {
  std::function<double(double, const std::vector<double>&)> mu;
  std::function<double(double, const std::vector<double>&)> g;
};

// Debiased estimate of the primitive Gamma on a grid, with the
// per-observation influence contributions at the last grid point kept for
// diagnostics.
struct OneStepCurve {
  std::vector<double> x_grid;
  std::vector<double> gamma_values;
  std::vector<double> influence_terms;
};

// Monotone density from exact event times: left GCM slope of the empirical
// distribution function over [0, max time].
MonotoneEstimate grenander_density(const std::vector<double>& times);

// Monotone density under independent right-censoring: left GCM slope of the
// Kaplan-Meier distribution function. Reduces to grenander_density when
// every observation is an event.
MonotoneEstimate censored_density(const SurvivalSample& s,
                                  double domain_cap = kFullRange);

// Debiased distribution-function estimate under conditionally independent
// censoring, evaluated at the observed times. All inner integrals are exact
// sums over the baseline-hazard jumps; denominators below 1e-6 raise
// "positivity floor breached".
OneStepCurve onestep_gamma_density(const SurvivalSample& s,
                                   const CoxModel& event_model,
                                   const CoxModel& censor_model,
                                   double domain_cap = kFullRange);

// Covariate-adjusted monotone density: fits event and censoring Cox models,
// builds the one-step curve, and isotonizes it with the identity transform.
MonotoneEstimate monotone_density_adjusted(const SurvivalSample& s,
                                           double domain_cap = kFullRange);

enum class Adjustment { None, Independent, Conditional };

// Monotone hazard via the restricted-mean domain transform. The adjustment
// selects the distribution-function estimate: the empirical CDF, one minus
// Kaplan-Meier, or the covariate-adjusted one-step curve.
MonotoneEstimate monotone_hazard(const SurvivalSample& s, Adjustment adj,
                                 double domain_cap = kFullRange);

// Monotone hazard with the identity transform, isotonizing -log S_n over
// [0, u_cap] where u_cap is the largest observed time with S_n above 1e-6.
// The estimate carries a truncation warning when the range was cut.
MonotoneEstimate hazard_identity(const SurvivalSample& s, Adjustment adj,
                                 double domain_cap = kFullRange);

// Least-squares isotonic regression: left GCM slope of the cusum diagram at
// the empirical distribution of the exposures. Tied exposures pool.
MonotoneEstimate isotonic_regression(const std::vector<double>& a,
                                     const std::vector<double>& y);

// Covariate-marginalized monotone regression (dose-response) based on the
// one-step estimate of the standardized primitive.
MonotoneEstimate marginalized_regression(
    const std::vector<double>& a, const std::vector<double>& y,
    const std::vector<std::vector<double>>& w, const NuisancePair& nuis);

// Simple parametric nuisances: linear least squares for the outcome
// regression, Gaussian linear model over Gaussian marginal for the density
// ratio. A documented plug-in point: any NuisancePair can be substituted.
NuisancePair default_nuisances(const std::vector<double>& a,
                               const std::vector<double>& y,
                               const std::vector<std::vector<double>>& w);

}  // namespace grenkit
