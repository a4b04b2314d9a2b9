#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "grenkit/rng.hpp"

namespace grenkit {

// Analytic ingredients of a data-generating truth, each supplied as an
// evaluable function. Only the pieces a given calculator needs must be set;
// a missing piece raises a descriptive error when first used.
struct TrueModel {
  // Event-time marginals.
  std::function<double(double)> density;             // f0
  std::function<double(double)> density_deriv;       // f0'
  std::function<double(double)> survival;            // S0
  std::function<double(double)> hazard;              // lambda0
  std::function<double(double)> hazard_deriv;        // lambda0'
  std::function<double(double)> censoring_survival;  // marginal G0
  // Conditional-on-covariate pieces (scalar covariate).
  std::function<double(double, double)> conditional_density;        // f0(x|w)
  std::function<double(double, double)> conditional_survival;       // S0(x|w)
  std::function<double(double, double)> conditional_censoring;     // G0(x|w)
  // Regression pieces.
  std::function<double(double)> regression;        // mu0
  std::function<double(double)> regression_deriv;  // mu0'
  std::function<double(double)> conditional_variance_marginal;  // sigma0^2(x)
  std::function<double(double)> exposure_density;               // f0(a)
  std::function<double(double, double)> conditional_variance;   // sigma0^2(x,w)
  std::function<double(double, double)> conditional_exposure_density;  // f0(a|w)
  std::function<double(double)> dose_response;        // nu0
  std::function<double(double)> dose_response_deriv;  // nu0'
  // Covariate law Q0.
  std::function<double(Rng&)> covariate_sampler;
};

struct ChernoffConfig {
  double grid_halfwidth = 6.0;
  double grid_step = 0.005;
  int replications = 100000;
  std::uint64_t seed = 20240801;
};

// Monte Carlo table of the argmin of two-sided Brownian motion plus a
// parabola. Every moment used downstream is derived from this oracle rather
// than from published constants.
struct ChernoffTable {
  double variance = 0.0;
  double mean = 0.0;
  double se_mean = 0.0;
  double interior_fraction = 0.0;  // mass observed inside [-L+1, L-1]
  std::map<double, double> quantiles;
  ChernoffConfig mc_config;

  std::string to_json() const;
};

ChernoffTable chernoff_oracle(const ChernoffConfig& cfg);
// Plain-loop reference; must agree with chernoff_oracle exactly.
ChernoffTable chernoff_oracle_serial(const ChernoffConfig& cfg);

enum class Censoring { None, Independent, Conditional };

// Scale factor of the cube-root limit law with its ingredients and the
// implied limiting variance tau^2 * Var(Z).
struct ScaleReport {
  double tau = 0.0;
  double kappa = 0.0;
  double variance_of_limit = 0.0;
  std::map<std::string, double> ingredients;

  std::string to_json() const;
};

ScaleReport tau_density(const TrueModel& m, double x, Censoring censoring,
                        int mc_w, std::uint64_t seed, double chernoff_variance);
ScaleReport tau_hazard(const TrueModel& m, double x, Censoring censoring,
                       int mc_w, std::uint64_t seed, double chernoff_variance);
ScaleReport tau_regression(const TrueModel& m, double x, bool marginalized,
                           int mc_w, std::uint64_t seed,
                           double chernoff_variance);

// Large-sample limit of the covariate-ignoring survival estimator under
// conditionally independent censoring, with the implied density and hazard
// obtained by central differences.
struct NaiveLimitCurve {
  std::vector<double> grid;
  std::vector<double> survival;
  std::vector<double> density;
  std::vector<double> hazard;
};

NaiveLimitCurve naive_limit_curve(const TrueModel& m,
                                  const std::vector<double>& grid, int mc_w,
                                  std::uint64_t seed, double quad_step = 1e-3);

}  // namespace grenkit
