#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "grenkit/asymptotics.hpp"
#include "grenkit/survival.hpp"

namespace grenkit {

// Conditional-Weibull data-generating settings: given W ~ Unif(-1, 1), the
// event time is Weibull(shape 4, scale exp(alpha0 + alpha1 w)) and the
// censoring time Weibull(shape 2, scale exp(beta0 + beta1 w)).
struct SimSetting {
  std::string label;
  double alpha0 = 0.0, alpha1 = 0.0, beta0 = 0.0, beta1 = 0.0;
  double shape_event = 4.0;
  double shape_censor = 2.0;
};

// The four dependence settings, keyed "i".."iv".
SimSetting make_setting(const std::string& label);

SurvivalSample generate(const SimSetting& setting, int n, Rng& rng);

// Marginal truth for the W-mixture of conditional Weibulls: density, hazard
// and their derivatives by 64-node Gauss-Legendre quadrature with analytic
// in-integrand derivatives, plus the conditional evaluators.
TrueModel true_marginals(const SimSetting& setting);

struct RunManifest {
  SimSetting setting;
  int n = 2000;
  int reps = 500;
  std::uint64_t seed = 1;
  std::vector<double> x_eval;
  std::vector<std::string> estimators;
};

RunManifest default_manifest(const std::string& setting_label);

// Known estimator labels: naive_density, onestep_density, naive_hazard,
// onestep_hazard, identity_hazard.
bool known_estimator(const std::string& label);

struct StudySummary {
  double x = 0.0;
  std::string estimator;
  double emp_mean = 0.0;
  double emp_var_std = 0.0;  // variance of n^{1/3} (theta_n - theta_0)
  double theory_var = 0.0;   // tau0(x)^2 * Var(Z)
  double bias = 0.0;
};

struct StudyResult {
  RunManifest manifest;
  // values[rep][estimator][x]; NaN marks a failed replication.
  std::vector<std::vector<std::vector<double>>> values;
  std::vector<double> theta0;  // per (estimator, x), flattened like summary
  std::vector<StudySummary> summary;
  std::map<std::string, int> failures;

  double standardized(int rep, std::size_t est, std::size_t x_idx) const;
};

struct StudyOptions {
  int threads = 0;  // 0: library default
  double chernoff_variance = 0.0;
  int theory_mc = 100000;
  std::uint64_t theory_seed = 991;
};

// Monte Carlo study over seeded replication streams; deterministic in
// (manifest, options) and independent of thread count. Throws if any
// estimator fails in more than 1% of replications.
StudyResult run_study(const RunManifest& m, const StudyOptions& opt);
// Plain-loop reference; must agree with run_study exactly.
StudyResult run_study_serial(const RunManifest& m, const StudyOptions& opt);

// CSV + JSON-sidecar serialization (headers `rep,x,estimator,value,
// standardized` and `x,estimator,emp_mean,emp_var_std,theory_var,bias`).
void write_study_files(const StudyResult& result, const std::string& draws_path,
                       const std::string& summary_path,
                       const std::string& manifest_path);

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

}  // namespace grenkit
