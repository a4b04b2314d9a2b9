#include "grenkit/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace grenkit {

namespace {

void require(const std::function<double(double)>& f, const char* name) {
  if (!f) {
    throw std::invalid_argument(std::string("model is missing: ") + name);
  }
}

void require(const std::function<double(double, double)>& f,
             const char* name) {
  if (!f) {
    throw std::invalid_argument(std::string("model is missing: ") + name);
  }
}

void require(const std::function<double(Rng&)>& f, const char* name) {
  if (!f) {
    throw std::invalid_argument(std::string("model is missing: ") + name);
  }
}

// argmin over the grid {-L, ..., L step h} of W(u) + u^2 for one realization
// of two-sided Brownian motion started at W(0) = 0.
double chernoff_draw(Rng& rng, double halfwidth, double step) {
  const int k_max = static_cast<int>(std::lround(halfwidth / step));
  const double sd = std::sqrt(step);
  double best_u = 0.0;
  double best_v = 0.0;
  double walk = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    walk += sd * rng.normal();
    const double u = step * k;
    const double v = walk + u * u;
    if (v < best_v) {
      best_v = v;
      best_u = u;
    }
  }
  walk = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    walk += sd * rng.normal();
    const double u = -step * k;
    const double v = walk + u * u;
    if (v < best_v) {
      best_v = v;
      best_u = u;
    }
  }
  return best_u;
}

ChernoffTable summarize_draws(const ChernoffConfig& cfg,
                              std::vector<double> draws) {
  ChernoffTable table;
  table.mc_config = cfg;
  const double n = static_cast<double>(draws.size());
  double mean = 0.0;
  for (double z : draws) mean += z;
  mean /= n;
  double var = 0.0;
  std::size_t interior = 0;
  const double edge = cfg.grid_halfwidth - 1.0;
  for (double z : draws) {
    var += (z - mean) * (z - mean);
    if (std::abs(z) <= edge) ++interior;
  }
  var /= n - 1.0;
  table.mean = mean;
  table.variance = var;
  table.se_mean = std::sqrt(var / n);
  table.interior_fraction = static_cast<double>(interior) / n;

  std::sort(draws.begin(), draws.end());
  for (double p : {0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975}) {
    const double idx = p * (n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, draws.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    table.quantiles[p] = (1.0 - frac) * draws[lo] + frac * draws[hi];
  }
  return table;
}

void validate_chernoff(const ChernoffConfig& cfg) {
  if (!(cfg.grid_halfwidth >= 5.0) || !(cfg.grid_step <= 0.01) ||
      !(cfg.grid_step > 0.0) || cfg.replications < 10000) {
    throw std::invalid_argument("invalid grid");
  }
}

}  // namespace

ChernoffTable chernoff_oracle(const ChernoffConfig& cfg) {
  validate_chernoff(cfg);
  std::vector<double> draws(static_cast<std::size_t>(cfg.replications));
#pragma omp parallel for schedule(static)
  for (int r = 0; r < cfg.replications; ++r) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(r));
    draws[static_cast<std::size_t>(r)] =
        chernoff_draw(rng, cfg.grid_halfwidth, cfg.grid_step);
  }
  return summarize_draws(cfg, std::move(draws));
}

ChernoffTable chernoff_oracle_serial(const ChernoffConfig& cfg) {
  validate_chernoff(cfg);
  std::vector<double> draws(static_cast<std::size_t>(cfg.replications));
  for (int r = 0; r < cfg.replications; ++r) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(r));
    draws[static_cast<std::size_t>(r)] =
        chernoff_draw(rng, cfg.grid_halfwidth, cfg.grid_step);
  }
  return summarize_draws(cfg, std::move(draws));
}

std::string ChernoffTable::to_json() const {
  nlohmann::json j;
  j["variance"] = variance;
  j["mean"] = mean;
  j["se_mean"] = se_mean;
  j["interior_fraction"] = interior_fraction;
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [p, v] : quantiles) {
    std::ostringstream key;
    key << p;
    q[key.str()] = v;
  }
  j["quantiles"] = q;
  j["mc_config"] = {{"grid_halfwidth", mc_config.grid_halfwidth},
                    {"grid_step", mc_config.grid_step},
                    {"replications", mc_config.replications},
                    {"seed", mc_config.seed}};
  return j.dump(2);
}

std::string ScaleReport::to_json() const {
  nlohmann::json j;
  j["tau"] = tau;
  j["kappa"] = kappa;
  j["variance_of_limit"] = variance_of_limit;
  j["ingredients"] = ingredients;
  return j.dump(2);
}

namespace {

double mc_average(const TrueModel& m, int mc_w, std::uint64_t seed,
                  const std::function<double(double)>& integrand) {
  require(m.covariate_sampler, "covariate_sampler");
  if (mc_w <= 0) throw std::invalid_argument("mc_w must be positive");
  Rng rng(seed);
  double acc = 0.0;
  for (int k = 0; k < mc_w; ++k) {
    acc += integrand(m.covariate_sampler(rng));
  }
  return acc / static_cast<double>(mc_w);
}

ScaleReport make_report(double theta_prime, double kappa, double phi_prime,
                        double chernoff_variance,
                        std::map<std::string, double> ingredients) {
  ScaleReport out;
  out.kappa = kappa;
  out.tau = std::cbrt(4.0 * theta_prime * kappa / (phi_prime * phi_prime));
  out.variance_of_limit = out.tau * out.tau * chernoff_variance;
  out.ingredients = std::move(ingredients);
  out.ingredients["theta_prime"] = theta_prime;
  out.ingredients["kappa"] = kappa;
  out.ingredients["phi_prime"] = phi_prime;
  return out;
}

}  // namespace

ScaleReport tau_density(const TrueModel& m, double x, Censoring censoring,
                        int mc_w, std::uint64_t seed,
                        double chernoff_variance) {
  require(m.density, "density");
  require(m.density_deriv, "density_deriv");
  const double fp = m.density_deriv(x);
  if (fp < 0.0) throw std::runtime_error("non-monotone truth at x");
  double kappa = 0.0;
  std::map<std::string, double> ing{{"f0", m.density(x)}};
  switch (censoring) {
    case Censoring::None:
      kappa = m.density(x);
      break;
    case Censoring::Independent:
      require(m.censoring_survival, "censoring_survival");
      ing["G0"] = m.censoring_survival(x);
      kappa = m.density(x) / m.censoring_survival(x);
      break;
    case Censoring::Conditional:
      require(m.conditional_density, "conditional_density");
      require(m.conditional_censoring, "conditional_censoring");
      kappa = mc_average(m, mc_w, seed, [&](double w) {
        return m.conditional_density(x, w) / m.conditional_censoring(x, w);
      });
      break;
  }
  return make_report(fp, kappa, 1.0, chernoff_variance, std::move(ing));
}

ScaleReport tau_hazard(const TrueModel& m, double x, Censoring censoring,
                       int mc_w, std::uint64_t seed,
                       double chernoff_variance) {
  require(m.hazard, "hazard");
  require(m.hazard_deriv, "hazard_deriv");
  require(m.survival, "survival");
  const double lp = m.hazard_deriv(x);
  if (lp < 0.0) throw std::runtime_error("non-monotone truth at x");
  const double surv = m.survival(x);
  double kappa = 0.0;
  std::map<std::string, double> ing{{"lambda0", m.hazard(x)}, {"S0", surv}};
  switch (censoring) {
    case Censoring::None:
      kappa = m.hazard(x) * surv;
      break;
    case Censoring::Independent:
      require(m.censoring_survival, "censoring_survival");
      ing["G0"] = m.censoring_survival(x);
      kappa = m.hazard(x) * surv / m.censoring_survival(x);
      break;
    case Censoring::Conditional:
      require(m.conditional_density, "conditional_density");
      require(m.conditional_censoring, "conditional_censoring");
      kappa = mc_average(m, mc_w, seed, [&](double w) {
        return m.conditional_density(x, w) / m.conditional_censoring(x, w);
      });
      break;
  }
  return make_report(lp, kappa, surv, chernoff_variance, std::move(ing));
}

ScaleReport tau_regression(const TrueModel& m, double x, bool marginalized,
                           int mc_w, std::uint64_t seed,
                           double chernoff_variance) {
  if (!marginalized) {
    require(m.regression_deriv, "regression_deriv");
    require(m.conditional_variance_marginal, "conditional_variance_marginal");
    require(m.exposure_density, "exposure_density");
    const double mp = m.regression_deriv(x);
    if (mp < 0.0) throw std::runtime_error("non-monotone truth at x");
    const double sigma2 = m.conditional_variance_marginal(x);
    const double f = m.exposure_density(x);
    const double kappa = f * sigma2;
    return make_report(mp, kappa, f, chernoff_variance,
                       {{"sigma2", sigma2}, {"f0", f}});
  }
  require(m.dose_response_deriv, "dose_response_deriv");
  require(m.conditional_variance, "conditional_variance");
  require(m.conditional_exposure_density, "conditional_exposure_density");
  require(m.exposure_density, "exposure_density");
  const double np = m.dose_response_deriv(x);
  if (np < 0.0) throw std::runtime_error("non-monotone truth at x");
  const double f = m.exposure_density(x);
  const double integral = mc_average(m, mc_w, seed, [&](double w) {
    return m.conditional_variance(x, w) / m.conditional_exposure_density(x, w);
  });
  const double kappa = f * f * integral;
  return make_report(np, kappa, f, chernoff_variance,
                     {{"variance_ratio_integral", integral}, {"f0", f}});
}

NaiveLimitCurve naive_limit_curve(const TrueModel& m,
                                  const std::vector<double>& grid, int mc_w,
                                  std::uint64_t seed, double quad_step) {
  require(m.conditional_density, "conditional_density");
  require(m.conditional_survival, "conditional_survival");
  require(m.conditional_censoring, "conditional_censoring");
  require(m.covariate_sampler, "covariate_sampler");
  if (grid.empty()) throw std::invalid_argument("empty grid");
  if (!(quad_step > 0.0)) throw std::invalid_argument("invalid step");

  Rng rng(seed);
  std::vector<double> ws(static_cast<std::size_t>(mc_w));
  for (auto& w : ws) w = m.covariate_sampler(rng);

  const double diff_h = 1e-3;
  const double top = *std::max_element(grid.begin(), grid.end()) + 2.0 * diff_h;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(top / quad_step));

  // Hazard of the limit: ratio of covariate-averaged f*G to S*G.
  auto mix_hazard = [&](double v) {
    double num = 0.0, den = 0.0;
    for (double w : ws) {
      const double g = m.conditional_censoring(v, w);
      num += m.conditional_density(v, w) * g;
      den += m.conditional_survival(v, w) * g;
    }
    if (!(den > 0.0)) throw std::runtime_error("quadrature instability");
    return num / den;
  };

  // Cumulative trapezoid of the hazard on the fine grid.
  std::vector<double> cum(steps + 1, 0.0);
  double prev = mix_hazard(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double v = quad_step * static_cast<double>(k);
    const double cur = mix_hazard(v);
    cum[k] = cum[k - 1] + 0.5 * (prev + cur) * quad_step;
    prev = cur;
  }
  auto cum_at = [&](double t) {
    if (t <= 0.0) return 0.0;
    const double pos = t / quad_step;
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), steps - 1);
    const double frac = pos - static_cast<double>(lo);
    return cum[lo] + frac * (cum[lo + 1] - cum[lo]);
  };
  auto surv_at = [&](double t) { return std::exp(-cum_at(t)); };

  NaiveLimitCurve out;
  out.grid = grid;
  out.survival.reserve(grid.size());
  out.density.reserve(grid.size());
  out.hazard.reserve(grid.size());
  for (double t : grid) {
    const double s = surv_at(t);
    if (!(s >= 0.0)) throw std::runtime_error("quadrature instability");
    const double f = -(surv_at(t + diff_h) - surv_at(t - diff_h)) / (2.0 * diff_h);
    out.survival.push_back(s);
    out.density.push_back(f);
    out.hazard.push_back(f / s);
  }
  return out;
}

}  // namespace grenkit
