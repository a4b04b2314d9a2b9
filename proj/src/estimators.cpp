#include "grenkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace grenkit {

namespace {

constexpr double kPositivityFloor = 1e-6;

std::vector<double> distinct_sorted(const std::vector<double>& xs,
                                    double cap) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (x <= cap) out.push_back(x);
  }
  if (out.empty()) throw std::invalid_argument("empty isotonization range");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Diagram over grid points with the left-endpoint prefix (0, 0).
CusumDiagram prefixed_diagram(const std::vector<double>& u,
                              const std::vector<double>& g, double u_max) {
  std::vector<DiagramPoint> pts;
  pts.reserve(u.size() + 1);
  pts.push_back({0.0, 0.0});
  for (std::size_t j = 0; j < u.size(); ++j) pts.push_back({u[j], g[j]});
  return CusumDiagram(std::move(pts), u_max);
}

MonotoneEstimate density_from_cdf(const StepFunction& cdf, double cap) {
  std::vector<double> knots, values;
  for (std::size_t j = 0; j < cdf.knots().size(); ++j) {
    if (cdf.knots()[j] > cap) break;
    knots.push_back(cdf.knots()[j]);
    values.push_back(cdf.values()[j]);
  }
  if (knots.empty()) throw std::invalid_argument("empty isotonization range");
  const double u_max = knots.back();
  CusumDiagram diagram = prefixed_diagram(knots, values, u_max);
  return MonotoneEstimate(std::move(diagram), DomainTransform::identity(), 0.0,
                          u_max);
}

CoxModel null_cox_model(std::size_t dim) {
  CoxModel m;
  m.beta.assign(dim, 0.0);
  return m;
}

// Distribution-function estimate on the grid of distinct observed times,
// per the requested adjustment. The one-step curve is only evaluated on the
// requested range; the nuisance fits always use the full sample.
StepFunction gamma_estimate(const SurvivalSample& s, Adjustment adj,
                            double cap) {
  switch (adj) {
    case Adjustment::None:
      return ecdf(s.y);
    case Adjustment::Independent:
      return kaplan_meier(s);
    case Adjustment::Conditional: {
      const CoxModel event_model = cox_fit(s, EventRole::Event);
      const CoxModel censor_model =
          std::any_of(s.delta.begin(), s.delta.end(),
                      [](int d) { return d == 0; })
              ? cox_fit(s, EventRole::Censoring)
              : null_cox_model(s.covariate_dim());
      OneStepCurve curve =
          onestep_gamma_density(s, event_model, censor_model, cap);
      return StepFunction(std::move(curve.x_grid),
                          std::move(curve.gamma_values), 0.0, false);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

MonotoneEstimate grenander_density(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("empty input");
  for (double t : times) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("times must be positive and finite");
    }
  }
  return density_from_cdf(ecdf(times), kFullRange);
}

MonotoneEstimate censored_density(const SurvivalSample& s,
                                  double domain_cap) {
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  return density_from_cdf(kaplan_meier(s), domain_cap);
}

OneStepCurve onestep_gamma_density(const SurvivalSample& s,
                                   const CoxModel& event_model,
                                   const CoxModel& censor_model,
                                   double domain_cap) {
  const std::size_t n = s.size();
  if (n == 0) throw std::invalid_argument("empty sample");
  const std::size_t d = s.covariate_dim();
  if (event_model.beta.size() != d || censor_model.beta.size() != d) {
    throw std::invalid_argument("covariate dimension mismatch");
  }

  const std::vector<double> grid = distinct_sorted(s.y, domain_cap);
  const std::size_t m = grid.size();
  const StepFunction& lam_event = event_model.baseline_cumhaz;
  const StepFunction& lam_censor = censor_model.baseline_cumhaz;

  // Baseline cumulative hazards along the grid; d_lam flags event times.
  std::vector<double> lam_at(m), lam_before(m), lamc_before(m), d_lam(m);
  for (std::size_t j = 0; j < m; ++j) {
    lam_at[j] = lam_event(grid[j]);
    lam_before[j] = lam_event.value_before(grid[j]);
    lamc_before[j] = lam_censor.value_before(grid[j]);
    d_lam[j] = lam_at[j] - lam_before[j];
  }

  // Per-observation relative risks and the covariate-free position of y_i.
  std::vector<double> theta(n), gamma_rr(n), dterm(n);
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta_e = 0.0, eta_c = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      eta_e += event_model.beta[k] * s.w[i][k];
      eta_c += censor_model.beta[k] * s.w[i][k];
    }
    theta[i] = std::exp(eta_e);
    gamma_rr[i] = std::exp(eta_c);
    pos[i] = static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), s.y[i]) - grid.begin());
    // S_n(y-|w) G_n(y-|w) in the event term; only observations inside the
    // requested range contribute it.
    dterm[i] = 0.0;
    if (s.delta[i] && s.y[i] <= domain_cap) {
      const double denom =
          std::exp(-(theta[i] * lam_event.value_before(s.y[i]) +
                     gamma_rr[i] * lam_censor.value_before(s.y[i])));
      if (denom < kPositivityFloor) {
        throw std::runtime_error("positivity floor breached");
      }
      dterm[i] = 1.0 / denom;
    }
  }

  std::vector<double> acc(m, 0.0);
  std::vector<double> influence(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double integral = 0.0;
    double last_lam = -1.0, last_surv = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j <= pos[i] && d_lam[j] > 0.0) {
        const double denom = std::exp(
            -(theta[i] * lam_before[j] + gamma_rr[i] * lamc_before[j]));
        if (denom < kPositivityFloor) {
          throw std::runtime_error("positivity floor breached");
        }
        integral += theta[i] * d_lam[j] / denom;
      }
      const double bracket =
          j >= pos[i] ? 1.0 - dterm[i] + integral : 1.0 + integral;
      if (lam_at[j] != last_lam) {
        last_lam = lam_at[j];
        last_surv = std::exp(-theta[i] * last_lam);
      }
      const double contribution = last_surv * bracket;
      acc[j] += contribution;
      if (j + 1 == m) influence[i] = contribution;
    }
  }

  OneStepCurve out;
  out.x_grid = grid;
  out.gamma_values.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.gamma_values[j] = 1.0 - acc[j] / static_cast<double>(n);
  }
  out.influence_terms = std::move(influence);
  return out;
}

MonotoneEstimate monotone_density_adjusted(const SurvivalSample& s,
                                           double domain_cap) {
  StepFunction gamma = gamma_estimate(s, Adjustment::Conditional, domain_cap);
  const double u_max = gamma.knots().back();
  CusumDiagram diagram =
      prefixed_diagram(gamma.knots(), gamma.values(), u_max);
  return MonotoneEstimate(std::move(diagram), DomainTransform::identity(), 0.0,
                          u_max);
}

MonotoneEstimate monotone_hazard(const SurvivalSample& s, Adjustment adj,
                                 double domain_cap) {
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  StepFunction gamma = gamma_estimate(s, adj, domain_cap);
  DomainTransform phi = restricted_mean_curve(gamma);
  std::vector<double> u, g;
  for (std::size_t j = 0; j < gamma.knots().size(); ++j) {
    if (gamma.knots()[j] > domain_cap) break;
    u.push_back(phi(gamma.knots()[j]));
    g.push_back(gamma.values()[j]);
  }
  if (u.empty()) throw std::invalid_argument("empty isotonization range");
  const double hi = std::min(domain_cap, gamma.knots().back());
  CusumDiagram diagram = prefixed_diagram(u, g, u.back());
  return MonotoneEstimate(std::move(diagram), std::move(phi), 0.0, hi);
}

MonotoneEstimate hazard_identity(const SurvivalSample& s, Adjustment adj,
                                 double domain_cap) {
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  StepFunction gamma = gamma_estimate(s, adj, domain_cap);
  std::vector<double> knots, cumhaz;
  bool truncated = false;
  for (std::size_t j = 0; j < gamma.knots().size(); ++j) {
    if (gamma.knots()[j] > domain_cap) break;
    const double surv = 1.0 - gamma.values()[j];
    if (surv <= kPositivityFloor) {
      truncated = true;
      break;
    }
    knots.push_back(gamma.knots()[j]);
    cumhaz.push_back(-std::log(surv));
  }
  if (knots.empty()) {
    throw std::runtime_error("survival vanishes over the whole range");
  }
  const double u_cap = knots.back();
  CusumDiagram diagram = prefixed_diagram(knots, cumhaz, u_cap);
  return MonotoneEstimate(std::move(diagram), DomainTransform::identity(), 0.0,
                          u_cap, truncated);
}

namespace {

struct RegressionGrid {
  std::vector<double> a_distinct;
  std::vector<double> phi_values;    // empirical CDF of a at the grid
  std::vector<double> gamma_values;  // cumulative sums / n at the grid
};

RegressionGrid cumulate_by_exposure(const std::vector<double>& a,
                                    const std::vector<double>& terms) {
  const std::size_t n = a.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i] < a[j]; });

  RegressionGrid out;
  double cum_term = 0.0;
  std::size_t cum_count = 0;
  std::size_t i = 0;
  while (i < n) {
    const double av = a[order[i]];
    std::size_t j = i;
    while (j < n && a[order[j]] == av) {
      cum_term += terms[order[j]];
      ++j;
    }
    cum_count += j - i;
    out.a_distinct.push_back(av);
    out.phi_values.push_back(static_cast<double>(cum_count) /
                             static_cast<double>(n));
    out.gamma_values.push_back(cum_term / static_cast<double>(n));
    i = j;
  }
  return out;
}

MonotoneEstimate regression_estimate(const RegressionGrid& grid) {
  CusumDiagram diagram =
      prefixed_diagram(grid.phi_values, grid.gamma_values, 1.0);
  StepFunction phi(grid.a_distinct, grid.phi_values, 0.0, true);
  const double lo = grid.a_distinct.front();
  const double hi = grid.a_distinct.back();
  return MonotoneEstimate(std::move(diagram), DomainTransform::step(phi), lo,
                          hi);
}

void check_regression_inputs(const std::vector<double>& a,
                             const std::vector<double>& y) {
  if (a.empty()) throw std::invalid_argument("empty input");
  if (a.size() != y.size()) {
    throw std::invalid_argument("exposure and outcome lengths differ");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(y[i])) {
      throw std::invalid_argument("non-finite input");
    }
  }
}

}  // namespace

MonotoneEstimate isotonic_regression(const std::vector<double>& a,
                                     const std::vector<double>& y) {
  check_regression_inputs(a, y);
  return regression_estimate(cumulate_by_exposure(a, y));
}

MonotoneEstimate marginalized_regression(
    const std::vector<double>& a, const std::vector<double>& y,
    const std::vector<std::vector<double>>& w, const NuisancePair& nuis) {
  check_regression_inputs(a, y);
  const std::size_t n = a.size();
  if (w.size() != n) throw std::invalid_argument("covariate rows must match a");

  // Per-observation one-step terms: the residual over the density ratio plus
  // the covariate-averaged outcome regression at the observed exposure.
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = nuis.g(a[i], w[i]);
    if (!(gi > 0.0) || !std::isfinite(gi)) {
      throw std::runtime_error("invalid density ratio");
    }
    double mu_bar = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu_bar += nuis.mu(a[i], w[j]);
    mu_bar /= static_cast<double>(n);
    terms[i] = (y[i] - nuis.mu(a[i], w[i])) / gi + mu_bar;
  }
  return regression_estimate(cumulate_by_exposure(a, terms));
}

namespace {

// Least squares of response on [1, columns...]; returns coefficients.
std::vector<double> linear_fit(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& response) {
  const std::size_t n = rows.size();
  const std::size_t p = rows.front().size() + 1;
  std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
  std::vector<double> xi(p);
  for (std::size_t i = 0; i < n; ++i) {
    xi[0] = 1.0;
    for (std::size_t k = 1; k < p; ++k) xi[k] = rows[i][k - 1];
    for (std::size_t k = 0; k < p; ++k) {
      xty[k] += xi[k] * response[i];
      for (std::size_t l = 0; l < p; ++l) xtx[k * p + l] += xi[k] * xi[l];
    }
  }
  // Gaussian elimination with partial pivoting.
  std::vector<double> aug(xtx);
  std::vector<double> b(xty);
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(aug[r * p + col]) > std::abs(aug[piv * p + col])) piv = r;
    }
    if (std::abs(aug[piv * p + col]) < 1e-12) {
      throw std::runtime_error("singular design");
    }
    if (piv != col) {
      for (std::size_t c = 0; c < p; ++c) std::swap(aug[piv * p + c], aug[col * p + c]);
      std::swap(b[piv], b[col]);
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = aug[r * p + col] / aug[col * p + col];
      for (std::size_t c = col; c < p; ++c) aug[r * p + c] -= f * aug[col * p + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t k = 0; k < p; ++k) b[k] /= aug[k * p + k];
  return b;
}

}  // namespace

NuisancePair default_nuisances(const std::vector<double>& a,
                               const std::vector<double>& y,
                               const std::vector<std::vector<double>>& w) {
  const std::size_t n = a.size();
  const std::size_t d = w.empty() ? 0 : w.front().size();
  if (n != y.size() || w.size() != n) {
    throw std::invalid_argument("input lengths differ");
  }
  if (n <= d + 2) throw std::invalid_argument("too few observations");

  // mu: least squares of y on (1, a, w).
  std::vector<std::vector<double>> design(n, std::vector<double>(d + 1));
  for (std::size_t i = 0; i < n; ++i) {
    design[i][0] = a[i];
    for (std::size_t k = 0; k < d; ++k) design[i][k + 1] = w[i][k];
  }
  const std::vector<double> mu_coef = linear_fit(design, y);

  // Conditional model a | w: Gaussian linear with homoscedastic residuals.
  std::vector<std::vector<double>> wrows(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) wrows[i] = w[i];
  const std::vector<double> a_coef = linear_fit(wrows, a);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = a_coef[0];
    for (std::size_t k = 0; k < d; ++k) pred += a_coef[k + 1] * w[i][k];
    rss += (a[i] - pred) * (a[i] - pred);
  }
  const double cond_var = rss / static_cast<double>(n);

  // Marginal Gaussian fit of a.
  double mean_a = 0.0;
  for (double v : a) mean_a += v;
  mean_a /= static_cast<double>(n);
  double marg_var = 0.0;
  for (double v : a) marg_var += (v - mean_a) * (v - mean_a);
  marg_var /= static_cast<double>(n);
  if (!(cond_var > 0.0) || !(marg_var > 0.0)) {
    throw std::runtime_error("singular design");
  }

  NuisancePair out;
  out.mu = [mu_coef](double av, const std::vector<double>& wv) {
    double v = mu_coef[0] + mu_coef[1] * av;
    for (std::size_t k = 0; k < wv.size(); ++k) v += mu_coef[k + 2] * wv[k];
    return v;
  };
  out.g = [a_coef, cond_var, mean_a, marg_var](double av,
                                               const std::vector<double>& wv) {
    double pred = a_coef[0];
    for (std::size_t k = 0; k < wv.size(); ++k) pred += a_coef[k + 1] * wv[k];
    const double zc = av - pred;
    const double zm = av - mean_a;
    const double log_ratio = -0.5 * (zc * zc / cond_var - zm * zm / marg_var) +
                             0.5 * std::log(marg_var / cond_var);
    return std::exp(log_ratio);
  };
  return out;
}

}  // namespace grenkit
