#include "grenkit/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace grenkit {

SurvivalSample::SurvivalSample(std::vector<double> times,
                               std::vector<int> events,
                               std::vector<std::vector<double>> covariates)
    : y(std::move(times)), delta(std::move(events)), w(std::move(covariates)) {
  if (delta.size() != y.size()) {
    throw std::invalid_argument("delta length must match y");
  }
  if (!w.empty() && w.size() != y.size()) {
    throw std::invalid_argument("covariate rows must match y");
  }
  for (double t : y) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("follow-up times must be positive and finite");
    }
  }
  for (int d : delta) {
    if (d != 0 && d != 1) {
      throw std::invalid_argument("delta must be 0 or 1");
    }
  }
  const std::size_t d = covariate_dim();
  for (const auto& row : w) {
    if (row.size() != d) {
      throw std::invalid_argument("covariate rows must share one dimension");
    }
    for (double v : row) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite covariate");
      }
    }
  }
}

StepFunction ecdf(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("empty input");
  std::vector<double> sorted = times;
  for (double t : sorted) {
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite input");
  }
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> knots, values;
  std::size_t i = 0;
  std::size_t cum = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    cum += j - i;
    knots.push_back(sorted[i]);
    values.push_back(static_cast<double>(cum) / n);
    i = j;
  }
  return StepFunction(std::move(knots), std::move(values), 0.0, true);
}

StepFunction kaplan_meier(const SurvivalSample& s) {
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  if (std::all_of(s.delta.begin(), s.delta.end(), [](int d) { return d == 1; })) {
    return ecdf(s.y);
  }

  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.y[a] < s.y[b]; });

  std::vector<double> knots, values;
  double surv = 1.0;
  std::size_t i = 0;
  std::size_t at_risk = s.size();
  while (i < order.size()) {
    std::size_t j = i;
    std::size_t events = 0;
    while (j < order.size() && s.y[order[j]] == s.y[order[i]]) {
      events += static_cast<std::size_t>(s.delta[order[j]]);
      ++j;
    }
    // Subjects censored at this time are still at risk for the tied events.
    if (events > 0) {
      surv *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
    }
    knots.push_back(s.y[order[i]]);
    values.push_back(1.0 - surv);
    at_risk -= j - i;
    i = j;
  }
  return StepFunction(std::move(knots), std::move(values), 0.0, true);
}

double restricted_mean(const StepFunction& cdf, double u) {
  if (u < 0.0) throw std::invalid_argument("negative integration endpoint");
  double total = 0.0;
  double x_prev = 0.0;
  double v_prev = cdf.left_limit();
  for (std::size_t j = 0; j < cdf.knots().size() && cdf.knots()[j] < u; ++j) {
    const double k = cdf.knots()[j];
    if (k > x_prev) {
      total += (1.0 - v_prev) * (k - x_prev);
      x_prev = k;
    }
    v_prev = cdf.values()[j];
  }
  total += (1.0 - v_prev) * (u - x_prev);
  return total;
}

DomainTransform restricted_mean_curve(const StepFunction& cdf) {
  std::vector<double> xs, vals;
  xs.reserve(cdf.knots().size() + 1);
  vals.reserve(cdf.knots().size() + 1);
  xs.push_back(0.0);
  vals.push_back(0.0);
  double acc = 0.0;
  double x_prev = 0.0;
  double v_prev = cdf.left_limit();
  for (std::size_t j = 0; j < cdf.knots().size(); ++j) {
    const double k = cdf.knots()[j];
    if (k <= x_prev) {
      v_prev = cdf.values()[j];
      continue;
    }
    acc += std::max(0.0, 1.0 - v_prev) * (k - x_prev);
    xs.push_back(k);
    vals.push_back(acc);
    x_prev = k;
    v_prev = cdf.values()[j];
  }
  const double tail = std::max(0.0, 1.0 - v_prev);
  return DomainTransform::piecewise_linear(std::move(xs), std::move(vals),
                                           tail);
}

namespace {

struct PartialLikelihood {
  double loglik = 0.0;
  std::vector<double> gradient;
  std::vector<double> neg_hessian;  // d x d, row-major
};

// One backward sweep over times (descending): accumulate risk sums
// S0 = sum exp(eta), S1 = sum w exp(eta), S2 = sum w w' exp(eta), and add the
// Breslow contribution of each distinct event time.
PartialLikelihood evaluate_partial(const std::vector<double>& y,
                                   const std::vector<int>& events,
                                   const std::vector<std::vector<double>>& w,
                                   const std::vector<std::size_t>& order_desc,
                                   const std::vector<double>& beta) {
  const std::size_t d = beta.size();
  PartialLikelihood out;
  out.gradient.assign(d, 0.0);
  out.neg_hessian.assign(d * d, 0.0);

  double s0 = 0.0;
  std::vector<double> s1(d, 0.0);
  std::vector<double> s2(d * d, 0.0);

  std::size_t i = 0;
  while (i < order_desc.size()) {
    const double t = y[order_desc[i]];
    std::size_t j = i;
    while (j < order_desc.size() && y[order_desc[j]] == t) {
      const std::size_t obs = order_desc[j];
      double eta = 0.0;
      for (std::size_t k = 0; k < d; ++k) eta += beta[k] * w[obs][k];
      const double e = std::exp(eta);
      s0 += e;
      for (std::size_t k = 0; k < d; ++k) {
        s1[k] += e * w[obs][k];
        for (std::size_t l = 0; l < d; ++l) {
          s2[k * d + l] += e * w[obs][k] * w[obs][l];
        }
      }
      ++j;
    }
    std::size_t n_events = 0;
    for (std::size_t m = i; m < j; ++m) {
      const std::size_t obs = order_desc[m];
      if (!events[obs]) continue;
      ++n_events;
      double eta = 0.0;
      for (std::size_t k = 0; k < d; ++k) eta += beta[k] * w[obs][k];
      out.loglik += eta;
      for (std::size_t k = 0; k < d; ++k) out.gradient[k] += w[obs][k];
    }
    if (n_events > 0) {
      const double dn = static_cast<double>(n_events);
      out.loglik -= dn * std::log(s0);
      for (std::size_t k = 0; k < d; ++k) {
        out.gradient[k] -= dn * s1[k] / s0;
        for (std::size_t l = 0; l < d; ++l) {
          out.neg_hessian[k * d + l] +=
              dn * (s2[k * d + l] / s0 - (s1[k] / s0) * (s1[l] / s0));
        }
      }
    }
    i = j;
  }
  return out;
}

// Cholesky solve of a small SPD system; throws on a non-positive pivot.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b) {
  const std::size_t d = b.size();
  for (std::size_t k = 0; k < d; ++k) {
    double pivot = a[k * d + k];
    for (std::size_t m = 0; m < k; ++m) pivot -= a[k * d + m] * a[k * d + m];
    if (!(pivot > 1e-300)) throw std::runtime_error("degenerate design");
    pivot = std::sqrt(pivot);
    a[k * d + k] = pivot;
    for (std::size_t i = k + 1; i < d; ++i) {
      double v = a[i * d + k];
      for (std::size_t m = 0; m < k; ++m) v -= a[i * d + m] * a[k * d + m];
      a[i * d + k] = v / pivot;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    double v = b[i];
    for (std::size_t m = 0; m < i; ++m) v -= a[i * d + m] * b[m];
    b[i] = v / a[i * d + i];
  }
  for (std::size_t ii = d; ii-- > 0;) {
    double v = b[ii];
    for (std::size_t m = ii + 1; m < d; ++m) v -= a[m * d + ii] * b[m];
    b[ii] = v / a[ii * d + ii];
  }
  return b;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

CoxModel cox_fit(const SurvivalSample& s, EventRole role) {
  constexpr double kTol = 1e-8;
  constexpr int kMaxIter = 50;

  const std::size_t n = s.size();
  const std::size_t d = s.covariate_dim();
  if (n == 0) throw std::invalid_argument("empty sample");
  if (d == 0) throw std::invalid_argument("cox model requires covariates");

  std::vector<int> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    events[i] = role == EventRole::Event ? s.delta[i] : 1 - s.delta[i];
  }
  if (std::none_of(events.begin(), events.end(), [](int e) { return e != 0; })) {
    throw std::invalid_argument("no events of requested role");
  }

  // Center covariates for numerical stability; the baseline is shifted back
  // at the end.
  std::vector<double> mean(d, 0.0);
  for (const auto& row : s.w) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += row[k];
  }
  for (std::size_t k = 0; k < d; ++k) mean[k] /= static_cast<double>(n);
  std::vector<std::vector<double>> wc(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) wc[i][k] = s.w[i][k] - mean[k];
  }

  std::vector<std::size_t> order_desc(n);
  std::iota(order_desc.begin(), order_desc.end(), 0);
  std::sort(order_desc.begin(), order_desc.end(),
            [&](std::size_t a, std::size_t b) { return s.y[a] > s.y[b]; });

  std::vector<double> beta(d, 0.0);
  PartialLikelihood cur = evaluate_partial(s.y, events, wc, order_desc, beta);
  int iter = 0;
  while (norm2(cur.gradient) > kTol && iter < kMaxIter) {
    ++iter;
    std::vector<double> step = solve_spd(cur.neg_hessian, cur.gradient);
    // Accept any step that does not lower the objective beyond floating-point
    // resolution; the comparison slack keeps full Newton steps near the
    // optimum from being rejected on summation noise.
    const double slack = 1e-10 * (1.0 + std::abs(cur.loglik));
    double scale = 1.0;
    for (int halving = 0; halving < 40; ++halving) {
      std::vector<double> cand(d);
      for (std::size_t k = 0; k < d; ++k) cand[k] = beta[k] + scale * step[k];
      PartialLikelihood next =
          evaluate_partial(s.y, events, wc, order_desc, cand);
      if (next.loglik >= cur.loglik - slack || scale < 1e-10) {
        beta = std::move(cand);
        cur = std::move(next);
        break;
      }
      scale *= 0.5;
    }
  }
  const double gnorm = norm2(cur.gradient);
  if (gnorm > kTol) {
    std::ostringstream msg;
    msg << "cox fit did not converge after " << iter
        << " iterations; gradient norm " << gnorm << "; last beta =";
    for (std::size_t k = 0; k < d; ++k) msg << " " << beta[k];
    throw std::runtime_error(msg.str());
  }

  // Breslow baseline at the final coefficients, on the uncentered scale.
  std::vector<std::size_t> order_asc(order_desc.rbegin(), order_desc.rend());
  std::vector<double> knots, values;
  {
    // Risk sums recomputed time-descending, consumed ascending.
    std::vector<double> s0_at;  // parallel to distinct times, descending
    std::vector<double> t_at;
    double s0 = 0.0;
    std::size_t i = 0;
    while (i < order_desc.size()) {
      const double t = s.y[order_desc[i]];
      std::size_t j = i;
      while (j < order_desc.size() && s.y[order_desc[j]] == t) {
        double eta = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          eta += beta[k] * wc[order_desc[j]][k];
        }
        s0 += std::exp(eta);
        ++j;
      }
      t_at.push_back(t);
      s0_at.push_back(s0);
      i = j;
    }
    std::reverse(t_at.begin(), t_at.end());
    std::reverse(s0_at.begin(), s0_at.end());

    double mean_eta = 0.0;
    for (std::size_t k = 0; k < d; ++k) mean_eta += beta[k] * mean[k];
    const double uncenter = std::exp(-mean_eta);

    double cum = 0.0;
    std::size_t pos = 0;
    i = 0;
    while (i < order_asc.size()) {
      const double t = s.y[order_asc[i]];
      std::size_t j = i;
      std::size_t n_events = 0;
      while (j < order_asc.size() && s.y[order_asc[j]] == t) {
        n_events += static_cast<std::size_t>(events[order_asc[j]]);
        ++j;
      }
      while (t_at[pos] < t) ++pos;
      if (n_events > 0) {
        cum += static_cast<double>(n_events) / s0_at[pos] * uncenter;
        knots.push_back(t);
        values.push_back(cum);
      }
      i = j;
    }
  }

  CoxModel model;
  model.beta = std::move(beta);
  model.baseline_cumhaz =
      StepFunction(std::move(knots), std::move(values), 0.0, true);
  model.convergence = {iter, gnorm};
  return model;
}

double conditional_survival(const CoxModel& m, double t,
                            const std::vector<double>& w) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("non-finite input");
  }
  if (w.size() != m.beta.size()) {
    throw std::invalid_argument("covariate dimension mismatch");
  }
  double eta = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) eta += m.beta[k] * w[k];
  return std::exp(-std::exp(eta) * m.baseline_cumhaz(t));
}

}  // namespace grenkit
