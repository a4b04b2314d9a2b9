#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "grenkit/rng.hpp"
#include "grenkit/survival.hpp"

using namespace grenkit;

namespace {

SurvivalSample simulate_weibull_censored(Rng& rng, int n, double event_scale,
                                         double censor_scale) {
  std::vector<double> y(n);
  std::vector<int> delta(n);
  for (int i = 0; i < n; ++i) {
    const double t =
        event_scale * std::pow(-std::log(rng.uniform_pos()), 1.0 / 4.0);
    const double c =
        censor_scale * std::pow(-std::log(rng.uniform_pos()), 1.0 / 2.0);
    y[i] = std::min(t, c);
    delta[i] = t <= c ? 1 : 0;
  }
  return SurvivalSample(std::move(y), std::move(delta));
}

// Textbook product-limit loop, written independently of the library path.
std::vector<double> product_limit_oracle(const std::vector<double>& times,
                                         const std::vector<int>& events,
                                         const std::vector<double>& at) {
  std::vector<double> out;
  for (double t : at) {
    double surv = 1.0;
    std::vector<double> distinct = times;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    for (double tk : distinct) {
      if (tk > t) break;
      int d = 0, r = 0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] >= tk) ++r;
        if (times[i] == tk && events[i] == 1) ++d;
      }
      if (d > 0) surv *= 1.0 - static_cast<double>(d) / r;
    }
    out.push_back(1.0 - surv);
  }
  return out;
}

// Cox-model data with a single covariate: baseline Weibull event times with
// relative risk exp(beta * w), independent exponential censoring.
SurvivalSample simulate_cox(Rng& rng, int n, double beta, double censor_rate) {
  std::vector<double> y(n);
  std::vector<int> delta(n);
  std::vector<std::vector<double>> w(n);
  for (int i = 0; i < n; ++i) {
    const double wi = rng.uniform(-1.0, 1.0);
    const double e = -std::log(rng.uniform_pos());
    // Lambda0(t) = t^2, so T = sqrt(E / exp(beta w)).
    const double t = std::sqrt(e * std::exp(-beta * wi));
    const double c = -std::log(rng.uniform_pos()) / censor_rate;
    y[i] = std::min(t, c);
    delta[i] = t <= c ? 1 : 0;
    w[i] = {wi};
  }
  return SurvivalSample(std::move(y), std::move(delta), std::move(w));
}

double cox_partial_loglik_1d(const SurvivalSample& s, double beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s.delta[i]) continue;
    double risk = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s.y[j] >= s.y[i]) risk += std::exp(beta * s.w[j][0]);
    }
    ll += beta * s.w[i][0] - std::log(risk);
  }
  return ll;
}

}  // namespace

TEST_CASE("ecdf of three points") {
  StepFunction f = ecdf({1, 2, 3});
  CHECK(f(1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(f(2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(f(3) == 1.0);
  CHECK(f(0.5) == 0.0);
  CHECK_THROWS_WITH_AS(ecdf({}), "empty input", std::invalid_argument);
}

TEST_CASE("ecdf stacks ties") {
  StepFunction f = ecdf({2, 2});
  REQUIRE(f.knots().size() == 1);
  CHECK(f(2) == 1.0);
}

TEST_CASE("ecdf stays uniformly close to the uniform cdf") {
  // Monte Carlo version of the usual concentration bound.
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u, 16u, 17u, 18u, 19u, 20u,
                             21u, 22u, 23u, 24u, 25u, 26u, 27u, 28u, 29u, 30u}) {
    Rng rng(seed);
    std::vector<double> u(10000);
    for (auto& v : u) v = rng.uniform();
    StepFunction f = ecdf(u);
    double sup = 0.0;
    const auto& knots = f.knots();
    const auto& vals = f.values();
    for (std::size_t j = 0; j < knots.size(); ++j) {
      sup = std::max(sup, std::abs(vals[j] - knots[j]));
      const double before = j == 0 ? 0.0 : vals[j - 1];
      sup = std::max(sup, std::abs(before - knots[j]));
    }
    REQUIRE(sup < 0.02);
  }
}

TEST_CASE("kaplan meier with all events equals the ecdf exactly") {
  SurvivalSample s({1, 2, 3}, {1, 1, 1});
  StepFunction km = kaplan_meier(s);
  StepFunction f = ecdf(s.y);
  CHECK(km.knots() == f.knots());
  CHECK(km.values() == f.values());
}

TEST_CASE("kaplan meier hand example with one censoring") {
  SurvivalSample s({1, 2, 3}, {1, 0, 1});
  StepFunction km = kaplan_meier(s);
  CHECK(km(1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(km(2) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(km(3) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(kaplan_meier(SurvivalSample{}), "empty sample",
                       std::invalid_argument);
}

TEST_CASE("kaplan meier matches an independently coded product-limit loop") {
  Rng rng(321);
  SurvivalSample s = simulate_weibull_censored(rng, 200, 1.2, 1.5);
  StepFunction km = kaplan_meier(s);
  const std::vector<double> expect =
      product_limit_oracle(s.y, s.delta, km.knots());
  for (std::size_t j = 0; j < km.knots().size(); ++j) {
    REQUIRE(km.values()[j] == doctest::Approx(expect[j]).epsilon(1e-12));
  }

  SUBCASE("cdf form is monotone with values in [0,1]") {
    double prev = 0.0;
    for (double v : km.values()) {
      REQUIRE(v >= prev);
      REQUIRE(v <= 1.0 + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("restricted mean of simple distribution functions") {
  // No mass below one: the integrand is identically 1 on [0, 1].
  StepFunction none({5.0}, {1.0}, 0.0, true);
  CHECK(restricted_mean(none, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

  StepFunction two = ecdf({1, 2});
  CHECK(restricted_mean(two, 2.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(restricted_mean(two, -0.1), std::invalid_argument);
}

TEST_CASE("restricted mean agrees with a direct sum over segments") {
  Rng rng(77);
  SurvivalSample s = simulate_weibull_censored(rng, 150, 1.0, 1.3);
  StepFunction km = kaplan_meier(s);
  const double u = *std::max_element(s.y.begin(), s.y.end());

  // Left-endpoint sums over the 1e-4 grid refined by the knots; exact for a
  // step integrand.
  std::vector<double> cuts;
  for (double t = 0.0; t < u; t += 1e-4) cuts.push_back(t);
  for (double k : km.knots()) {
    if (k < u) cuts.push_back(k);
  }
  cuts.push_back(u);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double oracle = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    oracle += (1.0 - km(cuts[i])) * (cuts[i + 1] - cuts[i]);
  }
  CHECK(restricted_mean(km, u) == doctest::Approx(oracle).epsilon(1e-6));

  SUBCASE("transform curve is non-decreasing and 1-Lipschitz") {
    DomainTransform phi = restricted_mean_curve(km);
    double prev_x = 0.0, prev_v = 0.0;
    for (double x = 0.0; x <= u; x += u / 997.0) {
      const double v = phi(x);
      REQUIRE(v >= prev_v);
      REQUIRE(v - prev_v <= (x - prev_x) + 1e-12);
      prev_x = x;
      prev_v = v;
    }
    CHECK(phi(u) == doctest::Approx(restricted_mean(km, u)).epsilon(1e-12));
  }
}

TEST_CASE("cox fit returns zero for a constant covariate") {
  SurvivalSample s({1, 2, 3, 4}, {1, 1, 0, 1},
                   {{1.0}, {1.0}, {1.0}, {1.0}});
  CoxModel m = cox_fit(s, EventRole::Event);
  CHECK(m.beta[0] == 0.0);
  CHECK(m.convergence.final_gradient_norm <= 1e-8);
}

TEST_CASE("cox fit matches a grid search of the partial likelihood") {
  SurvivalSample s({0.5, 1.0, 1.5, 2.0}, {1, 1, 1, 0},
                   {{0.2}, {-0.3}, {0.9}, {-0.5}});
  CoxModel m = cox_fit(s, EventRole::Event);

  double best_beta = 0.0, best_ll = -1e300;
  for (double b = -3.0; b <= 3.0; b += 1e-4) {
    const double ll = cox_partial_loglik_1d(s, b);
    if (ll > best_ll) {
      best_ll = ll;
      best_beta = b;
    }
  }
  CHECK(m.beta[0] == doctest::Approx(best_beta).epsilon(0.0).scale(0.0).epsilon(1e-3));
  CHECK(cox_partial_loglik_1d(s, m.beta[0]) >= cox_partial_loglik_1d(s, 0.0));
}

TEST_CASE("cox fit recovers the simulated coefficient") {
  Rng rng(2024);
  SurvivalSample s = simulate_cox(rng, 5000, 1.5, 0.4);
  CoxModel m = cox_fit(s, EventRole::Event);
  CHECK(std::abs(m.beta[0] - 1.5) < 0.1);
  CHECK(m.convergence.final_gradient_norm <= 1e-8);

  SUBCASE("baseline jumps only at event times") {
    for (double k : m.baseline_cumhaz.knots()) {
      bool is_event = false;
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.y[i] == k && s.delta[i] == 1) is_event = true;
      }
      REQUIRE(is_event);
    }
  }
}

TEST_CASE("cox fit errors") {
  SurvivalSample no_cov({1, 2}, {1, 1});
  CHECK_THROWS_AS(cox_fit(no_cov, EventRole::Event), std::invalid_argument);
  SurvivalSample all_events({1, 2}, {1, 1}, {{0.1}, {0.2}});
  CHECK_THROWS_AS(cox_fit(all_events, EventRole::Censoring),
                  std::invalid_argument);
}

TEST_CASE("conditional survival basics") {
  Rng rng(5150);
  SurvivalSample s = simulate_cox(rng, 400, 0.8, 0.4);
  CoxModel m = cox_fit(s, EventRole::Event);
  CHECK(conditional_survival(m, 0.0, {0.3}) == 1.0);

  double prev = 1.0;
  for (double t = 0.0; t < 2.0; t += 0.01) {
    const double v = conditional_survival(m, t, {0.3});
    REQUIRE(v <= prev + 1e-15);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("conditional survival with zero coefficients ignores covariates") {
  SurvivalSample s({1, 2, 3, 4}, {1, 0, 1, 1},
                   {{1.0}, {1.0}, {1.0}, {1.0}});
  CoxModel m = cox_fit(s, EventRole::Event);
  const double a = conditional_survival(m, 2.5, {1.0});
  CoxModel shifted = m;
  CHECK(conditional_survival(shifted, 2.5, {1.0}) == a);
  CHECK(a == doctest::Approx(std::exp(-m.baseline_cumhaz(2.5))).epsilon(1e-15));
}

TEST_CASE("conditional survival tracks the closed-form truth at w = 0.3") {
  Rng rng(808);
  const double beta = 1.2;
  SurvivalSample s = simulate_cox(rng, 20000, beta, 0.3);
  CoxModel m = cox_fit(s, EventRole::Event);
  const double w = 0.3;
  double sup = 0.0;
  for (double t = 0.05; t <= 1.2; t += 0.05) {
    const double truth = std::exp(-t * t * std::exp(beta * w));
    sup = std::max(sup, std::abs(conditional_survival(m, t, {w}) - truth));
  }
  CHECK(sup < 0.05);
}
