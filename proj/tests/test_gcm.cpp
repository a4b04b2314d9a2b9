#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "grenkit/gcm.hpp"
#include "grenkit/rng.hpp"
#include "grenkit/step_function.hpp"

using namespace grenkit;

namespace {

// Independent oracle: the greatest convex minorant of a finite point set at
// t equals the minimum over all chords spanning t. Quadratic in the number
// of points; used only for verification.
double chord_oracle(const std::vector<DiagramPoint>& pts, double t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].u == t) best = std::min(best, pts[i].g);
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].u <= t && t <= pts[j].u && pts[j].u > pts[i].u) {
        const double frac = (t - pts[i].u) / (pts[j].u - pts[i].u);
        best = std::min(best, pts[i].g + frac * (pts[j].g - pts[i].g));
      }
    }
  }
  return best;
}

std::vector<DiagramPoint> random_diagram_points(Rng& rng, int n_steps,
                                                bool allow_flat_u = false) {
  std::vector<DiagramPoint> pts{{0.0, 0.0}};
  double u = 0.0, g = 0.0;
  for (int k = 0; k < n_steps; ++k) {
    const double du =
        allow_flat_u && rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.01, 1.0);
    u += du;
    g += rng.uniform(-0.5, 1.0);
    pts.push_back({u, g});
  }
  return pts;
}

StepFunction identity_on_knots(const std::vector<double>& knots) {
  return StepFunction(knots, knots, 0.0, true);
}

}  // namespace

TEST_CASE("gcm merges collinear points into one segment") {
  CusumDiagram d({{0, 0}, {1, 1}, {2, 2}}, 2.0);
  ConvexMinorant hull = gcm(d);
  REQUIRE(hull.hull_points().size() == 2);
  CHECK(hull.hull_points().front() == DiagramPoint{0, 0});
  CHECK(hull.hull_points().back() == DiagramPoint{2, 2});
  REQUIRE(hull.segment_slopes().size() == 1);
  CHECK(hull.segment_slopes()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("gcm drops a point above the chord") {
  CusumDiagram d({{0, 0}, {1, 2}, {2, 2}}, 2.0);
  ConvexMinorant hull = gcm(d);
  REQUIRE(hull.hull_points().size() == 2);
  CHECK(hull.hull_points()[0] == DiagramPoint{0, 0});
  CHECK(hull.hull_points()[1] == DiagramPoint{2, 2});
  CHECK(hull.segment_slopes()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("random 6-point diagram agrees with the chord oracle on a grid") {
  Rng rng(61);
  std::vector<DiagramPoint> pts{{0.0, 0.0}};
  double g = 0.0;
  for (int u = 1; u <= 5; ++u) {
    g += rng.uniform();
    pts.push_back({static_cast<double>(u), g});
  }
  ConvexMinorant hull = gcm(CusumDiagram(pts, 5.0));
  for (double t = 0.0; t <= 5.0; t += 1e-3) {
    REQUIRE(std::abs(hull.value_at(t) - chord_oracle(pts, t)) <= 1e-9);
  }

  SUBCASE("left derivative matches a finite difference of the oracle") {
    const double h = 1e-6;
    const double fd = (chord_oracle(pts, 2.5) - chord_oracle(pts, 2.5 - h)) / h;
    CHECK(std::abs(left_derivative(hull, 2.5) - fd) <= 1e-6);
  }
}

TEST_CASE("left derivative uses the segment ending at a hull knot") {
  ConvexMinorant chord({{0, 0}, {2, 2}});
  CHECK(left_derivative(chord, 1.0) == doctest::Approx(1.0).epsilon(1e-15));

  ConvexMinorant kinked({{0, 0}, {1, 0.5}, {2, 2}});
  CHECK(left_derivative(kinked, 1.0) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_WITH_AS(left_derivative(chord, 0.0),
                       "left derivative undefined at or below left endpoint",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(left_derivative(chord, -1.0),
                       "left derivative undefined at or below left endpoint",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(left_derivative(chord, 2.5), "outside diagram domain",
                       std::invalid_argument);
}

TEST_CASE("diagram construction rejects bad input") {
  CHECK_THROWS_WITH_AS(CusumDiagram({}, 1.0), "empty diagram",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      CusumDiagram({{0, 0}, {1, std::numeric_limits<double>::infinity()}},
                   1.0),
      "non-finite input", std::invalid_argument);
  CHECK_THROWS_AS(CusumDiagram({{0, 0}, {0.5, 1}, {0.2, 2}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("generalized inverse of an empirical distribution") {
  StepFunction f({1, 2, 3}, {1.0 / 3, 2.0 / 3, 1.0}, 0.0, true);
  CHECK(generalized_inverse(f, 0.5) == 2.0);
  CHECK(generalized_inverse(f, 1.0 / 3) == 1.0);
  CHECK_THROWS_WITH_AS(generalized_inverse(f, 1.1), "inverse out of range",
                       std::invalid_argument);
}

TEST_CASE("generalized inverse satisfies the infimum property on a grid") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> knots, values;
    double k = 0.0, v = 0.0;
    for (int j = 0; j < 8; ++j) {
      k += rng.uniform(0.05, 0.5);
      v += rng.uniform(0.0, 0.4);
      knots.push_back(k);
      values.push_back(v);
    }
    StepFunction f(knots, values, 0.0, true);
    const double y = rng.uniform(1e-12, f.max_value());
    const double inv = generalized_inverse(f, y);
    CHECK(f(inv) >= y);
    for (double x = 0.0; x < inv - 1e-9; x += 1e-3) {
      REQUIRE(f(x) < y);
    }
  }
}

TEST_CASE("iso on the identity primitive returns slope one") {
  StepFunction f({1, 2, 3}, {1.0 / 3, 2.0 / 3, 1.0}, 0.0, true);
  CHECK(iso(f, f, 1.0, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("iso pools the two-point regression violator") {
  // Sorted exposures (1, 2) with responses (2, 1): the cusum diagram is
  // {(0,0), (1/2, 1), (1, 3/2)} and the pooled fit at a = 2 is 1.5.
  StepFunction gamma({1, 2}, {1.0, 1.5}, 0.0, false);
  StepFunction phi({1, 2}, {0.5, 1.0}, 0.0, true);
  CHECK(iso(gamma, phi, 1.0, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("iso rejects boundary evaluation and mismatched grids") {
  StepFunction f({1, 2, 3}, {1.0 / 3, 2.0 / 3, 1.0}, 0.0, true);
  CHECK_THROWS_WITH_AS(iso(f, f, 1.0, 0.5), "evaluation at left boundary",
                       std::invalid_argument);
  StepFunction other({1, 2, 4}, {1.0 / 3, 2.0 / 3, 1.0}, 0.0, true);
  CHECK_THROWS_WITH_AS(iso(f, other, 1.0, 2.0), "grid mismatch",
                       std::invalid_argument);
}

TEST_CASE("switch relation on the identity diagram") {
  StepFunction f({1, 2, 3}, {1.0 / 3, 2.0 / 3, 1.0}, 0.0, true);
  CHECK(switch_check(f, f, 1.0, 2.0, 0.5) == std::pair{true, true});
  CHECK(switch_check(f, f, 1.0, 2.0, 1.5) == std::pair{false, false});
}

TEST_CASE("switch relation holds on randomized diagrams") {
  Rng rng(1729);
  int checked = 0;
  for (int rep = 0; rep < 500; ++rep) {
    const int m = 2 + static_cast<int>(rng.uniform() * 12);
    std::vector<double> knots, gv, pv;
    double k = 0.0, g = 0.0, p = 0.0;
    for (int j = 0; j < m; ++j) {
      k += rng.uniform(0.05, 1.0);
      g += rng.uniform() < 0.15 ? 0.0 : rng.uniform(0.0, 1.0);
      p += rng.uniform() < 0.15 ? 0.0 : rng.uniform(0.05, 1.0);
      knots.push_back(k);
      gv.push_back(g);
      pv.push_back(p);
    }
    StepFunction gamma(knots, gv, 0.0, false);
    StepFunction phi(knots, pv, 0.0, true);
    const double u_max = pv.back();

    for (int j = 0; j < m; ++j) {
      if (!(pv[j] > 0.0 && pv[j] < u_max)) continue;
      const double c = rng.uniform(-0.5, 2.5);
      const auto [lhs, rhs] = switch_check(gamma, phi, u_max, knots[j], c);
      REQUIRE(lhs == rhs);
      ++checked;
    }
  }
  CHECK(checked > 2000);
}

TEST_CASE("hull invariants on random diagrams") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + static_cast<int>(rng.uniform() * 24);
    auto pts = random_diagram_points(rng, m, true);
    CusumDiagram d(pts, pts.back().u + 1e-9);
    ConvexMinorant hull = gcm(d);

    for (const auto& p : pts) {
      REQUIRE(hull.value_at(p.u) <= p.g + 1e-12);
    }
    for (std::size_t s = 1; s < hull.segment_slopes().size(); ++s) {
      REQUIRE(hull.segment_slopes()[s] > hull.segment_slopes()[s - 1]);
    }
    CHECK(hull.hull_points().front().u == pts.front().u);
    CHECK(hull.hull_points().back().u == pts.back().u);

    // Idempotence: the hull of its own vertex set is itself.
    ConvexMinorant hull2 = gcm(CusumDiagram(hull.hull_points(), d.u_max()));
    REQUIRE(hull2.hull_points() == hull.hull_points());
    REQUIRE(hull2.segment_slopes() == hull.segment_slopes());
  }
}

TEST_CASE("scaling the ordinates scales every left derivative") {
  Rng rng(4242);
  for (int rep = 0; rep < 50; ++rep) {
    auto pts = random_diagram_points(rng, 10);
    const double lambda = rng.uniform(0.1, 5.0);
    auto scaled = pts;
    for (auto& p : scaled) p.g *= lambda;
    ConvexMinorant h1 = gcm(CusumDiagram(pts, pts.back().u));
    ConvexMinorant h2 = gcm(CusumDiagram(scaled, pts.back().u));
    for (int k = 0; k < 10; ++k) {
      const double u = rng.uniform(1e-6, pts.back().u);
      REQUIRE(left_derivative(h2, u) ==
              doctest::Approx(lambda * left_derivative(h1, u)).epsilon(1e-9));
    }
  }
}

TEST_CASE("iso with the identity transform is plain differentiation") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> knots, gv;
    double k = 0.0, g = 0.0;
    for (int j = 0; j < 9; ++j) {
      k += rng.uniform(0.05, 1.0);
      g += rng.uniform();
      knots.push_back(k);
      gv.push_back(g);
    }
    StepFunction gamma(knots, gv, 0.0, true);
    StepFunction phi = identity_on_knots(knots);

    std::vector<DiagramPoint> pts{{0.0, 0.0}};
    for (std::size_t j = 0; j < knots.size(); ++j) {
      pts.push_back({knots[j], gv[j]});
    }
    ConvexMinorant hull = gcm(CusumDiagram(pts, knots.back()));
    for (std::size_t j = 0; j < knots.size(); ++j) {
      REQUIRE(iso(gamma, phi, knots.back(), knots[j]) ==
              doctest::Approx(left_derivative(hull, knots[j])).epsilon(1e-14));
    }
  }
}
