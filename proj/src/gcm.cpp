#include "grenkit/gcm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grenkit {

namespace {

// Slack for collinearity merging in floating-point cross-product tests.
constexpr double kCollinearSlack = 1e-12;

}  // namespace

CusumDiagram::CusumDiagram(std::vector<DiagramPoint> points, double u_max)
    : points_(std::move(points)), u_max_(u_max) {
  if (points_.empty()) throw std::invalid_argument("empty diagram");
  if (!std::isfinite(u_max_)) throw std::invalid_argument("non-finite input");
  for (const auto& p : points_) {
    if (!std::isfinite(p.u) || !std::isfinite(p.g)) {
      throw std::invalid_argument("non-finite input");
    }
  }
  if (points_.front().u != 0.0) {
    throw std::invalid_argument("diagram must start at u = 0");
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].u < points_[i - 1].u) {
      throw std::invalid_argument("diagram abscissae must be non-decreasing");
    }
  }
  if (points_.back().u > u_max_) {
    throw std::invalid_argument("diagram exceeds u_max");
  }
}

ConvexMinorant::ConvexMinorant(std::vector<DiagramPoint> hull_points)
    : hull_(std::move(hull_points)) {
  if (hull_.empty()) throw std::invalid_argument("empty diagram");
  slopes_.reserve(hull_.size() - 1);
  for (std::size_t i = 1; i < hull_.size(); ++i) {
    if (hull_[i].u <= hull_[i - 1].u) {
      throw std::invalid_argument("hull abscissae must be strictly increasing");
    }
    double s = (hull_[i].g - hull_[i - 1].g) / (hull_[i].u - hull_[i - 1].u);
    if (!slopes_.empty() && s <= slopes_.back()) {
      throw std::invalid_argument("hull slopes must be strictly increasing");
    }
    slopes_.push_back(s);
  }
}

double ConvexMinorant::value_at(double u) const {
  if (u < hull_.front().u || u > hull_.back().u) {
    throw std::invalid_argument("outside diagram domain");
  }
  auto it = std::upper_bound(
      hull_.begin(), hull_.end(), u,
      [](double lhs, const DiagramPoint& p) { return lhs < p.u; });
  if (it == hull_.begin()) return hull_.front().g;
  std::size_t j = static_cast<std::size_t>(it - hull_.begin()) - 1;
  if (j + 1 == hull_.size()) return hull_.back().g;
  return hull_[j].g + slopes_[j] * (u - hull_[j].u);
}

ConvexMinorant gcm(const CusumDiagram& diagram) {
  // Collapse duplicate abscissae to the minimum ordinate: the GCM only sees
  // the lower envelope of the point set.
  std::vector<DiagramPoint> pts;
  pts.reserve(diagram.points().size());
  for (const auto& p : diagram.points()) {
    if (!pts.empty() && pts.back().u == p.u) {
      pts.back().g = std::min(pts.back().g, p.g);
    } else {
      pts.push_back(p);
    }
  }

  // Monotone-stack lower hull. The middle point b of (a, b, c) survives only
  // if the turn is strictly convex; ties within the slack merge collinear
  // segments.
  std::vector<DiagramPoint> hull;
  hull.reserve(pts.size());
  for (const auto& c : pts) {
    while (hull.size() >= 2) {
      const DiagramPoint& a = hull[hull.size() - 2];
      const DiagramPoint& b = hull[hull.size() - 1];
      const double lhs = (b.u - a.u) * (c.g - a.g);
      const double rhs = (b.g - a.g) * (c.u - a.u);
      const double cross = lhs - rhs;
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      if (cross <= kCollinearSlack * scale) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(c);
  }
  return ConvexMinorant(std::move(hull));
}

double left_derivative(const ConvexMinorant& m, double u) {
  const auto& hull = m.hull_points();
  if (u <= hull.front().u) {
    throw std::invalid_argument(
        "left derivative undefined at or below left endpoint");
  }
  if (u > hull.back().u) {
    throw std::invalid_argument("outside diagram domain");
  }
  // u lies in (hull[j].u, hull[j+1].u]; return the slope of that segment.
  auto it = std::lower_bound(
      hull.begin(), hull.end(), u,
      [](const DiagramPoint& p, double rhs) { return p.u < rhs; });
  std::size_t j = static_cast<std::size_t>(it - hull.begin());
  return m.segment_slopes()[j - 1];
}

namespace {

CusumDiagram diagram_of(const StepFunction& gamma, const StepFunction& phi,
                        double u_max) {
  if (gamma.knots() != phi.knots()) {
    throw std::invalid_argument("grid mismatch");
  }
  std::vector<DiagramPoint> pts;
  pts.reserve(gamma.knots().size() + 1);
  pts.push_back({0.0, gamma.left_limit()});
  for (std::size_t j = 0; j < gamma.knots().size(); ++j) {
    pts.push_back({phi.values()[j], gamma.values()[j]});
  }
  return CusumDiagram(std::move(pts), u_max);
}

}  // namespace

double iso(const StepFunction& gamma, const StepFunction& phi, double u_max,
           double x) {
  if (!phi.monotone()) {
    throw std::logic_error("transform must be monotone");
  }
  const double u = phi(x);
  if (u <= 0.0) throw std::invalid_argument("evaluation at left boundary");
  ConvexMinorant hull = gcm(diagram_of(gamma, phi, u_max));
  return left_derivative(hull, u);
}

std::pair<bool, bool> switch_check(const StepFunction& gamma,
                                   const StepFunction& phi, double u_max,
                                   double x, double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("non-finite input");
  const bool lhs = iso(gamma, phi, u_max, x) > c;

  // Exhaustive scan of v |-> c*phi(v) - gamma(v) over the left endpoint and
  // the knots in the image of phi^-, keeping the largest maximizer.
  double best = c * phi.left_limit() - gamma.left_limit();
  double arg_sup = 0.0;
  for (std::size_t j = 0; j < phi.knots().size(); ++j) {
    const double v = phi.knots()[j];
    if (generalized_inverse(phi, phi.values()[j]) != v) continue;
    const double obj = c * phi.values()[j] - gamma.values()[j];
    if (obj >= best) {
      best = obj;
      arg_sup = v;
    }
  }
  const bool rhs = arg_sup < generalized_inverse(phi, phi(x));
  return {lhs, rhs};
}

}  // namespace grenkit
