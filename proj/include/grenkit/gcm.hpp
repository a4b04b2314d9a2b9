#pragma once

#include <utility>
#include <vector>

#include "grenkit/step_function.hpp"

namespace grenkit {

struct DiagramPoint {
  double u = 0.0;
  double g = 0.0;
  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

// Finite point set {(u_j, g_j)} on the transformed domain [0, u_max]. The
// first point sits at u = 0 (the left endpoint of the isotonization
// interval) and abscissae are non-decreasing.
class CusumDiagram {
 public:
  CusumDiagram(std::vector<DiagramPoint> points, double u_max);

  const std::vector<DiagramPoint>& points() const { return points_; }
  double u_max() const { return u_max_; }

 private:
  std::vector<DiagramPoint> points_;
  double u_max_;
};

// Lower convex hull of a diagram: vertices are a subsequence of the diagram
// points and segment slopes are strictly increasing (collinear runs merged).
class ConvexMinorant {
 public:
  explicit ConvexMinorant(std::vector<DiagramPoint> hull_points);

  const std::vector<DiagramPoint>& hull_points() const { return hull_; }
  const std::vector<double>& segment_slopes() const { return slopes_; }

  // Piecewise-linear hull value; defined on [first u, last u].
  double value_at(double u) const;

 private:
  std::vector<DiagramPoint> hull_;
  std::vector<double> slopes_;
};

// Greatest convex minorant of the diagram's point set. Duplicate abscissae
// are collapsed to the minimum ordinate before hull construction.
ConvexMinorant gcm(const CusumDiagram& diagram);

// Slope of the hull segment whose interval contains u, intervals treated as
// left-open right-closed; at an interior hull vertex this is the slope of
// the segment ending there.
double left_derivative(const ConvexMinorant& m, double u);

// The isotonization operator: builds the cusum diagram of (gamma, phi) over
// phi's jump points, prefixed by (0, gamma's left limit), and returns the
// left derivative of its GCM at phi(x). gamma and phi must share the same
// knot grid.
double iso(const StepFunction& gamma, const StepFunction& phi, double u_max,
           double x);

// Both sides of the switch relation, computed independently: first component
// is [iso(...) > c], second is [sup argmax_v {c*phi(v) - gamma(v)} <
// phi^-(phi(x))] with v scanned over the diagram knots in the image of the
// generalized inverse. Test-support code.
std::pair<bool, bool> switch_check(const StepFunction& gamma,
                                   const StepFunction& phi, double u_max,
                                   double x, double c);

}  // namespace grenkit
