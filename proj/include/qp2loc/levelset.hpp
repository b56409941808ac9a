#pragma once

#include <optional>
#include <vector>

#include "qp2loc/potential.hpp"

namespace qp2loc {

// Parametrized torus segment theta -> (theta, a*theta + b) for theta in
// [theta0, theta0 + length].
struct TorusSegment {
  SegmentParams p;
  double theta0 = 0.0;
  double length = 1.0;
};

struct SegmentMeasureResult {
  TorusSegment segment;
  double E = 0.0;      // in w-units, i.e. (E_op - U_j) / lambda
  double delta = 0.0;
  double measure = 0.0;  // 1D parameter measure of {|w - E| <= delta}
  int resolution = 0;
};

// Measure of {theta : |v(theta) + v(a theta + b) - E| <= delta} on the segment;
// uniform grid of `resolution` cells with bisection refinement (depth 48) at
// sign changes of |w - E| - delta.
SegmentMeasureResult sublevel_measure(const FourierPotential& v, const TorusSegment& seg, double E,
                                      double delta, int resolution = 4096);

// Log-log slope of measure against delta; zero-measure rows are dropped, and
// an all-zero column reports +infinity.
double fit_alpha(const FourierPotential& v, const TorusSegment& seg, double E,
                 const std::vector<double>& deltas, int resolution = 4096);

struct LevelSegment {
  SegmentParams p;        // the segment contained in the level set
  double residual = 0.0;  // sup along the segment of |w - E|
  bool type2 = false;     // theta1 = 1/2 + theta2 (else the Type I diagonal)
};

struct LevelSegmentSearch {
  std::optional<LevelSegment> segment;
  double search_min = 0.0;  // min over the (a,b) grid of sup |w - E|
};

// Detects a straight line segment inside {v(t1)+v(t2)=E}: exists iff E = 0 and
// v symmetric, in which case the predicted segment is verified to tolerance;
// otherwise a coarse (a,b) search certifies that none fits.
LevelSegmentSearch find_level_segment(const FourierPotential& v, double E, double tol);

struct HarnackResult {
  double measured = 0.0;   // |{x in [-1,1] : |f(x)| <= lam}|
  double reference = 0.0;  // exp(2 log(lam) / log(M))
};

// Sublevel measure of an analytic (polynomial) test function f with f(0) = 1
// and |f| <= M on |z| <= 2e; coefficients are in increasing-power order.
HarnackResult harnack_sublevel(const std::vector<double>& coeffs, double M, double lam,
                               int resolution = 1 << 20);

}  // namespace qp2loc
