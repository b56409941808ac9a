#include "qp2loc/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

namespace {

// Measure of {x in [lo,hi] : f(x) <= 0} from a uniform grid with bisection
// refinement of the crossing inside each sign-change cell.
double sublevel_measure_1d(const std::function<double(double)>& f, double lo, double hi, int cells,
                           int depth = 48) {
  const double h = (hi - lo) / cells;
  double measure = 0.0;
  double x_prev = lo, f_prev = f(lo);
  for (int i = 1; i <= cells; ++i) {
    const double x = lo + i * h;
    const double fx = f(x);
    if (f_prev <= 0.0 && fx <= 0.0) {
      measure += h;
    } else if (f_prev * fx < 0.0) {
      // locate the crossing
      double a = x_prev, b = x, fa = f_prev;
      for (int d = 0; d < depth; ++d) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fa <= 0.0) == (fm <= 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      const double cross = 0.5 * (a + b);
      measure += (f_prev <= 0.0) ? (cross - x_prev) : (x - cross);
    }
    x_prev = x;
    f_prev = fx;
  }
  return measure;
}

}  // namespace

SegmentMeasureResult sublevel_measure(const FourierPotential& v, const TorusSegment& seg, double E,
                                      double delta, int resolution) {
  if (resolution < (1 << 12)) throw std::invalid_argument("sublevel_measure: resolution below 2^12");
  SegmentMeasureResult res;
  res.segment = seg;
  res.E = E;
  res.delta = delta;
  res.resolution = resolution;
  if (seg.length <= 0.0) return res;
  auto margin = [&](double t) {
    return std::abs(v.eval(t) + v.eval(seg.p.a * t + seg.p.b) - E) - delta;
  };
  res.measure = sublevel_measure_1d(margin, seg.theta0, seg.theta0 + seg.length, resolution);
  return res;
}

double fit_alpha(const FourierPotential& v, const TorusSegment& seg, double E,
                 const std::vector<double>& deltas, int resolution) {
  if (deltas.size() < 2) throw std::invalid_argument("fit_alpha: need several deltas");
  double lo = *std::min_element(deltas.begin(), deltas.end());
  double hi = *std::max_element(deltas.begin(), deltas.end());
  if (hi / lo < 1e4) throw std::invalid_argument("fit_alpha: need >= 4 decades of delta");
  std::vector<double> xs, ys;
  for (double d : deltas) {
    const double m = sublevel_measure(v, seg, E, d, resolution).measure;
    if (m <= 0.0) continue;
    xs.push_back(std::log(d));
    ys.push_back(std::log(m));
  }
  if (xs.empty()) return std::numeric_limits<double>::infinity();
  if (xs.size() < 2) return 0.0;
  return linear_fit(xs, ys).slope;
}

LevelSegmentSearch find_level_segment(const FourierPotential& v, double E, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("find_level_segment: tol must be positive");
  LevelSegmentSearch out;

  auto sup_residual = [&](SegmentParams p) {
    double worst = 0.0;
    const int n = 2048;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      worst = std::max(worst, std::abs(v.eval(t) + v.eval(p.a * t + p.b) - E));
    }
    return worst;
  };

  const SymmetryReport rep = classify_symmetry(v);
  const bool symmetric = rep.kind != SymmetryReport::Kind::Asymmetric;
  if (symmetric && std::abs(E) <= tol) {
    // Type II puts the segment at theta1 = 1/2 + theta2; Type I at the
    // reflected diagonal through theta_sym.
    std::vector<LevelSegment> candidates;
    if (rep.kind == SymmetryReport::Kind::TypeII || rep.kind == SymmetryReport::Kind::Both)
      candidates.push_back({SegmentParams{1.0, 0.5}, 0.0, true});
    if (rep.theta_sym) {
      double b = std::fmod(2.0 * (*rep.theta_sym), 1.0);
      if (b < 0) b += 1.0;
      candidates.push_back({SegmentParams{-1.0, b}, 0.0, false});
    }
    for (auto& c : candidates) {
      c.residual = sup_residual(c.p);
      if (c.residual <= tol) {
        out.segment = c;
        return out;
      }
    }
  }

  // Certify absence: coarse scan over (a,b) of the sup residual.
  double best = std::numeric_limits<double>::infinity();
  const int na = 81, nb = 80;
  for (int i = 0; i <= na; ++i) {
    SegmentParams p;
    p.a = -1.0 + 2.0 * i / na;
    for (int j = 0; j < nb; ++j) {
      p.b = static_cast<double>(j) / nb;
      best = std::min(best, sup_residual(p));
      if (best <= tol) break;
    }
  }
  out.search_min = best;
  return out;
}

HarnackResult harnack_sublevel(const std::vector<double>& coeffs, double M, double lam,
                               int resolution) {
  if (coeffs.empty() || std::abs(coeffs[0] - 1.0) > 1e-12)
    throw std::invalid_argument("harnack_sublevel: need f(0) = 1");
  if (!(M > 1.0) || !(lam > 0.0))
    throw std::invalid_argument("harnack_sublevel: need M > 1 and lam > 0");
  auto f = [&](double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return std::abs(acc) - lam;
  };
  HarnackResult res;
  res.measured = sublevel_measure_1d(f, -1.0, 1.0, resolution);
  res.reference = std::exp(2.0 * std::log(lam) / std::log(M));
  return res;
}

}  // namespace qp2loc
