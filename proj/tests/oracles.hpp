// Independent reference computations used by the test suites. Everything here
// is deliberately written against the raw definitions (dense grids, direct
// enumeration, transfer matrices) rather than through the library paths it
// checks.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <vector>

#include "qp2loc/interaction.hpp"
#include "qp2loc/potential.hpp"

namespace oracle {

// Composite trapezoid rule over one period; exact for trigonometric
// polynomials sampled above Nyquist.
inline double periodic_trapezoid(const std::function<double(double)>& f, int n = 8192) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += f(static_cast<double>(i) / n);
  return acc / n;
}

// Dense-grid maximum with local golden-section polish.
inline double grid_max(const std::function<double(double)>& f, double lo, double hi,
                       int cells = 20000) {
  double best = -std::numeric_limits<double>::infinity();
  double best_x = lo;
  for (int i = 0; i <= cells; ++i) {
    const double x = lo + (hi - lo) * i / cells;
    const double y = f(x);
    if (y > best) {
      best = y;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - (hi - lo) / cells);
  double b = std::min(hi, best_x + (hi - lo) / cells);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && (b - a) > 1e-15; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return std::max({best, fc, fd});
}

// Brute-force pattern counter: hashes every restricted translate over the
// given shift window.
inline long complexity_brute_force(const qp2loc::InteractionPotential& u, int n, long window) {
  std::set<std::vector<double>> patterns;
  std::vector<double> pat(static_cast<std::size_t>(n) * n);
  for (long t1 = -window; t1 <= window; ++t1)
    for (long t2 = -window; t2 <= window; ++t2) {
      std::size_t k = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) pat[k++] = u.eval(i - t1, j - t2);
      patterns.insert(pat);
    }
  return static_cast<long>(patterns.size());
}

// 1D transfer-matrix Lyapunov exponent of h = Delta + lambda v(n w + theta) at
// energy E, with QR-style renormalization. Equals the localization rate on the
// spectrum; inside spectral gaps it is strictly larger.
inline double lyapunov_1d(const qp2loc::FourierPotential& v, double lambda, double omega,
                          double theta, double E, long steps = 200000) {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;
  double log_sum = 0.0;
  for (long n = 1; n <= steps; ++n) {
    const double d = E - lambda * v.eval(n * omega + theta);
    // T_n = [[d, -1], [1, 0]]
    const double b11 = d * a11 - a21, b12 = d * a12 - a22;
    const double b21 = a11, b22 = a12;
    a11 = b11;
    a12 = b12;
    a21 = b21;
    a22 = b22;
    const double norm = std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
    log_sum += std::log(norm);
    a11 /= norm;
    a12 /= norm;
    a21 /= norm;
    a22 /= norm;
  }
  return log_sum / static_cast<double>(steps);
}

// Minimum of the Lyapunov exponent over an energy grid in [e_lo, e_hi]; the
// minimum over a grid that intersects the spectrum recovers the on-spectrum
// rate (gap energies only raise the exponent).
inline double lyapunov_min_over_band(const qp2loc::FourierPotential& v, double lambda,
                                     double omega, double theta, double e_lo, double e_hi,
                                     int grid = 24, long steps = 200000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    const double e = e_lo + (e_hi - e_lo) * i / grid;
    best = std::min(best, lyapunov_1d(v, lambda, omega, theta, e, steps));
  }
  return best;
}

}  // namespace oracle
