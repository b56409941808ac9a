#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qp2loc {

// Real-analytic 1-periodic potential held by its Fourier coefficients c_n,
// |n| <= D. Construction enforces: realness (c_{-n} = conj(c_n)), zero mean
// (c_0 = 0), smallest period 1 (gcd of active modes is 1), and sup|v| <= 1
// (by rescaling, unless disabled).
class FourierPotential {
 public:
  // Default-constructed potentials are empty placeholders (eval = 0) used in
  // config structs; every real potential goes through from_modes / preset.
  FourierPotential() = default;

  static FourierPotential from_modes(const std::map<int, std::complex<double>>& modes,
                                     bool normalize = true, double strip_width = 1.0);
  // Named presets: "sin", "cos", "sin+sin4", "cos+sin6".
  static FourierPotential preset(const std::string& name);

  double eval(double theta) const;
  double deriv(double theta) const;

  // Max of |v| (or |v'|) over one period: dense grid plus local refinement.
  double sup_abs(int grid = 8192) const;
  double sup_abs_deriv(int grid = 8192) const;

  int order() const { return order_; }
  double strip_width() const { return strip_width_; }
  // Positive-frequency coefficients; c_{-n} is implied by conjugation.
  const std::vector<std::pair<int, std::complex<double>>>& modes() const { return modes_; }
  std::complex<double> coeff(int n) const;

  nlohmann::json to_json() const;
  static FourierPotential from_json(const nlohmann::json& j, bool normalize = true);

 private:
  std::vector<std::pair<int, std::complex<double>>> modes_;  // n > 0 only, sorted
  int order_ = 0;
  double strip_width_ = 1.0;
};

struct SymmetryReport {
  enum class Kind { Asymmetric, TypeI, TypeII, Both };
  Kind kind = Kind::Asymmetric;
  std::optional<double> theta_sym;  // in [0, 1/2), present iff Type I holds
  double residual_I = 0.0;          // best mode-wise residual of the odd-point identity
  double residual_II = 0.0;         // max |c_n| over even n
};

const char* to_string(SymmetryReport::Kind k);

// Mode-wise classification: Type II iff c_n = 0 for all even n; Type I iff
// c_n e^{4*pi*i*n*theta_sym} = -conj(c_n) for all n, with theta_sym solved
// from the lowest active mode and verified on the rest.
SymmetryReport classify_symmetry(const FourierPotential& v, double tol = 1e-9);

// Line segment on the torus restricted to one parametrizing coordinate:
// theta -> (theta, a*theta + b) with |a| <= 1, 0 <= b < 1.
struct SegmentParams {
  double a = 0.0;
  double b = 0.0;
};

// g(v,a,b) = max over theta in [-1/2,1/2] of |v'(theta) + a v'(a theta + b)|.
// Dense 4096-point grid with golden-section refinement around the top cells;
// accuracy ~1e-10 for orders D <= 64.
double g_exact(const FourierPotential& v, SegmentParams p);

// Fourier lower bound for g at a = sign = +-1:
//   sign = -1:  sqrt(sum_n 4 n^2 |c_n|^2 sin^2(pi n b))
//   sign = +1:  sqrt(sum_n 4 n^2 |c_n|^2 cos^2(pi n b))
double g_fourier_lower(const FourierPotential& v, int sign, double b);

// Exact Parseval value of (2*pi)^{-2} * integral over one period of
// |v'(theta) + sign * v'(sign*theta + b)|^2. For odd v and sign = -1 this
// coincides with g_fourier_lower^2.
double segment_gradient_l2(const FourierPotential& v, int sign, double b);

// Shape functions of the two-sided gradient bounds, per symmetry class.
double gradient_shape(SymmetryReport::Kind kind, SegmentParams p);

struct TwoSidedFit {
  double c_minus = 0.0;  // largest C- with g >= C- * shape on the grid
  double c_plus = 0.0;   // smallest C+ with g <= C+ * shape on the grid
  SymmetryReport::Kind case_used = SymmetryReport::Kind::Asymmetric;
  int excluded = 0;        // grid points skipped because shape vanished
  bool symmetric_form = true;
  double uniform_min = 0.0;  // min g over the grid (asymmetric fallback)
};

// Fits the case-appropriate sandwich constants on the supplied (a,b) grid.
// Asymmetric v falls back to the uniform minimum bound g >= eps(v) > 0.
TwoSidedFit verify_two_sided(const FourierPotential& v, const std::vector<SegmentParams>& grid);

struct Truncation {
  FourierPotential potential;
  double c1_tail = 0.0;  // sum over |n| > D' of (1 + 2*pi*|n|) |c_n|
};

// Keeps modes with |n| <= new_order; no renormalization is applied.
Truncation truncate(const FourierPotential& v, int new_order);

}  // namespace qp2loc
