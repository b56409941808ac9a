#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qp2loc/hamiltonian.hpp"

namespace qp2loc {

// E too close to an eigenvalue for a trustworthy solve.
struct ResonantEnergy : std::runtime_error {
  explicit ResonantEnergy(double nearest)
      : std::runtime_error("resonant energy (nearest eigenvalue ~ " + std::to_string(nearest) + ")"),
        nearest_eigenvalue(nearest) {}
  double nearest_eigenvalue;
};

struct PreconditionError : std::runtime_error {
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

struct GreenSolve {
  Eigen::MatrixXd G;
  double residual_inf = 0.0;   // max |(H-E)G - I| over sampled columns
  double cond_estimate = 0.0;  // 1-norm condition estimate
};

// G = (H_Lambda - E)^{-1} by dense LU; throws ResonantEnergy past cond 1e14.
GreenSolve green(const BoxHamiltonian& h, double E);

struct GreenReport {
  double E = 0.0;
  double norm_spectral = 0.0;  // used by the flags
  double norm_hs = 0.0;
  double gamma_fit = 0.0;  // log-linear fit of the per-distance envelope, d >= sigma/4
  bool gamma_fit_ok = false;
  bool good_norm = false;   // ||G|| < relax * lambda^{-1} e^{sigma^b}
  bool good_decay = false;  // |G(n,m)| < relax * e^{-gamma |n-m|} for |n-m| >= sigma/4
  bool resonant = false;
  double gamma = 0.0, b = 0.0;
};

struct ClassifyOptions {
  bool all_translations = false;  // require the bounds for every distinct translate of U
  double relax = 1.0;             // threshold relaxation factor (e.g. 100 for scans)
  bool resonant_is_bad = false;   // scans: count unresolvable solves as bad instead of throwing
};

GreenReport classify(const BoxHamiltonian& h, double E, double gamma, double b,
                     const ClassifyOptions& opt = {});

// |v(t1 + n1 w) + v(t2 + n2 w) - (E - U_j)/lambda| > delta on every site, for
// every value U_j of U.
bool vlevel_check(std::array<double, 2> theta, const ElementaryRegion& region, double omega,
                  const FourierPotential& v, const InteractionPotential& U, double E,
                  double lambda, double delta);

struct NeumannReport {
  double q = 0.0;                   // 16 / (lambda delta)
  double max_entry_violation = 0.0; // max over pairs of |G| - (1-q)^{-1} q^{d+1}
  double norm_violation = 0.0;      // ||G|| - 8 / (lambda delta)
};

// Verifies the diagonal-dominated resolvent bounds; preconditions (level-set
// clearance, q < 1) are enforced and failures are named.
NeumannReport neumann_verify(const BoxHamiltonian& h, double E, double delta);

// Checks that a diagonal perturbation below e^{-3 gamma1 N} at most doubles
// the inverse bounds. Throws PreconditionError when the hypotheses fail.
bool perturb_verify(const BoxHamiltonian& h1, const BoxHamiltonian& h2, double E, double gamma,
                    double b);

struct PasteResult {
  bool ok = false;
  double norm = 0.0;         // ||G_Lambda||
  double bound = 0.0;        // 2 N^2 A
  std::optional<Site> failing_site;
  std::string failure;
};

// Covering bound: windows W(m) around every site with good local inverses and
// boundary decay e^{-tN} paste into ||G_Lambda|| <= 2 N^2 A, provided
// 4 N^2 e^{-tN} <= 1/2.
PasteResult paste_norm(const BoxHamiltonian& h,
                       const std::function<std::vector<Site>(Site)>& window_of, double E, double A,
                       double t, long N);

struct LineSegment {
  std::array<double, 2> origin{0.0, 0.0};
  std::array<double, 2> dir{1.0, 0.0};  // unit direction
  double length = 1.0;
};

struct MeasureEstimate {
  double estimate = 0.0;  // 1D measure of bad phases along the segment
  double ci_lo = 0.0, ci_hi = 0.0;
  int bad = 0, total = 0;
};

// Stratified Monte Carlo along a phase-space segment: equal strata, midpoint
// jitter, deterministic seed. Resonant solves count as bad.
MeasureEstimate badset_measure_on_line(const LineSegment& line, const ElementaryRegion& region,
                                       double E, double gamma, double b, int n_samples,
                                       double lambda, double omega, const FourierPotential& v,
                                       const InteractionPotential& U, std::uint64_t seed);

struct MultiscaleConfig {
  std::vector<long> scales;  // ladder of sigma values
  int boxes_per_scale = 24;
  double lambda = 10.0;
  double omega = 0.0;
  double E = 0.0;
  double gamma = 0.0;  // classification threshold rate
  double b = 0.9;
  double delta_prime = 0.5;  // drift tolerance exponent
  FourierPotential v;
  InteractionPotential U;
  std::array<double, 2> theta{0.0, 0.0};
  std::uint64_t seed = 1;
};

struct MultiscaleRow {
  long scale = 0;
  double bad_fraction = 0.0;
  double gamma_fit_median = 0.0;
  bool drift_ok = true;  // gamma did not collapse relative to the previous scale
};

struct MultiscaleResult {
  std::vector<MultiscaleRow> rows;
  std::vector<std::string> warnings;
};

// Samples boxes at random lattice translates per scale, classifies them, and
// tracks the fitted decay rate across the ladder.
MultiscaleResult multiscale_sweep(const MultiscaleConfig& cfg);

}  // namespace qp2loc
