#pragma once

#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "qp2loc/green.hpp"
#include "qp2loc/hamiltonian.hpp"

namespace qp2loc {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
};

// Full dense eigendecomposition for small boxes; windowed shift-invert
// extraction (spectrum slicing over sparse LU solves, LDLT inertia counts)
// for large ones. Eigenvalues sorted ascending; vector signs fixed by making
// the largest-magnitude component positive.
std::vector<EigenPair> eigensolve(const BoxHamiltonian& h,
                                  std::optional<std::pair<double, double>> window = {});

// Eigenvalues only (dense path).
std::vector<double> eigenvalues_dense(const BoxHamiltonian& h);

// Number of eigenvalues strictly below x (LDLT inertia).
long eigenvalue_count_below(const BoxHamiltonian& h, double x);

struct DecayProfile {
  double eigenvalue = 0.0;
  Site center{0, 0};          // argmax of |psi|
  double rate = 0.0;          // fitted decay per unit max-metric distance
  double r2 = 0.0;
  double ipr = 0.0;           // sum |psi|^4 / (sum |psi|^2)^2
  bool fit_ok = false;        // r2 >= 0.8 and enough sites above the floor
};

// Least-squares fit of the log amplitude envelope (max |psi| per max-metric
// distance class) against -dist(n, center). Sites below `floor` are excluded;
// the contract floor is 1e-14, callers may raise it to the eigensolver noise
// level.
DecayProfile decay_profile(const Eigen::VectorXd& psi, const ElementaryRegion& region,
                           double floor = 1e-14, double eigenvalue = 0.0);

// Residual of the Poisson (exact resolvent) identity
//   psi(m) = -sum_{n in sub, n' not in sub, |n-n'|=1} G_sub(m,n) psi(n')
// for an eigenvector psi of the strictly larger box. Throws on precondition
// violations and resonant sub-box energies.
double poisson_check(const BoxHamiltonian& big, const Eigen::VectorXd& psi, double E,
                     const ElementaryRegion& sub, Site m);

// Smallest R in [N^{r0/2}, N^{r0}] such that every box center +[-N,N]^2 with
// center in the annulus of width 2*N^{r0/4} is good (relaxed thresholds, all
// translations of U); nullopt when no such radius exists at desk scale.
std::optional<long> annulus_scan(double lambda, double omega, std::array<double, 2> theta,
                                 const FourierPotential& v, const InteractionPotential& U,
                                 double E, long N, double r0, double gamma, double b,
                                 double relax = 100.0);

struct ResonanceScanConfig {
  double omega = 0.0;
  double lambda = 10.0;
  std::array<double, 2> theta_ref{0.0, 0.0};
  FourierPotential v;
  InteractionPotential U;
  long N = 10, M = 4;
  double K_lo = 20.0, K_hi = 40.0;  // Euclidean annulus c1 K <= |k| <= c2 K
  double gamma = 1.0, b = 0.9;
  double relax = 100.0;
};

struct ResonanceScan {
  std::vector<double> energies;               // reference M-box spectrum at theta_ref
  std::vector<std::array<long, 2>> annulus;   // scanned k, lexicographic
  std::vector<std::array<long, 2>> bad_pairs; // k with both boxes bad for some E_j
  // per-(k, j) rows actually evaluated: k1, k2, j, M-box good, N-box good
  // (N-box entry is -1 when it was not needed)
  std::vector<std::tuple<long, long, int, int, int>> rows;
  double bad_fraction = 0.0;
};

// Double-resonance elimination scan at desk scale: for each reference-box
// eigenvalue and each k in the annulus, checks the M-box and (only when that
// fails) the N-box at the translated phases, both with relaxed thresholds.
ResonanceScan double_resonance_scan(const ResonanceScanConfig& cfg);

// Max over interior window sites of |(H psi)| for psi(n,n) = (-1)^n on the
// diagonal (zero elsewhere), U = 0. Exact zero when theta2 - theta1 = 1/2 and
// v has Type II symmetry.
double zero_mode_residual(const FourierPotential& v, double omega, double lambda, double theta1,
                          double theta2, long window_radius);

}  // namespace qp2loc
