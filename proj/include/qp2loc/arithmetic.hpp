#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qp2loc {

// Frequency presets: "golden" = (sqrt(5)-1)/2, "sqrt2m1" = sqrt(2)-1.
double omega_preset(const std::string& name);

struct FrequencyData {
  double omega = 0.0;
  std::vector<long long> partial_quotients;
  std::vector<std::array<long long, 2>> convergents;  // (p, q) pairs
  bool rational_terminated = false;                   // expansion ended early
};

// Standard continued-fraction expansion of omega in (0,1); stops early when
// the remainder drops below floating noise (rational or near-rational input).
FrequencyData continued_fraction(double omega, int depth);

// Distance from k*omega to the nearest integer, in [0, 1/2]. Uses extended
// precision for the reduction; |k| is capped at 1e7.
double torus_norm(long long k, double omega);
// Signed representative of k*omega mod 1 in [-1/2, 1/2).
double torus_signed(long long k, double omega);
// Fractional part {k*omega} in [0,1).
double torus_frac(long long k, double omega);

struct DiophantineCheck {
  bool ok = false;
  long long worst_k = 0;   // minimizer of ||k omega|| |k|^{1+delta}
  double min_value = 0.0;  // the minimum itself
};

// Checks ||k omega|| >= C_dio |k|^{-1-delta_dio} for 1 <= |k| <= N.
DiophantineCheck diophantine_check(double omega, long long N, double c_dio, double delta_dio);

// Largest constant passing the check at scale N: min_k ||k omega|| |k|^{1+delta}.
double best_dio_constant(double omega, long long N, double delta_dio);

// Thin planar set given by a membership predicate on [0,1]^2 together with
// (an estimate of) the length of the longest line segment it contains.
struct ThinBand {
  std::function<bool(double, double)> contains;
  double eta = 0.0;
};

ThinBand full_square_band();
// Band |theta2 - f(theta1)| <= half_width restricted to theta1 in [x_lo, x_hi];
// eta must be supplied by the caller (analytic families know it).
ThinBand graph_band(std::function<double(double)> f, double half_width, double x_lo, double x_hi,
                    double eta);

// Monte-Carlo estimate of the longest contained segment (documented estimate).
double estimate_eta(const ThinBand& band, int n_probes, std::uint64_t seed);

struct BandCountResult {
  std::vector<std::array<long long, 2>> hits;  // (k1, k2), lexicographic order
  long long count = 0;
  double envelope_exponent = 0.0;  // 3/4 + 3*delta_dio reference exponent
};

// Exact enumeration of {(k1,k2): |k_i| <= N, ({k1 w},{k2 w}) in band}; the
// count is reported next to the reference envelope exponent 3/4 + 3*delta.
BandCountResult lattice_points_in_band(const ThinBand& band, double omega, long long N,
                                       double delta_dio = 0.01);

struct ShortVectorResult {
  long long count = 0;            // distinct short difference vectors, Euclidean length
  long long per_component = 0;    // j in [1, 2N] with ||j omega|| <= 2 N^{-3/4}
  double threshold = 0.0;         // 2 N^{-3/4}
};

// Distinct difference vectors v = p1 - p2 between N-lattice points with
// |v| <= 2 N^{-3/4}; components are reduced representatives of (k - k') omega.
ShortVectorResult short_distance_vectors(double omega, long long N);

}  // namespace qp2loc
