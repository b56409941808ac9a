#include "qp2loc/arithmetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

namespace {
constexpr long long kMaxK = 10'000'000;  // reduction accuracy cap

long double reduce_frac(long double x) {
  long double f = x - std::floor(x);
  if (f >= 1.0L) f -= 1.0L;
  if (f < 0.0L) f += 1.0L;
  return f;
}
}  // namespace

double omega_preset(const std::string& name) {
  if (name == "golden") return 0.5 * (std::sqrt(5.0) - 1.0);
  if (name == "sqrt2m1") return std::sqrt(2.0) - 1.0;
  throw std::invalid_argument("unknown omega preset '" + name + "'");
}

FrequencyData continued_fraction(double omega, int depth) {
  if (!(omega > 0.0 && omega < 1.0)) throw std::invalid_argument("continued_fraction: omega must be in (0,1)");
  if (depth < 1) throw std::invalid_argument("continued_fraction: depth must be >= 1");
  FrequencyData fd;
  fd.omega = omega;

  long double x = omega;
  long long p_prev = 1, q_prev = 0;  // p_{-1}/q_{-1}
  long long p = 0, q = 1;            // p_0/q_0 = a_0 = 0 (omega in (0,1))
  for (int i = 0; i < depth; ++i) {
    if (x < 1e-14L) {
      fd.rational_terminated = true;
      break;
    }
    const long double inv = 1.0L / x;
    long long a = static_cast<long long>(std::floor(inv));
    if (a < 1) a = 1;
    x = inv - static_cast<long double>(a);
    fd.partial_quotients.push_back(a);
    const long long pn = a * p + p_prev;
    const long long qn = a * q + q_prev;
    p_prev = p;
    q_prev = q;
    p = pn;
    q = qn;
    fd.convergents.push_back({p, q});
    if (q > (1LL << 60) / (a + 1)) break;  // overflow guard
  }
  return fd;
}

double torus_frac(long long k, double omega) {
  if (std::llabs(k) > kMaxK) throw std::invalid_argument("torus arithmetic capped at |k| <= 1e7");
  return static_cast<double>(reduce_frac(static_cast<long double>(k) * static_cast<long double>(omega)));
}

double torus_signed(long long k, double omega) {
  long double f = reduce_frac(static_cast<long double>(k) * static_cast<long double>(omega));
  if (f >= 0.5L) f -= 1.0L;
  return static_cast<double>(f);
}

double torus_norm(long long k, double omega) {
  if (k == 0) throw std::invalid_argument("torus_norm: k must be nonzero");
  return std::abs(torus_signed(k, omega));
}

DiophantineCheck diophantine_check(double omega, long long N, double c_dio, double delta_dio) {
  if (N < 1 || c_dio <= 0.0 || delta_dio < 0.0)
    throw std::invalid_argument("diophantine_check: need N >= 1, C > 0, delta >= 0");
  DiophantineCheck res;
  res.min_value = std::numeric_limits<double>::infinity();
  for (long long k = 1; k <= N; ++k) {
    const double val = torus_norm(k, omega) * std::pow(static_cast<double>(k), 1.0 + delta_dio);
    if (val < res.min_value) {
      res.min_value = val;
      res.worst_k = k;
    }
  }
  res.ok = res.min_value >= c_dio;
  return res;
}

double best_dio_constant(double omega, long long N, double delta_dio) {
  return diophantine_check(omega, N, std::numeric_limits<double>::min(), delta_dio).min_value;
}

ThinBand full_square_band() {
  return ThinBand{[](double, double) { return true; }, std::sqrt(2.0)};
}

ThinBand graph_band(std::function<double(double)> f, double half_width, double x_lo, double x_hi,
                    double eta) {
  ThinBand band;
  band.eta = eta;
  band.contains = [f = std::move(f), half_width, x_lo, x_hi](double t1, double t2) {
    if (t1 < x_lo || t1 > x_hi) return false;
    return std::abs(t2 - f(t1)) <= half_width;
  };
  return band;
}

double estimate_eta(const ThinBand& band, int n_probes, std::uint64_t seed) {
  RandomStream rng(seed);
  // Rejection-sample endpoint pairs inside the band, then keep the longest
  // pair whose connecting segment stays inside. A documented estimate only.
  auto sample_in_band = [&](double& x, double& y) {
    for (int t = 0; t < 4000; ++t) {
      x = rng.next_double();
      y = rng.next_double();
      if (band.contains(x, y)) return true;
    }
    return false;
  };
  double best = 0.0;
  const int steps = 512;
  for (int p = 0; p < n_probes; ++p) {
    double x0, y0, x1, y1;
    if (!sample_in_band(x0, y0) || !sample_in_band(x1, y1)) return best;
    bool inside = true;
    for (int i = 1; i < steps && inside; ++i) {
      const double t = static_cast<double>(i) / steps;
      inside = band.contains(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
    }
    if (inside) best = std::max(best, std::hypot(x1 - x0, y1 - y0));
  }
  return best;
}

BandCountResult lattice_points_in_band(const ThinBand& band, double omega, long long N,
                                       double delta_dio) {
  if (N < 1) throw std::invalid_argument("lattice_points_in_band: N must be >= 1");
  BandCountResult res;
  res.envelope_exponent = 0.75 + 3.0 * delta_dio;

  // Precompute {k w} once per coordinate value.
  std::vector<double> frac(static_cast<std::size_t>(2 * N + 1));
  for (long long k = -N; k <= N; ++k)
    frac[static_cast<std::size_t>(k + N)] = k == 0 ? 0.0 : torus_frac(k, omega);

  const std::size_t rows = static_cast<std::size_t>(2 * N + 1);
  std::vector<std::vector<long long>> hits_per_row(rows);
  parallel_for(rows, [&](std::size_t r) {
    const double t1 = frac[r];
    auto& out = hits_per_row[r];
    for (long long k2 = -N; k2 <= N; ++k2) {
      if (band.contains(t1, frac[static_cast<std::size_t>(k2 + N)])) out.push_back(k2);
    }
  });
  for (std::size_t r = 0; r < rows; ++r) {
    const long long k1 = static_cast<long long>(r) - N;
    for (long long k2 : hits_per_row[r]) res.hits.push_back({k1, k2});
  }
  res.count = static_cast<long long>(res.hits.size());
  return res;
}

ShortVectorResult short_distance_vectors(double omega, long long N) {
  if (N < 16) throw std::invalid_argument("short_distance_vectors: N must be >= 16");
  ShortVectorResult res;
  res.threshold = 2.0 * std::pow(static_cast<double>(N), -0.75);

  // Per-component offsets j = k - k' whose reduced rotation stays within the
  // threshold; j = 0 is always admissible.
  std::vector<std::pair<long long, double>> comp{{0, 0.0}};
  long long candidates = 0;
  for (long long j = 1; j <= 2 * N; ++j) {
    if (torus_norm(j, omega) <= res.threshold) {
      ++candidates;
      comp.emplace_back(j, torus_signed(j, omega));
      comp.emplace_back(-j, -torus_signed(j, omega));
    }
  }
  res.per_component = candidates;

  long long count = 0;
  for (const auto& [j1, a] : comp)
    for (const auto& [j2, b] : comp) {
      if (j1 == 0 && j2 == 0) continue;  // the zero offset is not a distance vector
      if (a * a + b * b <= res.threshold * res.threshold) ++count;
    }
  res.count = count;
  return res;
}

}  // namespace qp2loc
