#include "qp2loc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

namespace {

// Golden-section maximum of f on [lo, hi].
double golden_max(const std::function<double(double)>& f, double lo, double hi, int iters = 90) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-15; ++i) {
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
  return std::max(fc, fd);
}

// Dense grid + refinement around the top 3 cells.
double grid_max(const std::function<double(double)>& f, double lo, double hi, int grid) {
  std::vector<double> vals(static_cast<std::size_t>(grid) + 1);
  const double h = (hi - lo) / grid;
  for (int i = 0; i <= grid; ++i) vals[static_cast<std::size_t>(i)] = f(lo + i * h);
  std::vector<int> idx(vals.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + std::min<std::size_t>(3, idx.size()), idx.end(),
                    [&](int i, int j) { return vals[static_cast<std::size_t>(i)] > vals[static_cast<std::size_t>(j)]; });
  double best = *std::max_element(vals.begin(), vals.end());
  for (std::size_t t = 0; t < std::min<std::size_t>(3, idx.size()); ++t) {
    const int i = idx[t];
    const double a = lo + std::max(0, i - 1) * h;
    const double b = lo + std::min(grid, i + 1) * h;
    best = std::max(best, golden_max(f, a, b));
  }
  return best;
}

}  // namespace

FourierPotential FourierPotential::from_modes(const std::map<int, std::complex<double>>& modes,
                                              bool normalize, double strip_width) {
  constexpr double kZeroTol = 1e-15;
  // Fold to positive frequencies, checking realness and zero mean.
  std::map<int, std::complex<double>> pos;
  for (const auto& [n, c] : modes) {
    if (std::abs(c) <= kZeroTol) continue;
    if (n == 0) throw std::invalid_argument("FourierPotential: c_0 must vanish (zero mean)");
    if (n > 0) {
      pos[n] += c;
    } else {
      auto it = modes.find(-n);
      const std::complex<double> expect = std::conj(c);
      if (it == modes.end() || std::abs(it->second - expect) > 1e-12 * std::max(1.0, std::abs(c)))
        throw std::invalid_argument("FourierPotential: c_{-n} must equal conj(c_n) (real v)");
    }
  }
  if (pos.empty()) throw std::invalid_argument("FourierPotential: zero potential is not allowed");

  int g = 0;
  for (const auto& [n, c] : pos) g = std::gcd(g, n);
  if (g != 1)
    throw std::invalid_argument("FourierPotential: gcd of active modes is " + std::to_string(g) +
                                ", smallest period must be 1");

  FourierPotential v;
  v.strip_width_ = strip_width;
  for (const auto& [n, c] : pos) {
    v.modes_.emplace_back(n, c);
    v.order_ = std::max(v.order_, n);
  }
  if (normalize) {
    const double s = v.sup_abs();
    if (s > 1.0) {
      for (auto& [n, c] : v.modes_) c /= s;
    }
  }
  return v;
}

FourierPotential FourierPotential::preset(const std::string& name) {
  const std::complex<double> i{0.0, 1.0};
  std::map<int, std::complex<double>> m;
  if (name == "sin") {
    m[1] = -0.5 * i;
  } else if (name == "cos") {
    m[1] = 0.5;
  } else if (name == "sin+sin4") {
    m[1] = -0.5 * i;
    m[2] = -0.5 * i;
  } else if (name == "cos+sin6") {
    m[1] = 0.5;
    m[3] = -0.5 * i;
  } else {
    throw std::invalid_argument("unknown potential preset '" + name + "'");
  }
  for (auto [n, c] : std::map<int, std::complex<double>>(m)) m[-n] = std::conj(c);
  return from_modes(m, true, 20.0);
}

double FourierPotential::eval(double theta) const {
  // v = 2 Re sum_{n>0} c_n z^n with z = e^{2 pi i theta}; modes are sparse.
  const std::complex<double> z = std::polar(1.0, kTwoPi * theta);
  std::complex<double> acc = 0.0;
  std::complex<double> zp = 1.0;
  int cur = 0;
  for (const auto& [n, c] : modes_) {
    for (; cur < n; ++cur) zp *= z;
    acc += c * zp;
  }
  return 2.0 * acc.real();
}

double FourierPotential::deriv(double theta) const {
  const std::complex<double> z = std::polar(1.0, kTwoPi * theta);
  std::complex<double> acc = 0.0;
  std::complex<double> zp = 1.0;
  int cur = 0;
  for (const auto& [n, c] : modes_) {
    for (; cur < n; ++cur) zp *= z;
    acc += std::complex<double>(0.0, kTwoPi * n) * c * zp;
  }
  return 2.0 * acc.real();
}

double FourierPotential::sup_abs(int grid) const {
  return grid_max([this](double t) { return std::abs(eval(t)); }, 0.0, 1.0, grid);
}

double FourierPotential::sup_abs_deriv(int grid) const {
  return grid_max([this](double t) { return std::abs(deriv(t)); }, 0.0, 1.0, grid);
}

std::complex<double> FourierPotential::coeff(int n) const {
  if (n == 0) return 0.0;
  const int a = std::abs(n);
  for (const auto& [m, c] : modes_)
    if (m == a) return n > 0 ? c : std::conj(c);
  return 0.0;
}

nlohmann::json FourierPotential::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [n, c] : modes_) arr.push_back({{"n", n}, {"re", c.real()}, {"im", c.imag()}});
  return nlohmann::json{{"modes", arr}, {"strip_width", strip_width_}};
}

FourierPotential FourierPotential::from_json(const nlohmann::json& j, bool normalize) {
  std::map<int, std::complex<double>> m;
  for (const auto& e : j.at("modes")) {
    const int n = e.at("n").get<int>();
    m[n] += std::complex<double>(e.value("re", 0.0), e.value("im", 0.0));
  }
  // Fill implied conjugates for positive-only inputs.
  for (auto [n, c] : std::map<int, std::complex<double>>(m))
    if (m.find(-n) == m.end()) m[-n] = std::conj(c);
  return from_modes(m, normalize, j.value("strip_width", 1.0));
}

const char* to_string(SymmetryReport::Kind k) {
  switch (k) {
    case SymmetryReport::Kind::Asymmetric: return "Asymmetric";
    case SymmetryReport::Kind::TypeI: return "TypeI";
    case SymmetryReport::Kind::TypeII: return "TypeII";
    case SymmetryReport::Kind::Both: return "Both";
  }
  return "?";
}

SymmetryReport classify_symmetry(const FourierPotential& v, double tol) {
  if (tol <= 0) throw std::invalid_argument("classify_symmetry: tol must be positive");
  if (v.modes().empty()) throw std::invalid_argument("classify_symmetry: empty potential");
  SymmetryReport rep;

  // Type II <=> all even modes vanish.
  double res2 = 0.0;
  for (const auto& [n, c] : v.modes())
    if (n % 2 == 0) res2 = std::max(res2, std::abs(c));
  rep.residual_II = res2;
  const bool type2 = res2 <= tol;

  // Type I: solve c_n e^{4 pi i n s} = -conj(c_n) from the lowest active mode,
  // then verify the remaining modes. Candidates are s0 + k/(2 n0) mod 1/2.
  const int n0 = v.modes().front().first;
  const std::complex<double> c0 = v.modes().front().second;
  const double phi0 = std::arg(c0);
  double best_res = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (int k = 0; k < n0; ++k) {
    double s = (std::numbers::pi - 2.0 * phi0) / (4.0 * std::numbers::pi * n0) +
               static_cast<double>(k) / (2.0 * n0);
    s -= 0.5 * std::floor(s / 0.5);
    double res = 0.0;
    for (const auto& [n, c] : v.modes()) {
      const std::complex<double> lhs = c * std::polar(1.0, 4.0 * std::numbers::pi * n * s);
      res = std::max(res, std::abs(lhs + std::conj(c)));
    }
    if (res < best_res) {
      best_res = res;
      best_s = s;
    }
  }
  rep.residual_I = best_res;
  const bool type1 = best_res <= tol;

  if (type1 && type2)
    rep.kind = SymmetryReport::Kind::Both;
  else if (type1)
    rep.kind = SymmetryReport::Kind::TypeI;
  else if (type2)
    rep.kind = SymmetryReport::Kind::TypeII;
  else
    rep.kind = SymmetryReport::Kind::Asymmetric;
  if (type1) {
    double s = best_s;
    if (s > 0.5 - 1e-12) s = 0.0;  // wrap representative into [0, 1/2)
    rep.theta_sym = s;
  }
  return rep;
}

double g_exact(const FourierPotential& v, SegmentParams p) {
  if (std::abs(p.a) > 1.0 + 1e-12)
    throw std::invalid_argument("g_exact: |a| <= 1 (reparametrize the segment)");
  auto f = [&](double t) { return std::abs(v.deriv(t) + p.a * v.deriv(p.a * t + p.b)); };
  return grid_max(f, -0.5, 0.5, 4096);
}

// Mode-wise L2 lower bound for g at a = +-1. For odd v (Type I center at 0)
// the sign = -1 case reduces to sqrt(sum 4 n^2 |c_n|^2 sin^2(pi n b)); the
// general form keeps the bound valid for shifted centers such as the cosine.
double g_fourier_lower(const FourierPotential& v, int sign, double b) {
  return std::sqrt(segment_gradient_l2(v, sign, b));
}

double segment_gradient_l2(const FourierPotential& v, int sign, double b) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("segment_gradient_l2: sign must be +-1");
  double sum = 0.0;
  for (const auto& [n, c] : v.modes()) {
    if (sign == 1) {
      // h_n = 2 pi i n c_n (1 + e^{2 pi i n b}), plus the conjugate mode
      sum += 2.0 * n * n * std::norm(c) * std::norm(1.0 + std::polar(1.0, kTwoPi * n * b));
    } else {
      // h_n = 2 pi i n (c_n + conj(c_n) e^{-2 pi i n b}); |h_{-n}| = |h_n|
      sum += 2.0 * n * n * std::norm(c + std::conj(c) * std::polar(1.0, -kTwoPi * n * b));
    }
  }
  return sum;
}

double gradient_shape(SymmetryReport::Kind kind, SegmentParams p) {
  const double a = p.a, b = p.b;
  switch (kind) {
    case SymmetryReport::Kind::TypeI: return std::abs(a + 1.0) + b * (1.0 - b);
    case SymmetryReport::Kind::TypeII: return std::abs(a - 1.0) + std::abs(b - 0.5);
    case SymmetryReport::Kind::Both: return std::abs(a * a - 1.0) + b * (1.0 - b) * std::abs(b - 0.5);
    case SymmetryReport::Kind::Asymmetric: return 1.0;
  }
  return 1.0;
}

TwoSidedFit verify_two_sided(const FourierPotential& v, const std::vector<SegmentParams>& grid) {
  if (grid.empty()) throw std::invalid_argument("verify_two_sided: empty grid");
  TwoSidedFit fit;
  const SymmetryReport rep = classify_symmetry(v);
  fit.case_used = rep.kind;

  std::vector<double> g(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { g[i] = g_exact(v, grid[i]); });

  fit.uniform_min = *std::min_element(g.begin(), g.end());
  if (rep.kind == SymmetryReport::Kind::Asymmetric) {
    // No vanishing direction exists; report the uniform floor instead.
    fit.symmetric_form = false;
    fit.c_minus = fit.uniform_min;
    fit.c_plus = *std::max_element(g.begin(), g.end());
    if (fit.c_minus <= 0.0) throw std::runtime_error("verify_two_sided: no positive uniform bound");
    return fit;
  }

  constexpr double kShapeFloor = 1e-12;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = gradient_shape(rep.kind, grid[i]);
    if (s < kShapeFloor) {
      ++fit.excluded;
      continue;
    }
    lo = std::min(lo, g[i] / s);
    hi = std::max(hi, g[i] / s);
  }
  if (!(lo > 0.0)) throw std::runtime_error("verify_two_sided: no positive C- exists on this grid");
  fit.c_minus = lo;
  fit.c_plus = hi;
  return fit;
}

Truncation truncate(const FourierPotential& v, int new_order) {
  if (new_order > v.order()) throw std::invalid_argument("truncate: new order exceeds current order");
  std::map<int, std::complex<double>> kept;
  double tail = 0.0;
  for (const auto& [n, c] : v.modes()) {
    if (n <= new_order) {
      kept[n] = c;
      kept[-n] = std::conj(c);
    } else {
      tail += 2.0 * (1.0 + kTwoPi * n) * std::abs(c);
    }
  }
  if (kept.empty())
    throw std::invalid_argument("truncate: truncation order " + std::to_string(new_order) +
                                " removes every mode");
  return Truncation{FourierPotential::from_modes(kept, /*normalize=*/false, v.strip_width()), tail};
}

}  // namespace qp2loc
