#include "qp2loc/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

namespace {
// Fibonacci (Sturmian) letter at position k: floor((k+1) phi) - floor(k phi),
// phi the golden mean; takes values 1 or 2.
int sturmian_letter(long k) {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double a = std::floor(static_cast<double>(k + 1) * phi);
  const double b = std::floor(static_cast<double>(k) * phi);
  return static_cast<int>(a - b);
}
}  // namespace

InteractionPotential InteractionPotential::zero() { return InteractionPotential{}; }

InteractionPotential InteractionPotential::finite_range(const std::map<int, double>& kernel) {
  InteractionPotential u;
  u.variant_ = Variant::FiniteRange;
  for (const auto& [d, val] : kernel)
    if (val != 0.0) u.kernel_[d] = val;
  return u;
}

InteractionPotential InteractionPotential::hubbard(double v) {
  return finite_range({{0, v}});
}

InteractionPotential InteractionPotential::periodic(const std::vector<std::vector<double>>& table) {
  if (table.empty() || table.front().empty())
    throw std::invalid_argument("InteractionPotential: periodic table must be nonempty");
  const std::size_t p2 = table.front().size();
  for (const auto& row : table)
    if (row.size() != p2) throw std::invalid_argument("InteractionPotential: ragged periodic table");
  InteractionPotential u;
  u.variant_ = Variant::Periodic;
  u.table_ = table;
  return u;
}

InteractionPotential InteractionPotential::fibonacci(double value_a, double value_b) {
  InteractionPotential u;
  u.variant_ = Variant::Fibonacci;
  u.fib_a_ = value_a;
  u.fib_b_ = value_b;
  return u;
}

double InteractionPotential::eval(long n1, long n2) const {
  const long m1 = n1 - translation_[0];
  const long m2 = n2 - translation_[1];
  switch (variant_) {
    case Variant::Zero:
      return 0.0;
    case Variant::FiniteRange: {
      const long d = m1 - m2;
      if (d < std::numeric_limits<int>::min() || d > std::numeric_limits<int>::max()) return 0.0;
      auto it = kernel_.find(static_cast<int>(d));
      return it == kernel_.end() ? 0.0 : it->second;
    }
    case Variant::Periodic: {
      const long p1 = static_cast<long>(table_.size());
      const long p2 = static_cast<long>(table_.front().size());
      const long i = ((m1 % p1) + p1) % p1;
      const long j = ((m2 % p2) + p2) % p2;
      return table_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    case Variant::Fibonacci:
      return sturmian_letter(m1 - m2) == 1 ? fib_a_ : fib_b_;
  }
  return 0.0;
}

InteractionPotential InteractionPotential::translated(std::array<long, 2> t) const {
  InteractionPotential u = *this;
  u.translation_ = {translation_[0] + t[0], translation_[1] + t[1]};
  return u;
}

std::vector<double> InteractionPotential::value_set() const {
  std::set<double> vals;
  switch (variant_) {
    case Variant::Zero:
      vals.insert(0.0);
      break;
    case Variant::FiniteRange:
      vals.insert(0.0);  // off-support sites
      for (const auto& [d, v] : kernel_) vals.insert(v);
      break;
    case Variant::Periodic:
      for (const auto& row : table_)
        for (double v : row) vals.insert(v);
      break;
    case Variant::Fibonacci:
      vals.insert(fib_a_);
      vals.insert(fib_b_);
      break;
  }
  return {vals.begin(), vals.end()};
}

double InteractionPotential::max_abs() const {
  double m = 0.0;
  for (double v : value_set()) m = std::max(m, std::abs(v));
  return m;
}

InteractionPotential::ComplexityCount InteractionPotential::complexity_count(
    int N, std::optional<long> window) const {
  if (N < 2) throw std::invalid_argument("complexity_count: N must be >= 2");

  // Translation candidates covering every distinct pattern (or a scan window).
  std::vector<std::array<long, 2>> shifts;
  bool exact = true;
  switch (variant_) {
    case Variant::Zero:
      shifts.push_back({0, 0});
      break;
    case Variant::FiniteRange: {
      long r = 0;
      for (const auto& [d, v] : kernel_) r = std::max<long>(r, std::abs(static_cast<long>(d)));
      // Patterns depend only on the diagonal shift; one extra step past the
      // support yields the all-zero pattern.
      for (long d = -(N + r); d <= N + r; ++d) shifts.push_back({d, 0});
      break;
    }
    case Variant::Periodic: {
      const long p1 = static_cast<long>(table_.size());
      const long p2 = static_cast<long>(table_.front().size());
      for (long a = 0; a < p1; ++a)
        for (long b = 0; b < p2; ++b) shifts.push_back({a, b});
      break;
    }
    case Variant::Fibonacci: {
      const long w = window.value_or(12L * N);
      for (long d = -w; d <= w; ++d) shifts.push_back({d, 0});
      exact = false;  // no finite fundamental domain; count is a lower bound
      break;
    }
  }

  std::set<std::vector<double>> patterns;
  std::vector<double> pat(static_cast<std::size_t>(N) * N);
  for (const auto& s : shifts) {
    const InteractionPotential shifted = translated(s);
    std::size_t k = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) pat[k++] = shifted.eval(i, j);
    patterns.insert(pat);
  }
  return ComplexityCount{static_cast<long>(patterns.size()), exact};
}

double InteractionPotential::fit_complexity_exponent(const std::vector<int>& sizes) const {
  if (sizes.size() < 3)
    throw std::invalid_argument("fit_complexity_exponent: need at least 3 window sizes");
  std::vector<double> lx, ly;
  for (int n : sizes) {
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(static_cast<double>(complexity_count(n).count)));
  }
  return linear_fit(lx, ly).slope;
}

std::vector<std::array<long, 2>> InteractionPotential::distinct_translations(long lo1, long hi1,
                                                                             long lo2,
                                                                             long hi2) const {
  const long w1 = hi1 - lo1 + 1, w2 = hi2 - lo2 + 1;
  std::vector<std::array<long, 2>> shifts;
  switch (variant_) {
    case Variant::Zero:
      return {{0, 0}};
    case Variant::FiniteRange: {
      long r = 0;
      for (const auto& [d, v] : kernel_) r = std::max<long>(r, std::abs(static_cast<long>(d)));
      const long span = std::max(w1, w2) + r;
      for (long d = -span; d <= span; ++d) shifts.push_back({d, 0});
      break;
    }
    case Variant::Periodic: {
      const long p1 = static_cast<long>(table_.size());
      const long p2 = static_cast<long>(table_.front().size());
      for (long a = 0; a < p1; ++a)
        for (long b = 0; b < p2; ++b) shifts.push_back({a, b});
      break;
    }
    case Variant::Fibonacci: {
      const long span = 12 * std::max(w1, w2);
      for (long d = -span; d <= span; ++d) shifts.push_back({d, 0});
      break;
    }
  }

  // Keep one representative shift per distinct pattern on the box.
  std::set<std::vector<double>> seen;
  std::vector<std::array<long, 2>> reps;
  std::vector<double> pat(static_cast<std::size_t>(w1 * w2));
  for (const auto& s : shifts) {
    const InteractionPotential shifted = translated(s);
    std::size_t k = 0;
    for (long i = lo1; i <= hi1; ++i)
      for (long j = lo2; j <= hi2; ++j) pat[k++] = shifted.eval(i, j);
    if (seen.insert(pat).second) reps.push_back(s);
  }
  return reps;
}

nlohmann::json InteractionPotential::to_json() const {
  nlohmann::json j;
  j["translation"] = {translation_[0], translation_[1]};
  switch (variant_) {
    case Variant::Zero:
      j["type"] = "zero";
      break;
    case Variant::FiniteRange: {
      j["type"] = "finite_range";
      nlohmann::json k = nlohmann::json::object();
      for (const auto& [d, v] : kernel_) k[std::to_string(d)] = v;
      j["kernel"] = k;
      break;
    }
    case Variant::Periodic:
      j["type"] = "periodic";
      j["table"] = table_;
      break;
    case Variant::Fibonacci:
      j["type"] = "fibonacci";
      j["values"] = {fib_a_, fib_b_};
      break;
  }
  return j;
}

InteractionPotential InteractionPotential::from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  InteractionPotential u;
  if (type == "zero") {
    u = zero();
  } else if (type == "finite_range") {
    std::map<int, double> kernel;
    for (const auto& [key, val] : j.at("kernel").items()) kernel[std::stoi(key)] = val.get<double>();
    u = finite_range(kernel);
  } else if (type == "hubbard") {
    u = hubbard(j.at("u").get<double>());
  } else if (type == "periodic") {
    u = periodic(j.at("table").get<std::vector<std::vector<double>>>());
  } else if (type == "fibonacci") {
    const auto vals = j.at("values").get<std::vector<double>>();
    if (vals.size() != 2) throw std::invalid_argument("fibonacci interaction needs two values");
    u = fibonacci(vals[0], vals[1]);
  } else {
    throw std::invalid_argument("unknown interaction type '" + type + "'");
  }
  if (j.contains("translation")) {
    const auto t = j.at("translation").get<std::vector<long>>();
    if (t.size() != 2) throw std::invalid_argument("translation must have two components");
    u = u.translated({t[0], t[1]});
  }
  return u;
}

}  // namespace qp2loc
