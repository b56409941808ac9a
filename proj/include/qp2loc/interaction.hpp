#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qp2loc {

// Low-complexity background potential U on Z^2. Finitely many values; the
// number of distinct N x N restricted translates grows at most polynomially.
class InteractionPotential {
 public:
  enum class Variant { Zero, FiniteRange, Periodic, Fibonacci };

  static InteractionPotential zero();
  // kernel maps diagonal offset d = n1 - n2 to a value; U(n1,n2) = f(n1-n2).
  static InteractionPotential finite_range(const std::map<int, double>& kernel);
  static InteractionPotential hubbard(double u);  // f(0) = u
  static InteractionPotential periodic(const std::vector<std::vector<double>>& table);
  // Two values laid along n1 - n2 by the Sturmian word floor((k+1)phi)-floor(k phi).
  static InteractionPotential fibonacci(double value_a, double value_b);

  Variant variant() const { return variant_; }
  std::array<long, 2> translation() const { return translation_; }

  double eval(long n1, long n2) const;
  InteractionPotential translated(std::array<long, 2> t) const;

  // Sorted distinct values {U_1, ..., U_Nint}.
  std::vector<double> value_set() const;
  double max_abs() const;

  struct ComplexityCount {
    long count = 0;
    bool exact = true;  // false when enumeration ran over a finite scan window only
  };
  // Number of distinct restrictions of translates of U to [0,N-1]^2. The scan
  // domain is derived from the period/support where one exists; otherwise a
  // window (default 12*N translations along the diagonal) is used and the
  // result is flagged as a lower bound.
  ComplexityCount complexity_count(int N, std::optional<long> window = {}) const;

  // Least-squares slope of log(count) against log(N).
  double fit_complexity_exponent(const std::vector<int>& sizes) const;

  // Translation vectors producing all distinct restrictions of U to the box
  // [lo1,hi1] x [lo2,hi2]; used by the "good for all translations" predicates.
  std::vector<std::array<long, 2>> distinct_translations(long lo1, long hi1, long lo2,
                                                         long hi2) const;

  nlohmann::json to_json() const;
  static InteractionPotential from_json(const nlohmann::json& j);

 private:
  Variant variant_ = Variant::Zero;
  std::map<int, double> kernel_;                   // FiniteRange
  std::vector<std::vector<double>> table_;         // Periodic, table_[i][j], p1 x p2
  double fib_a_ = 0.0, fib_b_ = 0.0;               // Fibonacci
  std::array<long, 2> translation_ = {0, 0};
};

}  // namespace qp2loc
