#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "qp2loc/interaction.hpp"

using namespace qp2loc;

TEST_CASE("eval across variants") {
  CHECK(InteractionPotential::zero().eval(5, -3) == 0.0);

  const auto hub = InteractionPotential::hubbard(3.0);
  CHECK(hub.eval(3, 3) == 3.0);
  CHECK(hub.eval(3, 4) == 0.0);

  const auto per = InteractionPotential::periodic({{1.0, 2.0}, {3.0, 4.0}});
  CHECK(per.eval(5, 7) == 4.0);  // indices (1,1) of the 2x2 table
  CHECK(per.eval(0, 0) == 1.0);
  CHECK(per.eval(-1, -1) == 4.0);
}

TEST_CASE("translation composes and commutes with eval") {
  const auto hub = InteractionPotential::hubbard(2.5);
  const auto t = hub.translated({1, 0});
  CHECK(t.eval(4, 3) == 2.5);
  CHECK(t.eval(3, 3) == 0.0);

  const auto per = InteractionPotential::periodic({{1.0, 2.0}, {3.0, 4.0}});
  const auto tp = per.translated({2, 2});  // full period
  for (long a = -3; a <= 3; ++a)
    for (long b = -3; b <= 3; ++b) CHECK(tp.eval(a, b) == per.eval(a, b));

  CHECK(InteractionPotential::zero().translated({7, -2}).eval(0, 0) == 0.0);
}

TEST_CASE("value sets") {
  CHECK(InteractionPotential::zero().value_set() == std::vector<double>{0.0});
  CHECK(InteractionPotential::hubbard(3.0).value_set() == std::vector<double>{0.0, 3.0});
  CHECK(InteractionPotential::fibonacci(1.0, 2.0).value_set() == std::vector<double>{1.0, 2.0});

  const auto hub = InteractionPotential::hubbard(3.0);
  CHECK(hub.translated({5, 2}).value_set() == hub.value_set());
}

TEST_CASE("complexity counts match the reference values") {
  CHECK(InteractionPotential::zero().complexity_count(5).count == 1);
  CHECK(InteractionPotential::hubbard(1.0).complexity_count(3).count == 6);
  CHECK(InteractionPotential::periodic({{1.0, 2.0}, {3.0, 4.0}}).complexity_count(4).count <= 4);
  // a diagonal line has 2N-1 visible offsets plus the all-zero pattern
  for (int n : {2, 5, 9}) CHECK(InteractionPotential::hubbard(2.0).complexity_count(n).count == 2 * n);
}

TEST_CASE("complexity agrees with the brute-force counter") {
  const std::vector<InteractionPotential> cases = {
      InteractionPotential::zero(), InteractionPotential::hubbard(1.0),
      InteractionPotential::finite_range({{0, 3.0}, {1, -0.5}}),
      InteractionPotential::periodic({{1.0, 0.0, 2.0}, {0.0, 1.0, 1.0}}),
      InteractionPotential::fibonacci(1.0, 2.0)};
  for (const auto& u : cases)
    for (int n : {2, 4, 6, 8, 12}) {
      const long brute = oracle::complexity_brute_force(u, n, 12L * n);
      CHECK(u.complexity_count(n).count == brute);
    }
}

TEST_CASE("finite-range counts stay below the 2(N+r) envelope") {
  const auto u = InteractionPotential::finite_range({{0, 1.0}, {2, 0.5}});
  const long r = 2;
  for (int n : {2, 4, 6, 8, 10, 12}) CHECK(u.complexity_count(n).count <= 2 * (n + r));
}

TEST_CASE("complexity exponent fits") {
  const std::vector<int> sizes = {4, 6, 8, 12, 16};
  CHECK(InteractionPotential::hubbard(1.0).fit_complexity_exponent(sizes) ==
        doctest::Approx(1.0).epsilon(0.08));
  // a zero potential has a single pattern at every size
  CHECK(InteractionPotential::zero().fit_complexity_exponent(sizes) == doctest::Approx(0.0));
  // Sturmian factor complexity along each diagonal line is length + 1
  CHECK(InteractionPotential::fibonacci(1.0, 2.0).fit_complexity_exponent(sizes) ==
        doctest::Approx(1.0).epsilon(0.08));
  const auto fib = InteractionPotential::fibonacci(1.0, 2.0);
  for (int n : {4, 8, 12}) {
    const auto c = fib.complexity_count(n);
    CHECK(c.count == 2 * n);       // (2N-1)+1 factors of the diagonal word
    CHECK_FALSE(c.exact);          // window-scanned, reported as a lower bound
  }
}

TEST_CASE("json round trip") {
  const auto u = InteractionPotential::finite_range({{0, 3.0}, {1, -0.5}}).translated({2, -1});
  const auto back = InteractionPotential::from_json(u.to_json());
  for (long a = -4; a <= 4; ++a)
    for (long b = -4; b <= 4; ++b) CHECK(back.eval(a, b) == u.eval(a, b));
}
