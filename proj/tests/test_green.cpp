#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qp2loc/arithmetic.hpp"
#include "qp2loc/green.hpp"
#include "qp2loc/localization.hpp"
#include "qp2loc/numerics.hpp"

using namespace qp2loc;

namespace {
const double kGolden = omega_preset("golden");

BoxHamiltonian diag_dominated_box(double lambda, long radius, std::array<double, 2> theta) {
  return assemble(box_region({0, 0}, radius), lambda, kGolden, theta,
                  FourierPotential::preset("sin"), InteractionPotential::zero());
}
}  // namespace

TEST_CASE("green on a single site") {
  const auto h = assemble(make_region({3, 3}, {3, 3}), 2.0, kGolden, {0.1, 0.7},
                          FourierPotential::preset("cos"), InteractionPotential::zero());
  const double d = h.diagonal[0];
  const double E = d - 0.25;
  const auto gs = green(h, E);
  CHECK(gs.G(0, 0) == doctest::Approx(1.0 / (d - E)).epsilon(1e-13));
  CHECK(gs.residual_inf < 1e-12);
}

TEST_CASE("resonant energies are rejected with a nearby eigenvalue estimate") {
  const auto h = assemble(box_region({0, 0}, 1), 2.0, kGolden, {0.1, 0.7},
                          FourierPotential::preset("cos"), InteractionPotential::zero());
  const auto ev = eigenvalues_dense(h);
  try {
    green(h, ev[4]);
    FAIL("expected ResonantEnergy");
  } catch (const ResonantEnergy& e) {
    CHECK(std::abs(e.nearest_eigenvalue) < 1e-3);  // estimate of E - mu
  }
}

TEST_CASE("diagonal-dominated norm bound 8/(lambda delta)") {
  const double lambda = 1e6, delta = 1e-3;  // delta = lambda^{-1/2}
  const auto h = diag_dominated_box(lambda, 3, {0.13, 0.41});
  const double E = 2.5 * lambda;
  REQUIRE(vlevel_check(h.theta, h.region, h.omega, h.v, h.U, E, lambda, delta));
  const auto gs = green(h, E);
  CHECK(spectral_norm_sym(gs.G) <= 8.0 * 1e-3);
  CHECK((gs.G - gs.G.transpose()).cwiseAbs().maxCoeff() == 0.0);  // exact symmetry
}

TEST_CASE("classify: reference behaviors") {
  SUBCASE("large-coupling box is good at gamma = log(lambda)/2, b = 0.9") {
    const double lambda = 1e6;
    const auto h = diag_dominated_box(lambda, 3, {0.13, 0.41});
    const auto rep = classify(h, 2.5 * lambda, 0.5 * std::log(lambda), 0.9);
    CHECK(rep.good_norm);
    CHECK(rep.good_decay);
  }
  SUBCASE("weak coupling at mid-spectrum energy has no exponential decay") {
    const auto h = assemble(box_region({0, 0}, 4), 2.0, kGolden, {0.22, 0.63},
                            FourierPotential::preset("cos"), InteractionPotential::zero());
    ClassifyOptions opt;
    opt.resonant_is_bad = true;
    const auto rep = classify(h, 0.4, 1.0, 0.9, opt);
    CHECK_FALSE(rep.good_decay);
  }
  SUBCASE("near-free box at an interior energy fails decay") {
    const auto h = assemble(box_region({0, 0}, 4), 1e-10, kGolden, {0.22, 0.63},
                            FourierPotential::preset("cos"), InteractionPotential::zero());
    ClassifyOptions opt;
    opt.resonant_is_bad = true;
    const auto rep = classify(h, 0.5, 0.7, 0.9, opt);
    CHECK_FALSE(rep.good_decay);
  }
}

TEST_CASE("classify honors every translation of the interaction") {
  const double lambda = 1e5;
  const auto u = InteractionPotential::hubbard(0.3 * lambda);
  const auto region = box_region({0, 0}, 2);
  const auto h =
      assemble(region, lambda, kGolden, {0.37, 0.81}, FourierPotential::preset("sin"), u, 1.0);
  ClassifyOptions all;
  all.all_translations = true;
  all.resonant_is_bad = true;
  const auto far = classify(h, 3.5 * lambda, 0.5 * std::log(lambda), 0.9, all);
  CHECK(far.good_norm);
  CHECK(far.good_decay);

  // an energy near the Hubbard-shifted diagonal of one translate: including
  // translations can only lose goodness
  const auto h0 = assemble(region, lambda, kGolden, {0.37, 0.81},
                           FourierPotential::preset("sin"), InteractionPotential::zero());
  const double target = h0.diagonal[0] + 0.3 * lambda;
  ClassifyOptions single;
  single.resonant_is_bad = true;
  const auto rep_single = classify(h, target, 0.5 * std::log(lambda), 0.9, single);
  const auto rep_all = classify(h, target, 0.5 * std::log(lambda), 0.9, all);
  CHECK(static_cast<int>(rep_all.good_norm && rep_all.good_decay) <=
        static_cast<int>(rep_single.good_norm && rep_single.good_decay));
}

TEST_CASE("vlevel_check") {
  const auto v = FourierPotential::preset("sin");
  const auto region = box_region({0, 0}, 3);
  const auto u = InteractionPotential::zero();

  CHECK(vlevel_check({0.1, 0.2}, region, kGolden, v, u, 2.6, 1.0, 0.1));
  const double w00 = v.eval(0.1) + v.eval(0.2);  // plant an exact level hit at the origin
  CHECK_FALSE(vlevel_check({0.1, 0.2}, region, kGolden, v, u, w00, 1.0, 0.05));
  CHECK_THROWS(vlevel_check({0.1, 0.2}, region, kGolden, v, u, 0.0, 1.0, 0.0));
}

TEST_CASE("neumann_verify bounds hold with margin") {
  const double lambda = 1e6, delta = 1e-3;
  const auto h = diag_dominated_box(lambda, 3, {0.13, 0.41});
  const auto rep = neumann_verify(h, 2.5 * lambda, delta);
  CHECK(rep.q < 1.0);
  CHECK(rep.max_entry_violation <= 0.0);
  CHECK(rep.norm_violation <= 0.0);

  SUBCASE("ratio >= 1 is a named precondition failure") {
    const auto h10 = diag_dominated_box(10.0, 2, {0.13, 0.41});
    CHECK_THROWS_AS(neumann_verify(h10, 35.0, 0.01), PreconditionError);
  }
  SUBCASE("level-set hit is a named precondition failure") {
    const auto h1 = assemble(box_region({0, 0}, 2), 1e6, kGolden, {0.1, 0.2},
                             FourierPotential::preset("sin"), InteractionPotential::zero());
    const double on_diag = h1.diagonal.front();
    CHECK_THROWS_AS(neumann_verify(h1, on_diag, 0.05), PreconditionError);
  }
  SUBCASE("single site satisfies the bound trivially") {
    const auto h1 = diag_dominated_box(1e6, 0, {0.13, 0.41});
    REQUIRE(h1.region.size() == 1);
    const auto r1 = neumann_verify(h1, 2.5e6, 1e-3);
    CHECK(r1.max_entry_violation < 0.0);
  }
}

TEST_CASE("solve residuals stay condition-scaled") {
  RandomStream rng(55);
  for (int trial = 0; trial < 24; ++trial) {
    const double lambda = std::pow(10.0, rng.uniform(0.5, 6.0));
    const auto h = assemble(box_region({0, 0}, rng.uniform_int(1, 5)), lambda, kGolden,
                            {rng.next_double(), rng.next_double()},
                            FourierPotential::preset("cos"), InteractionPotential::zero());
    const double E = rng.uniform(2.1, 3.0) * lambda;
    const auto gs = green(h, E);
    CHECK(gs.residual_inf <= 1e-9 * std::max(1.0, 2.2e-16 * gs.cond_estimate) *
                                 std::max(1.0, std::abs(E)));
  }
}

TEST_CASE("paste_norm holds on every hypothesis-verified random trial") {
  RandomStream rng(66);
  int done = 0;
  const long N = 4;
  const double t = 2.0;
  while (done < 20) {
    const double lambda = std::pow(10.0, rng.uniform(5.0, 8.0));
    const auto h = diag_dominated_box(lambda, rng.uniform_int(4, 8),
                                      {rng.next_double(), rng.next_double()});
    const double E = rng.uniform(2.2, 3.2) * lambda;
    auto window_of = [&](Site m) {
      std::vector<Site> w;
      for (long a = std::max(m[0] - 2, h.region.lo()[0]); a <= std::min(m[0] + 2, h.region.hi()[0]);
           ++a)
        for (long c = std::max(m[1] - 2, h.region.lo()[1]);
             c <= std::min(m[1] + 2, h.region.hi()[1]); ++c)
          w.push_back({a, c});
      return w;
    };
    const auto res = paste_norm(h, window_of, E, 1e-2, t, N);
    if (!res.failure.empty() && !res.ok) continue;  // hypotheses did not verify; resample
    CHECK(res.ok);
    CHECK(res.norm <= res.bound);
    ++done;
  }
}

TEST_CASE("neumann_verify: randomized precondition-satisfying trials") {
  RandomStream rng(101);
  int done = 0;
  while (done < 200) {
    const double lambda = std::pow(10.0, rng.uniform(4.0, 8.0));
    const long radius = rng.uniform_int(0, 5);
    const std::array<double, 2> theta{rng.next_double(), rng.next_double()};
    const auto h = diag_dominated_box(lambda, radius, theta);
    const double ew = rng.uniform(2.2, 3.5);
    const double E = ew * lambda;
    const double delta = std::min(0.5 * (ew - 2.0), 1.0 / std::sqrt(lambda));
    if (16.0 / (lambda * delta) >= 1.0) continue;
    if (!vlevel_check(theta, h.region, kGolden, h.v, h.U, E, lambda, delta)) continue;
    const auto rep = neumann_verify(h, E, delta);
    CHECK(rep.max_entry_violation <= 0.0);
    CHECK(rep.norm_violation <= 0.0);
    ++done;
  }
}

TEST_CASE("perturb_verify") {
  const double lambda = 1e6, gamma = 6.0, b = 0.5;
  const auto h1 = diag_dominated_box(lambda, 3, {0.13, 0.41});
  const double E = 2.5 * lambda;
  const long N = h1.region.sigma();
  const double cap = std::exp(-3.0 * std::max(gamma, 1.0) * static_cast<double>(N));

  SUBCASE("compliant diagonal perturbation keeps the doubled bounds") {
    std::vector<double> diag = h1.diagonal;
    RandomStream rng(3);
    for (auto& d : diag) d += lambda * 0.5 * cap * rng.uniform(-1.0, 1.0);
    const auto h2 = h1.with_diagonal(diag);
    CHECK(perturb_verify(h1, h2, E, gamma, b));
  }
  SUBCASE("identity perturbation") { CHECK(perturb_verify(h1, h1, E, gamma, b)); }
  SUBCASE("oversized perturbation is rejected by name") {
    std::vector<double> diag = h1.diagonal;
    for (auto& d : diag) d += lambda * 1e-10;  // far above e^{-3 gamma N} ~ 1e-47
    const auto h2 = h1.with_diagonal(diag);
    CHECK_THROWS_WITH_AS(perturb_verify(h1, h2, E, gamma, b),
                         doctest::Contains("e^{-3 gamma1 N}"), PreconditionError);
  }
  SUBCASE("scale condition N^b <= gamma1 N / 10 is enforced") {
    CHECK_THROWS_WITH_AS(perturb_verify(h1, h1, E, 0.1, 0.9), doctest::Contains("N^b"),
                         PreconditionError);
  }
}

TEST_CASE("perturb_verify: randomized trials") {
  RandomStream rng(202);
  int done = 0;
  while (done < 120) {
    const double lambda = std::pow(10.0, rng.uniform(4.0, 8.0));
    const long radius = rng.uniform_int(1, 5);
    const auto h1 = diag_dominated_box(lambda, radius, {rng.next_double(), rng.next_double()});
    const double E = rng.uniform(2.2, 3.5) * lambda;
    const double gamma = rng.uniform(4.0, 8.0);
    const double b = 0.5;
    const long N = h1.region.sigma();
    if (std::pow(static_cast<double>(N), b) > std::max(gamma, 1.0) * N / 10.0) continue;
    const double cap = std::exp(-3.0 * std::max(gamma, 1.0) * static_cast<double>(N));
    std::vector<double> diag = h1.diagonal;
    for (auto& d : diag) d += lambda * cap * rng.uniform(-1.0, 1.0);
    try {
      CHECK(perturb_verify(h1, h1.with_diagonal(diag), E, gamma, b));
      ++done;
    } catch (const PreconditionError&) {
      continue;  // H1 may fail the decay hypothesis at this gamma; resample
    }
  }
}

TEST_CASE("paste_norm covering bound") {
  const double lambda = 1e6;
  const auto h = diag_dominated_box(lambda, 10, {0.13, 0.41});  // 21x21
  const double E = 2.5 * lambda;
  const long N = 4;
  const double t = 2.0;
  REQUIRE(4.0 * N * N * std::exp(-t * N) <= 0.5);

  auto window_of = [&](Site m) {
    std::vector<Site> w;
    for (long a = std::max(m[0] - 2, h.region.lo()[0]); a <= std::min(m[0] + 2, h.region.hi()[0]);
         ++a)
      for (long c = std::max(m[1] - 2, h.region.lo()[1]); c <= std::min(m[1] + 2, h.region.hi()[1]);
           ++c)
        w.push_back({a, c});
    return w;
  };

  SUBCASE("diagonal-dominated windows paste to the global bound") {
    const auto res = paste_norm(h, window_of, E, 1e-2, t, N);
    CHECK(res.ok);
    CHECK(res.norm <= res.bound);
  }
  SUBCASE("a planted resonance is attributed to its window") {
    const std::size_t idx = 5 * 21 + 7;
    const double bad_E = h.diagonal[idx];
    const auto res = paste_norm(h, window_of, bad_E, 1e-2, t, N);
    CHECK_FALSE(res.ok);
    REQUIRE(res.failing_site.has_value());
    CHECK(dist_inf(*res.failing_site, h.region.sites()[idx]) <= 2);
  }
  SUBCASE("a single-window region is trivially fine") {
    const auto h1 = diag_dominated_box(lambda, 2, {0.13, 0.41});
    const auto res = paste_norm(
        h1, [&](Site) { return h1.region.sites(); }, E, 1e-2, t, N);
    CHECK(res.ok);
  }
  SUBCASE("violated smallness hypothesis is reported") {
    const auto res = paste_norm(h, window_of, E, 1.0, 0.1, N);
    CHECK_FALSE(res.ok);
    CHECK(res.failure.find("4 N^2") != std::string::npos);
  }
}

TEST_CASE("badset measure on a line") {
  const auto region = box_region({0, 0}, 3);
  const auto v = FourierPotential::preset("cos");
  const auto u = InteractionPotential::zero();
  LineSegment line;
  line.origin = {0.05, 0.3};
  line.dir = {1.0, 0.0};
  line.length = 0.9;

  SUBCASE("energy far outside the spectrum: no bad phase") {
    const double lambda = 1e8;
    const auto est = badset_measure_on_line(line, region, 3.0 * lambda, 0.5 * std::log(lambda),
                                            0.9, 1000, lambda, kGolden, v, u, 9);
    CHECK(est.estimate == 0.0);
    CHECK(est.bad == 0);
  }
  SUBCASE("weak coupling mid-spectrum: mostly bad (diagnostic)") {
    const auto est =
        badset_measure_on_line(line, region, 0.3, 1.0, 0.9, 1000, 2.0, kGolden, v, u, 9);
    CHECK(est.estimate > 0.5 * line.length);
    CHECK(est.ci_hi >= est.estimate);
    CHECK(est.ci_lo <= est.estimate);
  }
  SUBCASE("degenerate segment") {
    LineSegment zero = line;
    zero.length = 0.0;
    const auto est =
        badset_measure_on_line(zero, region, 0.3, 1.0, 0.9, 1000, 2.0, kGolden, v, u, 9);
    CHECK(est.estimate == 0.0);
  }
  SUBCASE("sample floor enforced") {
    CHECK_THROWS(badset_measure_on_line(line, region, 0.3, 1.0, 0.9, 10, 2.0, kGolden, v, u, 9));
  }
}

TEST_CASE("multiscale sweep") {
  MultiscaleConfig cfg;
  cfg.scales = {8, 16, 32};
  cfg.boxes_per_scale = 6;
  cfg.lambda = 50.0;
  cfg.omega = kGolden;
  cfg.E = 12.0;
  cfg.gamma = 0.5 * std::log(cfg.lambda);
  cfg.b = 0.9;
  cfg.v = FourierPotential::preset("cos");
  cfg.U = InteractionPotential::zero();
  cfg.theta = {0.2, 0.7};
  cfg.seed = 4;

  const auto res = multiscale_sweep(cfg);
  REQUIRE(res.rows.size() == 3);
  CHECK_FALSE(res.warnings.empty());  // doubling ladder is not ~ squaring
  for (const auto& row : res.rows)
    CHECK(std::abs(row.gamma_fit_median - std::log(25.0)) < 0.25 * std::log(25.0));

  SUBCASE("single-scale ladder gives one row and no drift check") {
    cfg.scales = {6};
    const auto one = multiscale_sweep(cfg);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.rows[0].drift_ok);
  }
  SUBCASE("delocalized regime is mostly bad with a collapsed rate") {
    cfg.scales = {8};
    cfg.lambda = 0.5;
    cfg.E = 0.3;
    cfg.gamma = 0.7;
    const auto res2 = multiscale_sweep(cfg);
    CHECK(res2.rows[0].bad_fraction > 0.8);
    CHECK(std::abs(res2.rows[0].gamma_fit_median) < 0.5);
  }
}
