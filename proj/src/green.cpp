#include "qp2loc/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

namespace {

constexpr double kCondCap = 1e14;

double one_norm(const Eigen::MatrixXd& m) {
  double best = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

// Spectral norm of a symmetric matrix by power iteration with a Rayleigh
// polish; enough accuracy for threshold comparisons.
double sym_norm_power(const Eigen::MatrixXd& g, int iters = 80) {
  RandomStream rng(12345);
  Eigen::VectorXd x(g.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd y = g * x;
    const double n = y.norm();
    if (n == 0.0) return 0.0;
    y /= n;
    const double cur = std::abs(y.dot(g * y));
    if (it > 10 && std::abs(cur - lam) <= 1e-12 * std::max(1.0, cur)) return cur;
    lam = cur;
    x = y;
  }
  return lam;
}

// Signed dominant eigenvalue of symmetric G, for nearest-eigenvalue estimates.
double sym_dominant_power(const Eigen::MatrixXd& g, int iters = 60) {
  RandomStream rng(99);
  Eigen::VectorXd x(g.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1.0, 1.0);
  x.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd y = g * x;
    const double n = y.norm();
    if (n == 0.0) return 0.0;
    y /= n;
    lam = y.dot(g * y);
    x = y;
  }
  return lam;
}

GreenSolve solve_dense(const Eigen::MatrixXd& shifted) {
  const Eigen::Index n = shifted.rows();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  GreenSolve out;
  out.G = lu.inverse();
  out.G = 0.5 * (out.G + out.G.transpose()).eval();  // H symmetric, so G is too
  out.cond_estimate = one_norm(shifted) * one_norm(out.G);
  if (!out.G.allFinite() || out.cond_estimate > kCondCap) {
    const double rho = sym_dominant_power(out.G.allFinite() ? out.G : Eigen::MatrixXd::Zero(n, n));
    throw ResonantEnergy(rho != 0.0 ? 1.0 / rho : 0.0);
  }
  // Residual on a few columns (full product only for small systems).
  if (n <= 256) {
    out.residual_inf = (shifted * out.G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  } else {
    RandomStream rng(4242);
    for (int s = 0; s < 8; ++s) {
      const Eigen::Index j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(n));
      Eigen::VectorXd r = shifted * out.G.col(j);
      r[j] -= 1.0;
      out.residual_inf = std::max(out.residual_inf, r.cwiseAbs().maxCoeff());
    }
  }
  return out;
}

struct EnvelopeFit {
  double rate = 0.0;
  bool ok = false;
};

// Log-linear fit of the per-distance maxima of |G| for d >= ceil(sigma/4).
EnvelopeFit envelope_rate(const Eigen::MatrixXd& g, const std::vector<Site>& sites, long sigma) {
  const long dmin = std::max<long>(1, static_cast<long>(std::ceil(sigma / 4.0)));
  std::map<long, double> env;
  const int n = static_cast<int>(sites.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const long d = dist_inf(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
      if (d < dmin) continue;
      double& slot = env[d];
      slot = std::max(slot, std::abs(g(i, j)));
    }
  std::vector<double> xs, ys;
  for (const auto& [d, m] : env) {
    if (m < 1e-300) continue;
    xs.push_back(-static_cast<double>(d));
    ys.push_back(std::log(m));
  }
  if (xs.size() < 2) return {};
  const LinearFit f = linear_fit(xs, ys);
  return {f.slope, true};
}

bool decay_ok(const Eigen::MatrixXd& g, const std::vector<Site>& sites, long sigma, double gamma,
              double relax) {
  const double quarter = sigma / 4.0;
  const int n = static_cast<int>(sites.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const long d = dist_inf(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
      if (static_cast<double>(d) < quarter) continue;
      if (std::abs(g(i, j)) >= relax * std::exp(-gamma * static_cast<double>(d))) return false;
    }
  return true;
}

}  // namespace

GreenSolve green(const BoxHamiltonian& h, double E) {
  Eigen::MatrixXd shifted = h.dense();
  shifted.diagonal().array() -= E;
  return solve_dense(shifted);
}

GreenReport classify(const BoxHamiltonian& h, double E, double gamma, double b,
                     const ClassifyOptions& opt) {
  GreenReport rep;
  rep.E = E;
  rep.gamma = gamma;
  rep.b = b;
  const long sigma = h.region.sigma();
  const double norm_cap = opt.relax * std::exp(std::pow(static_cast<double>(sigma), b)) / h.lambda;

  std::vector<std::array<long, 2>> shifts{{0, 0}};
  if (opt.all_translations) {
    shifts = h.U.distinct_translations(h.region.lo()[0], h.region.hi()[0], h.region.lo()[1],
                                       h.region.hi()[1]);
  }

  rep.good_norm = true;
  rep.good_decay = true;
  bool first = true;
  for (const auto& t : shifts) {
    BoxHamiltonian ht = (t[0] == 0 && t[1] == 0)
                            ? h
                            : assemble(h.region, h.lambda, h.omega, h.theta, h.v, h.U.translated(t),
                                       h.m_int);
    GreenSolve gs;
    try {
      gs = green(ht, E);
    } catch (const ResonantEnergy&) {
      if (!opt.resonant_is_bad) throw;
      rep.resonant = true;
      rep.good_norm = false;
      rep.good_decay = false;
      return rep;
    }
    const double ns = sym_norm_power(gs.G);
    if (first) {
      rep.norm_spectral = ns;
      rep.norm_hs = gs.G.norm();
      const EnvelopeFit ef = envelope_rate(gs.G, ht.region.sites(), sigma);
      rep.gamma_fit = ef.rate;
      rep.gamma_fit_ok = ef.ok;
      first = false;
    }
    rep.good_norm = rep.good_norm && (ns < norm_cap);
    rep.good_decay = rep.good_decay && decay_ok(gs.G, ht.region.sites(), sigma, gamma, opt.relax);
    if (!rep.good_norm && !rep.good_decay) break;
  }
  return rep;
}

bool vlevel_check(std::array<double, 2> theta, const ElementaryRegion& region, double omega,
                  const FourierPotential& v, const InteractionPotential& U, double E,
                  double lambda, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("vlevel_check: delta must be positive");
  const std::vector<double> values = U.value_set();
  for (const Site& s : region.sites()) {
    const double w =
        v.eval(phase_mod1(s[0], omega, theta[0])) + v.eval(phase_mod1(s[1], omega, theta[1]));
    for (double uj : values)
      if (std::abs(w - (E - uj) / lambda) <= delta) return false;
  }
  return true;
}

NeumannReport neumann_verify(const BoxHamiltonian& h, double E, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("neumann_verify: delta must be positive");
  if (!vlevel_check(h.theta, h.region, h.omega, h.v, h.U, E, h.lambda, delta))
    throw PreconditionError("neumann_verify: level-set hit (clearance < delta at some site)");
  NeumannReport rep;
  rep.q = 16.0 / (h.lambda * delta);
  if (rep.q >= 1.0)
    throw PreconditionError("neumann_verify: Neumann ratio 16/(lambda delta) >= 1");

  const GreenSolve gs = green(h, E);
  const double pref = 1.0 / (1.0 - rep.q);
  const auto& sites = h.region.sites();
  const int n = static_cast<int>(sites.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const long d = dist_inf(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
      const double predicted = pref * std::pow(rep.q, static_cast<double>(d + 1));
      worst = std::max(worst, std::abs(gs.G(i, j)) - predicted);
    }
  rep.max_entry_violation = worst;
  rep.norm_violation = sym_norm_power(gs.G) - 8.0 / (h.lambda * delta);
  return rep;
}

bool perturb_verify(const BoxHamiltonian& h1, const BoxHamiltonian& h2, double E, double gamma,
                    double b) {
  if (h1.region.size() != h2.region.size())
    throw PreconditionError("perturb_verify: region mismatch");
  const long N = h1.region.sigma();
  const double gamma1 = std::max(gamma, 1.0);
  if (std::pow(static_cast<double>(N), b) > gamma1 * static_cast<double>(N) / 10.0)
    throw PreconditionError("perturb_verify: N^b > gamma1 N / 10");

  // V is the potential part of H = Delta + lambda V (the spectral shift E is
  // applied to the inverses, not folded into V).
  double dv = 0.0, v1max = 0.0, v2max = 0.0;
  for (std::size_t i = 0; i < h1.diagonal.size(); ++i) {
    dv = std::max(dv, std::abs(h1.diagonal[i] - h2.diagonal[i]) / h1.lambda);
    v1max = std::max(v1max, std::abs(h1.diagonal[i]) / h1.lambda);
    v2max = std::max(v2max, std::abs(h2.diagonal[i]) / h2.lambda);
  }
  const double cap = std::exp(-3.0 * gamma1 * static_cast<double>(N));
  if (dv > cap)
    throw PreconditionError("perturb_verify: ||V1-V2||_inf exceeds e^{-3 gamma1 N}");
  const double vcap = 2.0 + h1.m_int;  // sup|v_1 + v_2| <= 2 plus the interaction share
  if (v1max > vcap || v2max > vcap)
    throw PreconditionError("perturb_verify: ||V||_inf exceeds 2 + m_int");

  const double sig_b = std::pow(static_cast<double>(N), b);
  const GreenSolve g1 = green(h1, E);
  if (sym_norm_power(g1.G) >= std::exp(sig_b) / h1.lambda)
    throw PreconditionError("perturb_verify: H1 norm bound fails");
  if (!decay_ok(g1.G, h1.region.sites(), N, gamma, 1.0))
    throw PreconditionError("perturb_verify: H1 off-diagonal decay fails");

  const GreenSolve g2 = green(h2, E);
  const bool norm_ok = sym_norm_power(g2.G) < 2.0 * std::exp(sig_b) / h2.lambda;
  const bool dec_ok = decay_ok(g2.G, h2.region.sites(), N, gamma, 2.0);
  return norm_ok && dec_ok;
}

PasteResult paste_norm(const BoxHamiltonian& h,
                       const std::function<std::vector<Site>(Site)>& window_of, double E, double A,
                       double t, long N) {
  PasteResult res;
  if (4.0 * static_cast<double>(N) * static_cast<double>(N) * std::exp(-t * static_cast<double>(N)) >
      0.5) {
    res.failure = "hypothesis 4 N^2 e^{-tN} <= 1/2 fails";
    return res;
  }
  const double boundary_cap = std::exp(-t * static_cast<double>(N));
  for (const Site& m : h.region.sites()) {
    const std::vector<Site> w = window_of(m);
    bool has_m = false;
    long diam = 0;
    for (const Site& s : w) {
      if (s == m) has_m = true;
      for (const Site& s2 : w) diam = std::max(diam, dist_inf(s, s2));
    }
    if (!has_m || diam > N) {
      res.failing_site = m;
      res.failure = "window invalid (m missing or diameter > N)";
      return res;
    }
    Eigen::MatrixXd hw = restrict_dense(h, w);
    hw.diagonal().array() -= E;
    GreenSolve gw;
    try {
      gw = solve_dense(hw);
    } catch (const ResonantEnergy&) {
      res.failing_site = m;
      res.failure = "window resolvent resonant";
      return res;
    }
    if (sym_norm_power(gw.G) >= A) {
      res.failing_site = m;
      res.failure = "window norm >= A";
      return res;
    }
    const std::vector<Site> bd = internal_boundary(w, h.region);
    int mi = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] == m) mi = static_cast<int>(i);
    for (const Site& s : bd) {
      int si = 0;
      for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i] == s) si = static_cast<int>(i);
      if (std::abs(gw.G(mi, si)) > boundary_cap) {
        res.failing_site = m;
        res.failure = "window boundary decay fails";
        return res;
      }
    }
  }
  const GreenSolve g = green(h, E);
  res.norm = sym_norm_power(g.G);
  res.bound = 2.0 * static_cast<double>(N) * static_cast<double>(N) * A;
  res.ok = res.norm <= res.bound;
  if (!res.ok) res.failure = "pasted norm exceeds 2 N^2 A";
  return res;
}

MeasureEstimate badset_measure_on_line(const LineSegment& line, const ElementaryRegion& region,
                                       double E, double gamma, double b, int n_samples,
                                       double lambda, double omega, const FourierPotential& v,
                                       const InteractionPotential& U, std::uint64_t seed) {
  if (n_samples < 1000)
    throw std::invalid_argument("badset_measure_on_line: need at least 1e3 samples");
  MeasureEstimate est;
  if (line.length <= 0.0) return est;
  est.total = n_samples;

  std::vector<int> bad(static_cast<std::size_t>(n_samples), 0);
  parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t i) {
    RandomStream rng(seed + 1000003ULL * i);
    const double jitter = rng.uniform(-0.5, 0.5);
    const double s = line.length * ((static_cast<double>(i) + 0.5 + jitter) /
                                    static_cast<double>(n_samples));
    const std::array<double, 2> theta{line.origin[0] + s * line.dir[0],
                                      line.origin[1] + s * line.dir[1]};
    ClassifyOptions opt;
    opt.resonant_is_bad = true;
    const BoxHamiltonian h = assemble(region, lambda, omega, theta, v, U);
    const GreenReport rep = classify(h, E, gamma, b, opt);
    bad[i] = (rep.good_norm && rep.good_decay) ? 0 : 1;
  });
  for (int x : bad) est.bad += x;

  const double p = static_cast<double>(est.bad) / static_cast<double>(est.total);
  const double half = 1.96 * std::sqrt(std::max(p * (1.0 - p), 1e-12) / est.total);
  est.estimate = p * line.length;
  est.ci_lo = std::max(0.0, (p - half)) * line.length;
  est.ci_hi = std::min(1.0, (p + half)) * line.length;
  return est;
}

MultiscaleResult multiscale_sweep(const MultiscaleConfig& cfg) {
  if (cfg.scales.empty()) throw std::invalid_argument("multiscale_sweep: empty scale ladder");
  MultiscaleResult out;
  for (std::size_t j = 0; j + 1 < cfg.scales.size(); ++j) {
    if (cfg.scales[j + 1] <= cfg.scales[j])
      throw std::invalid_argument("multiscale_sweep: scales must increase");
    const double nj = static_cast<double>(cfg.scales[j]);
    const double next = static_cast<double>(cfg.scales[j + 1]);
    if (next < std::pow(nj, 1.5) || next > std::pow(nj, 2.5))
      out.warnings.push_back("scale ladder is far from N_{j+1} ~ N_j^2 at step " +
                             std::to_string(j));
  }

  double prev_med = 0.0;
  for (std::size_t j = 0; j < cfg.scales.size(); ++j) {
    const long N = cfg.scales[j];
    std::vector<int> bad(static_cast<std::size_t>(cfg.boxes_per_scale), 0);
    std::vector<double> fits(static_cast<std::size_t>(cfg.boxes_per_scale),
                             std::numeric_limits<double>::quiet_NaN());
    parallel_for(static_cast<std::size_t>(cfg.boxes_per_scale), [&](std::size_t i) {
      RandomStream rng(cfg.seed + 7919ULL * (j + 1) + i);
      const long c1 = rng.uniform_int(-10000, 10000);
      const long c2 = rng.uniform_int(-10000, 10000);
      const ElementaryRegion box = make_region({c1, c2}, {c1 + N, c2 + N});
      ClassifyOptions opt;
      opt.resonant_is_bad = true;
      const BoxHamiltonian h = assemble(box, cfg.lambda, cfg.omega, cfg.theta, cfg.v, cfg.U);
      const GreenReport rep = classify(h, cfg.E, cfg.gamma, cfg.b, opt);
      bad[i] = (rep.good_norm && rep.good_decay) ? 0 : 1;
      if (!rep.resonant && rep.gamma_fit_ok) fits[i] = rep.gamma_fit;
    });

    MultiscaleRow row;
    row.scale = N;
    int nb = 0;
    for (int x : bad) nb += x;
    row.bad_fraction = static_cast<double>(nb) / static_cast<double>(cfg.boxes_per_scale);
    std::vector<double> good_fits;
    for (double f : fits)
      if (std::isfinite(f)) good_fits.push_back(f);
    if (!good_fits.empty()) {
      std::sort(good_fits.begin(), good_fits.end());
      row.gamma_fit_median = good_fits[good_fits.size() / 2];
    }
    if (j > 0 && out.rows.size() == j) {
      const double allowed_drop = std::pow(static_cast<double>(cfg.scales[j - 1]), -cfg.delta_prime);
      row.drift_ok = row.gamma_fit_median >= prev_med - allowed_drop;
    }
    prev_med = row.gamma_fit_median;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace qp2loc
