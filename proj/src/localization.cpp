#include "qp2loc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include <Eigen/SparseLU>
#include <Eigen/SparseCholesky>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

namespace {

constexpr std::size_t kDenseCap = 4096;
constexpr std::size_t kWindowedCap = 40000;
constexpr int kWindowEigCap = 2000;

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  double mag = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > mag) {
      mag = std::abs(v[i]);
      best = i;
    }
  if (v[best] < 0.0) v = -v;
}

long inertia_below(const Eigen::SparseMatrix<double>& hs, double x) {
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double jitter = attempt == 0 ? 0.0 : attempt * 1e-11 * std::max(1.0, std::abs(x));
    Eigen::SparseMatrix<double> m = hs;
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.coeffRef(i, i) -= (x + jitter);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
    if (ldlt.info() != Eigen::Success) continue;
    const auto d = ldlt.vectorD();
    bool finite = true;
    long neg = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d[i])) {
        finite = false;
        break;
      }
      if (d[i] < 0.0) ++neg;
    }
    if (finite) return neg;
  }
  throw std::runtime_error("inertia count failed (factorization breakdown)");
}

// One shift-invert Lanczos pass around sigma; returns residual-checked pairs
// with eigenvalues inside [lo, hi]. Vectors in `deflate` are projected out of
// the Krylov space, so repeated passes can pick up near-degenerate partners.
std::vector<EigenPair> shift_invert_pass(const Eigen::SparseMatrix<double>& hs, double sigma,
                                         double lo, double hi, int m,
                                         const std::vector<Eigen::VectorXd>& deflate,
                                         std::uint64_t seed) {
  const Eigen::Index n = hs.rows();
  Eigen::SparseMatrix<double> shifted = hs;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) return {};

  RandomStream rng(seed);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q[i] = rng.uniform(-1.0, 1.0);
  for (const auto& d : deflate) q -= d.dot(q) * d;
  if (q.norm() < 1e-12) return {};
  q.normalize();

  std::vector<Eigen::VectorXd> basis;
  std::vector<double> alpha, beta;
  m = std::min<int>(m, static_cast<int>(n));
  for (int j = 0; j < m; ++j) {
    basis.push_back(q);
    Eigen::VectorXd w = lu.solve(q);
    for (const auto& d : deflate) w -= d.dot(w) * d;
    const double a = q.dot(w);
    alpha.push_back(a);
    w -= a * q;
    if (j > 0) w -= beta.back() * basis[static_cast<std::size_t>(j - 1)];
    for (const auto& b : basis) w -= b.dot(w) * b;
    for (const auto& b : basis) w -= b.dot(w) * b;  // second sweep for safety
    const double bn = w.norm();
    if (bn < 1e-13) break;
    beta.push_back(bn);
    q = w / bn;
  }

  const int k = static_cast<int>(alpha.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
  for (int i = 0; i + 1 < k; ++i) {
    t(i, i + 1) = beta[static_cast<std::size_t>(i)];
    t(i + 1, i) = beta[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);

  std::vector<EigenPair> out;
  double hnorm = 4.0;  // coarse scale for the residual tolerance
  for (Eigen::Index i = 0; i < n; ++i) hnorm = std::max(hnorm, 4.0 + std::abs(hs.coeff(i, i)));
  for (int i = 0; i < k; ++i) {
    const double nu = es.eigenvalues()[i];
    if (std::abs(nu) < 1e-14) continue;
    const double mu = sigma + 1.0 / nu;
    if (mu < lo || mu > hi) continue;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < k; ++j) x += es.eigenvectors()(j, i) * basis[static_cast<std::size_t>(j)];
    x.normalize();
    const double resid = (hs * x - mu * x).norm();
    if (resid > 1e-9 * hnorm) continue;
    fix_sign(x);
    out.push_back({mu, std::move(x)});
  }
  return out;
}

// All eigenpairs in [lo, hi] for a sparse H known (via inertia) to hold
// `expected` of them there.
std::vector<EigenPair> slice_window(const Eigen::SparseMatrix<double>& hs, double lo, double hi,
                                    long expected, int depth = 0) {
  std::vector<EigenPair> out;
  if (expected <= 0) return out;
  if (expected > 12 && depth < 24) {
    const double mid = 0.5 * (lo + hi);
    const long below_mid = inertia_below(hs, mid) - inertia_below(hs, lo);
    auto left = slice_window(hs, lo, mid, below_mid, depth + 1);
    auto right = slice_window(hs, mid, hi, expected - below_mid, depth + 1);
    out = std::move(left);
    out.insert(out.end(), std::make_move_iterator(right.begin()),
               std::make_move_iterator(right.end()));
    return out;
  }

  std::vector<Eigen::VectorXd> deflate;
  for (int pass = 0; pass < 4 && static_cast<long>(out.size()) < expected; ++pass) {
    // nudge the shift per pass so an eigenvalue hit cannot sink every retry
    const double sigma = 0.5 * (lo + hi) + (1e-9 + pass * 3.7e-7) * (hi - lo);
    const int m = 60 + 40 * pass + 6 * static_cast<int>(expected);
    auto found = shift_invert_pass(hs, sigma, lo, hi, m, deflate, 1000 + 17 * pass);
    for (auto& p : found) {
      bool dup = false;
      for (const auto& q : out)
        if (std::abs(q.value - p.value) < 1e-10 && std::abs(q.vector.dot(p.vector)) > 0.5) dup = true;
      if (!dup) {
        deflate.push_back(p.vector);
        out.push_back(std::move(p));
      }
    }
  }
  if (static_cast<long>(out.size()) != expected)
    throw std::runtime_error("windowed eigensolve: converged " + std::to_string(out.size()) +
                             " of " + std::to_string(expected) + " eigenpairs in a slice");
  return out;
}

}  // namespace

std::vector<double> eigenvalues_dense(const BoxHamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense(), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

long eigenvalue_count_below(const BoxHamiltonian& h, double x) {
  return inertia_below(h.sparse(), x);
}

std::vector<EigenPair> eigensolve(const BoxHamiltonian& h,
                                  std::optional<std::pair<double, double>> window) {
  const std::size_t n = h.region.size();
  if (!window) {
    if (n > kDenseCap)
      throw std::invalid_argument(
          "eigensolve: box too large for a full decomposition; pass an energy window");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    std::vector<EigenPair> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i].value = es.eigenvalues()[static_cast<Eigen::Index>(i)];
      out[i].vector = es.eigenvectors().col(static_cast<Eigen::Index>(i));
      fix_sign(out[i].vector);
    }
    return out;
  }

  if (n > kWindowedCap)
    throw std::invalid_argument("eigensolve: box exceeds the windowed-solve site cap");
  const auto [lo, hi] = *window;
  if (!(lo < hi)) throw std::invalid_argument("eigensolve: empty window");

  const Eigen::SparseMatrix<double> hs = h.sparse();
  const long expected = inertia_below(hs, hi) - inertia_below(hs, lo);
  if (expected > kWindowEigCap)
    throw std::invalid_argument("eigensolve: window holds > 2000 eigenvalues; narrow it");

  // Shift-invert slicing beats a full dense decomposition well before the
  // dense cap; keep the dense path only for small boxes.
  if (n <= 1024) {
    auto all = eigensolve(h, std::nullopt);
    std::vector<EigenPair> out;
    for (auto& p : all)
      if (p.value >= lo && p.value <= hi) out.push_back(std::move(p));
    return out;
  }

  auto out = slice_window(hs, lo, hi, expected);
  std::sort(out.begin(), out.end(), [](const EigenPair& a, const EigenPair& b) {
    return a.value < b.value;
  });
  return out;
}

DecayProfile decay_profile(const Eigen::VectorXd& psi, const ElementaryRegion& region,
                           double floor, double eigenvalue) {
  if (static_cast<std::size_t>(psi.size()) != region.size())
    throw std::invalid_argument("decay_profile: vector/region size mismatch");
  DecayProfile prof;
  prof.eigenvalue = eigenvalue;

  double s2 = 0.0, s4 = 0.0, best = 0.0;
  std::size_t ci = 0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    s2 += a * a;
    s4 += a * a * a * a;
    if (a > best) {
      best = a;
      ci = static_cast<std::size_t>(i);
    }
  }
  prof.ipr = s4 / (s2 * s2);
  prof.center = region.sites()[ci];

  // Per-distance amplitude envelope. A raw all-site fit against the max
  // metric caps its own r^2 at 0.75 for product-localized states (the l1/linf
  // shell spread), so the envelope is what carries the decay rate.
  std::map<long, double> env;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    if (a < floor) continue;
    double& slot = env[dist_inf(region.sites()[static_cast<std::size_t>(i)], prof.center)];
    slot = std::max(slot, a);
  }
  std::vector<double> xs, ys;
  for (const auto& [d, a] : env) {
    xs.push_back(-static_cast<double>(d));
    ys.push_back(std::log(a));
  }
  if (xs.size() < 2) {
    prof.rate = std::numeric_limits<double>::infinity();  // delta-like state
    prof.r2 = 1.0;
    prof.fit_ok = true;
    return prof;
  }
  const LinearFit f = linear_fit(xs, ys);
  prof.r2 = f.r2;
  prof.fit_ok = f.r2 >= 0.8;
  prof.rate = prof.fit_ok ? std::max(0.0, f.slope) : f.slope;
  return prof;
}

double poisson_check(const BoxHamiltonian& big, const Eigen::VectorXd& psi, double E,
                     const ElementaryRegion& sub, Site m) {
  if (static_cast<std::size_t>(psi.size()) != big.region.size())
    throw std::invalid_argument("poisson_check: psi does not match the outer box");
  // sub and its outer neighbors must sit inside the outer box
  for (const Site& s : sub.sites()) {
    if (!big.region.contains(s[0], s[1]))
      throw std::invalid_argument("poisson_check: sub-region leaves the outer box");
    for (const Site d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
      const long n1 = s[0] + d[0], n2 = s[1] + d[1];
      if (!sub.contains(n1, n2) && !big.region.contains(n1, n2))
        throw std::invalid_argument("poisson_check: outer neighbor of sub-region leaves the box");
    }
  }
  const int mi = sub.index_of(m[0], m[1]);
  if (mi < 0) throw std::invalid_argument("poisson_check: m outside sub-region");
  for (const Site d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}})
    if (!sub.contains(m[0] + d[0], m[1] + d[1]))
      throw std::invalid_argument("poisson_check: m must be interior to the sub-region");

  Eigen::MatrixXd hsub = restrict_dense(big, sub.sites());
  hsub.diagonal().array() -= E;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(hsub);
  Eigen::VectorXd chi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sub.size()));
  for (std::size_t i = 0; i < sub.size(); ++i) {
    const Site& s = sub.sites()[i];
    for (const Site d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
      const long n1 = s[0] + d[0], n2 = s[1] + d[1];
      if (sub.contains(n1, n2)) continue;
      const int bi = big.region.index_of(n1, n2);
      chi[static_cast<Eigen::Index>(i)] += psi[bi];
    }
  }
  const Eigen::VectorXd g_chi = lu.solve(chi);
  if (!g_chi.allFinite()) throw ResonantEnergy(E);
  const int big_mi = big.region.index_of(m[0], m[1]);
  return std::abs(psi[big_mi] + g_chi[mi]);
}

std::optional<long> annulus_scan(double lambda, double omega, std::array<double, 2> theta,
                                 const FourierPotential& v, const InteractionPotential& U,
                                 double E, long N, double r0, double gamma, double b,
                                 double relax) {
  const double nr = static_cast<double>(N);
  const long r_lo = static_cast<long>(std::ceil(std::pow(nr, r0 / 2.0)));
  const long r_hi = static_cast<long>(std::floor(std::pow(nr, r0)));
  const long width = std::max<long>(1, std::lround(std::pow(nr, r0 / 4.0)));

  ClassifyOptions opt;
  opt.all_translations = true;
  opt.relax = relax;
  opt.resonant_is_bad = true;

  std::map<Site, bool> cache;  // center -> good
  auto center_good = [&](Site c) {
    auto it = cache.find(c);
    if (it != cache.end()) return it->second;
    const BoxHamiltonian h = assemble(box_region(c, N), lambda, omega, theta, v, U);
    const GreenReport rep = classify(h, E, gamma, b, opt);
    const bool good = rep.good_norm && rep.good_decay;
    cache.emplace(c, good);
    return good;
  };

  for (long R = r_lo; R <= r_hi; ++R) {
    bool all_good = true;
    for (long n1 = -(R + width); n1 <= R + width && all_good; ++n1)
      for (long n2 = -(R + width); n2 <= R + width && all_good; ++n2) {
        const long rinf = std::max(std::labs(n1), std::labs(n2));
        if (rinf < R - width || rinf > R + width) continue;
        if (!center_good({n1, n2})) all_good = false;
      }
    if (all_good) return R;
  }
  return std::nullopt;
}

namespace {

// Eigendecomposition laid out for fast lazy Green's-function entries:
// modes.col(i) holds the eigenvector components at site i.
struct BoxModes {
  Eigen::VectorXd mu;
  Eigen::MatrixXd vt;  // eigenvectors transposed
  void compute(const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    mu = es.eigenvalues();
    vt = es.eigenvectors().transpose();
  }
};

// Good/bad of one box at a single energy, with early exit on the first
// violated decay pair. The spectral norm of G is 1/gap, gap = min |mu - E|.
bool box_good_at(const BoxModes& bm, const std::vector<Site>& sites, long sigma, double lambda,
                 double E, double gamma, double b, double relax) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < bm.mu.size(); ++i) gap = std::min(gap, std::abs(bm.mu[i] - E));
  const double norm_cap = relax * std::exp(std::pow(static_cast<double>(sigma), b)) / lambda;
  if (!(gap > 0.0) || 1.0 / gap >= norm_cap) return false;

  const long dmin = static_cast<long>(std::ceil(sigma / 4.0));
  const int n = static_cast<int>(sites.size());
  Eigen::VectorXd weights(bm.mu.size());
  for (Eigen::Index i = 0; i < bm.mu.size(); ++i) weights[i] = 1.0 / (bm.mu[i] - E);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const long d = dist_inf(sites[static_cast<std::size_t>(i)], sites[static_cast<std::size_t>(j)]);
      if (d < dmin) continue;
      const double gij = (bm.vt.col(i).array() * bm.vt.col(j).array() * weights.array()).sum();
      if (std::abs(gij) >= relax * std::exp(-gamma * static_cast<double>(d))) return false;
    }
  }
  return true;
}

}  // namespace

ResonanceScan double_resonance_scan(const ResonanceScanConfig& cfg) {
  if (cfg.M >= cfg.N) throw std::invalid_argument("double_resonance_scan: need M < N");
  ResonanceScan scan;

  // Reference spectrum at theta_ref over all distinct translations of U.
  {
    const ElementaryRegion ref = box_region({0, 0}, cfg.M);
    for (const auto& t :
         cfg.U.distinct_translations(ref.lo()[0], ref.hi()[0], ref.lo()[1], ref.hi()[1])) {
      const BoxHamiltonian h =
          assemble(ref, cfg.lambda, cfg.omega, cfg.theta_ref, cfg.v, cfg.U.translated(t));
      for (double e : eigenvalues_dense(h)) scan.energies.push_back(e);
    }
    std::sort(scan.energies.begin(), scan.energies.end());
  }

  const long k_max = static_cast<long>(std::ceil(cfg.K_hi));
  for (long k1 = -k_max; k1 <= k_max; ++k1)
    for (long k2 = -k_max; k2 <= k_max; ++k2) {
      const double r = std::hypot(static_cast<double>(k1), static_cast<double>(k2));
      if (r >= cfg.K_lo && r <= cfg.K_hi) scan.annulus.push_back({k1, k2});
    }
  if (scan.annulus.empty()) return scan;

  const int nk = static_cast<int>(scan.annulus.size());
  std::vector<char> k_bad(static_cast<std::size_t>(nk), 0);
  std::vector<std::vector<std::tuple<long, long, int, int, int>>> rows_per_k(
      static_cast<std::size_t>(nk));

  parallel_for(static_cast<std::size_t>(nk), [&](std::size_t ki) {
    const Site k = scan.annulus[ki];
    const ElementaryRegion mbox_region = box_region(k, cfg.M);
    const ElementaryRegion nbox_region = box_region(k, cfg.N);
    const auto m_shifts = cfg.U.distinct_translations(mbox_region.lo()[0], mbox_region.hi()[0],
                                                      mbox_region.lo()[1], mbox_region.hi()[1]);

    std::vector<BoxModes> m_es(m_shifts.size());
    for (std::size_t t = 0; t < m_shifts.size(); ++t) {
      const BoxHamiltonian h = assemble(mbox_region, cfg.lambda, cfg.omega, cfg.theta_ref, cfg.v,
                                        cfg.U.translated(m_shifts[t]));
      m_es[t].compute(h.dense());
    }
    // The N-box is consulted at most a handful of times per k (the energy
    // loop stops at the first doubly-bad energy), so a direct solve per
    // energy beats caching its eigendecomposition.
    const BoxHamiltonian n_h =
        assemble(nbox_region, cfg.lambda, cfg.omega, cfg.theta_ref, cfg.v, cfg.U);
    ClassifyOptions n_opt;
    n_opt.all_translations = true;
    n_opt.relax = cfg.relax;
    n_opt.resonant_is_bad = true;

    for (int j = 0; j < static_cast<int>(scan.energies.size()); ++j) {
      const double E = scan.energies[static_cast<std::size_t>(j)];
      bool m_good = true;
      for (std::size_t t = 0; t < m_shifts.size() && m_good; ++t)
        m_good = box_good_at(m_es[t], mbox_region.sites(), mbox_region.sigma(), cfg.lambda, E,
                             cfg.gamma, cfg.b, cfg.relax);
      if (m_good) {
        rows_per_k[ki].emplace_back(k[0], k[1], j, 1, -1);
        continue;
      }
      const GreenReport n_rep = classify(n_h, E, cfg.gamma, cfg.b, n_opt);
      const bool n_good = n_rep.good_norm && n_rep.good_decay;
      rows_per_k[ki].emplace_back(k[0], k[1], j, 0, n_good ? 1 : 0);
      if (!n_good) {
        k_bad[ki] = 1;
        break;  // k is established bad; remaining energies can be skipped
      }
    }
  });

  for (int ki = 0; ki < nk; ++ki) {
    for (const auto& row : rows_per_k[static_cast<std::size_t>(ki)]) scan.rows.push_back(row);
    if (k_bad[static_cast<std::size_t>(ki)]) scan.bad_pairs.push_back(scan.annulus[static_cast<std::size_t>(ki)]);
  }
  // merge order: energy index first, then k
  std::sort(scan.rows.begin(), scan.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<2>(a), std::get<0>(a), std::get<1>(a)) <
           std::tie(std::get<2>(b), std::get<0>(b), std::get<1>(b));
  });
  scan.bad_fraction = static_cast<double>(scan.bad_pairs.size()) / static_cast<double>(nk);
  return scan;
}

double zero_mode_residual(const FourierPotential& v, double omega, double lambda, double theta1,
                          double theta2, long window_radius) {
  const SymmetryReport rep = classify_symmetry(v);
  if (rep.kind != SymmetryReport::Kind::TypeII && rep.kind != SymmetryReport::Kind::Both)
    throw std::invalid_argument("zero_mode_residual: potential must have Type II symmetry");
  if (window_radius < 2) throw std::invalid_argument("zero_mode_residual: window too small");

  auto psi = [](long n1, long n2) -> double {
    if (n1 != n2) return 0.0;
    return (n1 % 2 == 0) ? 1.0 : -1.0;
  };
  double worst = 0.0;
  for (long n1 = -(window_radius - 1); n1 <= window_radius - 1; ++n1)
    for (long n2 = -(window_radius - 1); n2 <= window_radius - 1; ++n2) {
      double h_psi = psi(n1 + 1, n2) + psi(n1 - 1, n2) + psi(n1, n2 + 1) + psi(n1, n2 - 1);
      h_psi += lambda * (v.eval(n1 * omega + theta1) + v.eval(n2 * omega + theta2)) * psi(n1, n2);
      worst = std::max(worst, std::abs(h_psi));
    }
  return worst;
}

}  // namespace qp2loc
