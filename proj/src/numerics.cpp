#include "qp2loc/numerics.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qp2loc {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  LinearFit f;
  f.n = x.size();
  if (f.n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(f.n), my = sy / static_cast<double>(f.n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

double symmetric_extreme_eigenvalue(
    std::size_t dim, const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec,
    int max_iter, double tol, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("symmetric_extreme_eigenvalue: empty operator");
  const int m = std::min<int>(max_iter, static_cast<int>(dim));
  RandomStream rng(seed);
  Eigen::VectorXd q(dim);
  for (std::size_t i = 0; i < dim; ++i) q[static_cast<Eigen::Index>(i)] = rng.uniform(-1.0, 1.0);
  q.normalize();

  std::vector<Eigen::VectorXd> basis;
  basis.reserve(static_cast<std::size_t>(m));
  std::vector<double> alpha, beta;
  Eigen::VectorXd w(dim);
  double prev = 0.0;
  for (int j = 0; j < m; ++j) {
    basis.push_back(q);
    matvec(q, w);
    double a = q.dot(w);
    alpha.push_back(a);
    w -= a * q;
    if (j > 0) w -= beta.back() * basis[static_cast<std::size_t>(j - 1)];
    for (const auto& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
    double bnorm = w.norm();

    // Rayleigh estimate from the tridiagonal section every few steps.
    if (j >= 2 && (j % 4 == 0 || bnorm < 1e-14 || j == m - 1)) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j + 1, j + 1);
      for (int i = 0; i <= j; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
      for (int i = 0; i < j; ++i) {
        t(i, i + 1) = beta[static_cast<std::size_t>(i)];
        t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(j);
      const double cur = (std::abs(lo) > std::abs(hi)) ? lo : hi;
      if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur)) && j > 8) return std::abs(cur);
      prev = cur;
      if (bnorm < 1e-14) return std::abs(cur);
    }
    if (bnorm < 1e-14) break;
    beta.push_back(bnorm);
    q = w / bnorm;
  }
  return std::abs(prev);
}

double spectral_norm_sym(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

namespace {
std::atomic<int> g_threads{0};
}

int thread_count() {
  int n = g_threads.load();
  if (n > 0) return n;
  if (const char* env = std::getenv("QP2LOC_THREADS")) {
    int e = std::atoi(env);
    if (e > 0) return e;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_thread_count(int n) { g_threads.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const int nt = std::min<int>(thread_count(), static_cast<int>(n));
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt - 1));
  for (int t = 0; t < nt - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qp2loc
