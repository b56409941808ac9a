#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace qp2loc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Least-squares line y = intercept + slope*x with coefficient of determination.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Largest eigenvalue in absolute value of a symmetric operator given through
// its matvec. Lanczos with full reorthogonalization; dim is the vector size.
double symmetric_extreme_eigenvalue(
    std::size_t dim, const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec,
    int max_iter = 300, double tol = 1e-13, std::uint64_t seed = 7);

// Spectral norm of a dense symmetric matrix (largest |eigenvalue|).
double spectral_norm_sym(const Eigen::MatrixXd& a);

// Number of worker threads used by parallel loops. Resolution order:
// explicit set_thread_count() > QP2LOC_THREADS > hardware_concurrency.
int thread_count();
void set_thread_count(int n);

// Chunked parallel loop over [0, n). body(i) must only write to index-i slots
// of preallocated output, so results are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Deterministic stream of doubles in [0,1); splitmix64 under the hood.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }
  long long uniform_int(long long lo, long long hi) {  // inclusive bounds
    return lo + static_cast<long long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

// FNV-1a over a byte string; used for config hashes in manifests.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace qp2loc
