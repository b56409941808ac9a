#include "qp2loc/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

#include "qp2loc/numerics.hpp"

namespace qp2loc {

double phase_mod1(long n, double omega, double theta) {
  const long double x = static_cast<long double>(n) * static_cast<long double>(omega) +
                        static_cast<long double>(theta);
  long double f = x - std::floor(x);
  if (f >= 1.0L) f -= 1.0L;
  if (f < 0.0L) f += 1.0L;
  return static_cast<double>(f);
}

BoxHamiltonian assemble(const ElementaryRegion& region, double lambda, double omega,
                        std::array<double, 2> theta, const FourierPotential& v,
                        const InteractionPotential& U, double m_int) {
  if (!(lambda > 0.0)) throw std::invalid_argument("assemble: lambda must be positive");
  const double umax = U.max_abs();
  if (umax > m_int * lambda)
    throw std::invalid_argument("assemble: ||U||_inf = " + std::to_string(umax) +
                                " exceeds m_int * lambda = " + std::to_string(m_int * lambda));

  BoxHamiltonian h;
  h.region = region;
  h.lambda = lambda;
  h.omega = omega;
  h.theta = theta;
  h.v = v;
  h.U = U;
  h.m_int = m_int;
  h.diagonal.resize(region.size());
  for (std::size_t i = 0; i < region.size(); ++i) {
    const Site& s = region.sites()[i];
    h.diagonal[i] =
        lambda * (v.eval(phase_mod1(s[0], omega, theta[0])) + v.eval(phase_mod1(s[1], omega, theta[1]))) +
        U.eval(s[0], s[1]);
  }
  return h;
}

Eigen::MatrixXd BoxHamiltonian::dense() const {
  const Eigen::Index n = dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diagonal[static_cast<std::size_t>(i)];
  for (const auto& [i, j] : region.neighbor_pairs()) {
    m(i, j) = 1.0;
    m(j, i) = 1.0;
  }
  return m;
}

Eigen::SparseMatrix<double> BoxHamiltonian::sparse() const {
  const Eigen::Index n = dim();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(region.size() + 2 * region.neighbor_pairs().size());
  for (Eigen::Index i = 0; i < n; ++i)
    trip.emplace_back(i, i, diagonal[static_cast<std::size_t>(i)]);
  for (const auto& [i, j] : region.neighbor_pairs()) {
    trip.emplace_back(i, j, 1.0);
    trip.emplace_back(j, i, 1.0);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::MatrixXd BoxHamiltonian::hopping_dense() const {
  const Eigen::Index n = dim();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : region.neighbor_pairs()) {
    m(i, j) = 1.0;
    m(j, i) = 1.0;
  }
  return m;
}

void BoxHamiltonian::hopping_matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  y.setZero(x.size());
  for (const auto& [i, j] : region.neighbor_pairs()) {
    y[i] += x[j];
    y[j] += x[i];
  }
}

BoxHamiltonian BoxHamiltonian::with_diagonal(std::vector<double> diag) const {
  if (diag.size() != diagonal.size())
    throw std::invalid_argument("with_diagonal: size mismatch");
  BoxHamiltonian h = *this;
  h.diagonal = std::move(diag);
  return h;
}

Eigen::MatrixXd restrict_dense(const BoxHamiltonian& h, const std::vector<Site>& subset) {
  const Eigen::Index n = static_cast<Eigen::Index>(subset.size());
  std::vector<int> idx(subset.size());
  for (std::size_t i = 0; i < subset.size(); ++i) {
    idx[i] = h.region.index_of(subset[i][0], subset[i][1]);
    if (idx[i] < 0) throw std::invalid_argument("restrict_dense: subset site outside region");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = h.diagonal[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (dist_l1(subset[static_cast<std::size_t>(i)], subset[static_cast<std::size_t>(j)]) == 1) {
        m(i, j) = 1.0;
        m(j, i) = 1.0;
      }
  }
  return m;
}

}  // namespace qp2loc
