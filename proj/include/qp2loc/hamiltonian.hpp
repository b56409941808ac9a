#pragma once

#include <array>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qp2loc/interaction.hpp"
#include "qp2loc/potential.hpp"
#include "qp2loc/region.hpp"

namespace qp2loc {

// H restricted to a finite region: nearest-neighbor hopping with entry 1 (no
// diagonal shift, so ||Delta|| <= 4) plus the diagonal
//   lambda (v(n1 w + t1) + v(n2 w + t2)) + U(n1, n2).
struct BoxHamiltonian {
  ElementaryRegion region;
  double lambda = 1.0;
  double omega = 0.0;
  std::array<double, 2> theta{0.0, 0.0};
  FourierPotential v;
  InteractionPotential U;
  double m_int = 1.0;
  std::vector<double> diagonal;  // per site, region ordering

  Eigen::Index dim() const { return static_cast<Eigen::Index>(region.size()); }
  Eigen::MatrixXd dense() const;
  Eigen::SparseMatrix<double> sparse() const;
  Eigen::MatrixXd hopping_dense() const;
  void hopping_matvec(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;

  // Same parameters with a different diagonal; used by perturbation checks.
  BoxHamiltonian with_diagonal(std::vector<double> diag) const;
};

// Fractional part of n*omega + theta, reduced in extended precision; all
// lattice phase sampling goes through this.
double phase_mod1(long n, double omega, double theta);

// Validates lambda > 0 and ||U||_inf <= m_int * lambda, then builds the matrix
// data. Phases are reduced mod 1 in extended precision before sampling v.
BoxHamiltonian assemble(const ElementaryRegion& region, double lambda, double omega,
                        std::array<double, 2> theta, const FourierPotential& v,
                        const InteractionPotential& U, double m_int = 1.0);

// Principal submatrix of H on a site subset (indices into region order are
// recomputed from coordinates). Used by covering and Poisson arguments.
Eigen::MatrixXd restrict_dense(const BoxHamiltonian& h, const std::vector<Site>& subset);

}  // namespace qp2loc
