#ifndef PACRIT_PRECOND_HPP
#define PACRIT_PRECOND_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "pacrit/domain.hpp"
#include "pacrit/types.hpp"

namespace pacrit {

/// Factorized stiffness operator on the free nodes of a grid (one-point
/// quadrature, zero trace).  By default this is the p=2, A=I, V=0 stiffness,
/// the fixed descent metric shared per grid.  The free set is the interior,
/// optionally minus a pinned node set (used by obstacle solves).  Passing
/// per-cell matrices and weights builds the linearized-coefficient operator
/// sum_cells w_c <A_c grad phi_i, grad phi_j>; the degenerate p != 2 solvers
/// refactorize with it when the fixed metric stalls.
class StiffnessSolver {
 public:
  explicit StiffnessSolver(const Grid& grid, const std::vector<Index>* pinned = nullptr,
                           const std::vector<Matrix2>* A_cells = nullptr,
                           const Vector* cell_weights = nullptr);

  Index size() const { return static_cast<Index>(dofs_.size()); }
  const std::vector<Index>& dofs() const { return dofs_; }
  /// P^{-1} r for a dof-sized residual vector.
  Vector solve(const Vector& r) const;
  /// Dual norm sqrt(r . P^{-1} r).
  double dual_norm(const Vector& r) const;

 private:
  std::vector<Index> dofs_;  // node indices of the free set
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace pacrit

#endif
