#include "pacrit/precond.hpp"

#include <algorithm>
#include <vector>

namespace pacrit {

StiffnessSolver::StiffnessSolver(const Grid& grid, const std::vector<Index>* pinned,
                                 const std::vector<Matrix2>* A_cells,
                                 const Vector* cell_weights) {
  std::vector<Index> dof_of_node(static_cast<std::size_t>(grid.num_nodes()), -1);
  if (pinned && !pinned->empty()) {
    std::vector<char> is_pinned(static_cast<std::size_t>(grid.num_nodes()), 0);
    for (const Index i : *pinned) is_pinned[static_cast<std::size_t>(i)] = 1;
    for (const Index i : grid.interior_nodes()) {
      if (is_pinned[static_cast<std::size_t>(i)]) continue;
      dof_of_node[static_cast<std::size_t>(i)] = static_cast<Index>(dofs_.size());
      dofs_.push_back(i);
    }
  } else {
    dofs_ = grid.interior_nodes();
    for (std::size_t d = 0; d < dofs_.size(); ++d)
      dof_of_node[static_cast<std::size_t>(dofs_[d])] = static_cast<Index>(d);
  }
  const Index n = static_cast<Index>(dofs_.size());

  const int nc = grid.corners_per_cell();
  const double vol = grid.cell_volume();
  // Basis gradients of the multilinear element at the cell center.
  double gx[4], gy[4];
  if (grid.dim() == 1) {
    const double h = grid.spacing(0);
    gx[0] = -1 / h;
    gx[1] = 1 / h;
    gy[0] = gy[1] = 0;
  } else {
    const double ax = 1 / (2 * grid.spacing(0));
    const double ay = 1 / (2 * grid.spacing(1));
    const double sx[4] = {-1, 1, -1, 1};
    const double sy[4] = {-1, -1, 1, 1};
    for (int c = 0; c < 4; ++c) {
      gx[c] = sx[c] * ax;
      gy[c] = sy[c] * ay;
    }
  }

  const bool dim2 = grid.dim() == 2;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(grid.active_cells().size() * static_cast<std::size_t>(nc * nc));
  const auto& cells = grid.active_cells();
  for (std::size_t kc = 0; kc < cells.size(); ++kc) {
    const auto corners = grid.cell_corners(cells[kc]);
    const double w = cell_weights ? (*cell_weights)[static_cast<Index>(kc)] : 1.0;
    Matrix2 A = Matrix2::Identity();
    if (A_cells) A = (*A_cells)[kc];
    Index dof[4];
    for (int c = 0; c < nc; ++c) dof[c] = dof_of_node[static_cast<std::size_t>(corners[c])];
    for (int a = 0; a < nc; ++a) {
      if (dof[a] < 0) continue;
      for (int b = 0; b < nc; ++b) {
        if (dof[b] < 0) continue;
        double k;
        if (dim2) {
          k = gx[a] * (A(0, 0) * gx[b] + A(0, 1) * gy[b]) +
              gy[a] * (A(1, 0) * gx[b] + A(1, 1) * gy[b]);
        } else {
          k = A(0, 0) * gx[a] * gx[b];
        }
        k *= w * vol;
        if (k != 0) trips.emplace_back(dof[a], dof[b], k);
      }
    }
  }

  Eigen::SparseMatrix<double> P(n, n);
  P.setFromTriplets(trips.begin(), trips.end());
  // The one-point-quadrature stencil decouples the two checkerboard
  // sublattices in 2D; a small mass shift keeps the factorization strictly
  // positive definite on any masked geometry.
  double max_diag = 0;
  for (Index i = 0; i < n; ++i) max_diag = std::max(max_diag, P.coeff(i, i));
  const double shift = 1e-12 * (vol + max_diag);
  for (Index i = 0; i < n; ++i) P.coeffRef(i, i) += shift;
  ldlt_.compute(P);
  if (ldlt_.info() != Eigen::Success)
    throw AnalysisError("stiffness preconditioner factorization failed");
}

Vector StiffnessSolver::solve(const Vector& r) const {
  return ldlt_.solve(r);
}

double StiffnessSolver::dual_norm(const Vector& r) const {
  if (r.size() == 0) return 0;
  return std::sqrt(std::max(0.0, r.dot(ldlt_.solve(r))));
}

}  // namespace pacrit
