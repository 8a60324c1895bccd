#ifndef PACRIT_SRC_INTERNAL_HPP
#define PACRIT_SRC_INTERNAL_HPP

// Shared assembly kernels for the descent solvers.  Everything here works on
// raw node-value vectors; the public API wraps them in NodalField terms.

#include "pacrit/problem.hpp"

namespace pacrit::internal {

// Multilinear basis data at the cell midpoint.
struct CellBasis {
  double gx[4] = {0, 0, 0, 0};
  double gy[4] = {0, 0, 0, 0};
  double wval = 0;  // corner weight of the center interpolation
  int nc = 2;

  explicit CellBasis(const Grid& g);
};

// Regularized energy and its exact gradient:
//   E(u) = sum_cells [ (|grad u|_A^2 + eps^2)^{p/2} + V |u_c|^p - p f_c u_c ] vol.
struct Assembled {
  double energy = 0;
  Vector grad;
};
Assembled assemble(const ProblemSpec& spec, const Vector& u, const Vector* f_cells);

// m(u) = int w |u_c|^q and gradient; w defaults to 1 and q to p.
struct MassResult {
  double mass = 0;
  Vector grad;
};
MassResult mass_and_grad(const ProblemSpec& spec, const Vector& u);
MassResult weighted_mass_and_grad(const ProblemSpec& spec, const Vector& u, double exponent,
                                  const Vector* weight_cells);

Vector restrict_interior(const Grid& g, const Vector& full);
void scatter_interior(const Grid& g, const Vector& interior, Vector& full);
Vector restrict_to(const std::vector<Index>& dofs, const Vector& full);
void scatter_to(const std::vector<Index>& dofs, const Vector& reduced, Vector& full);

// Per-cell linearized diffusivity (|grad u|_A^2 + eps^2)^{(p-2)/2}, the
// weight of the lagged-coefficient stiffness used to rescue stalled p != 2
// descents.
Vector linearized_weights(const ProblemSpec& spec, const Vector& u);

// Sample a field defined on another (nested or overlapping) grid onto the
// interior nodes of dst; outside its box the value is 0.
NodalField sample_onto(const NodalField& src, const GridPtr& dst);

// Smooth random zero-trace field: preconditioner-smoothed white noise,
// normalized to unit sup norm.
NodalField random_smooth_field(const ProblemSpec& spec, std::uint64_t seed);

}  // namespace pacrit::internal

#endif
