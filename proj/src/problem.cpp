#include "pacrit/problem.hpp"

#include <cmath>

namespace pacrit {

ProblemSpec::ProblemSpec(double p, GridPtr grid, CoefficientField A, CoefficientField V,
                         std::optional<Regularization> reg)
    : p_(p), grid_(std::move(grid)) {
  if (!(p_ > 1)) throw ValidationError("exponent p must be > 1");
  if (!grid_) throw ValidationError("null grid");
  reg_ = reg.value_or(Regularization::default_for(p_));
  reg_.validate(p_);
  if (A.kind() != FieldKind::SpdMatrix)
    throw ValidationError("coefficient A must be a matrix field");
  if (V.kind() != FieldKind::Scalar)
    throw ValidationError("potential V must be a scalar field");

  shared_ = std::make_shared<SharedCache>();
  shared_->A = A;
  shared_->spd = A.spd_bounds(*grid_);  // throws on SPD violation
  shared_->A_cells = matrix_cells_from_expr(*grid_, A);

  V.check_finite(*grid_);
  V_field_ = std::move(V);
  V_cells_ = cells_from_expr(*grid_, *V_field_);
}

ProblemSpec ProblemSpec::with_potential_cells(Vector V_cells) const {
  if (V_cells.size() != grid_->num_active_cells())
    throw ValidationError("potential cell vector does not match grid");
  if (!V_cells.allFinite()) throw ValidationError("potential values must be finite");
  ProblemSpec out = *this;
  out.V_field_.reset();
  out.V_cells_ = std::move(V_cells);
  return out;
}

ProblemSpec ProblemSpec::with_shifted_potential(const Vector& V0_cells, double tau) const {
  return with_potential_cells(V_cells_ + tau * V0_cells);
}

const StiffnessSolver& ProblemSpec::stiffness() const {
  if (!shared_->stiffness)
    shared_->stiffness = std::make_shared<StiffnessSolver>(*grid_);
  return *shared_->stiffness;
}

}  // namespace pacrit
