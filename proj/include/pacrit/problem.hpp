#ifndef PACRIT_PROBLEM_HPP
#define PACRIT_PROBLEM_HPP

#include <memory>
#include <optional>
#include <vector>

#include "pacrit/domain.hpp"
#include "pacrit/expr.hpp"
#include "pacrit/field.hpp"
#include "pacrit/precond.hpp"
#include "pacrit/types.hpp"

namespace pacrit {

/// Gradient regularization: every |.|_A^{p-2} factor is evaluated as
/// (|.|_A^2 + epsilon^2)^{(p-2)/2}, removing the degenerate/singular point of
/// the p-Laplacian at vanishing gradients.  Plain p-th powers stay exact.
struct Regularization {
  double epsilon = 0;

  static Regularization default_for(double p) {
    return Regularization{p >= 2 ? 1e-10 : 1e-6};
  }
  void validate(double p) const {
    if (epsilon < 0) throw ValidationError("regularization epsilon must be >= 0");
    if (epsilon == 0 && p < 2)
      throw ValidationError("epsilon = 0 is only allowed for p >= 2");
  }
};

/// One (p, A, V) problem bound to a grid, with coefficient values cached at
/// the quadrature points and the grid's stiffness preconditioner shared
/// between all specs derived from it.
class ProblemSpec {
 public:
  ProblemSpec(double p, GridPtr grid, CoefficientField A, CoefficientField V,
              std::optional<Regularization> reg = std::nullopt);

  double p() const { return p_; }
  double epsilon() const { return reg_.epsilon; }
  const Regularization& regularization() const { return reg_; }
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<Matrix2>& A_cells() const { return shared_->A_cells; }
  const Vector& V_cells() const { return V_cells_; }
  const SpdBounds& spd() const { return shared_->spd; }
  const CoefficientField& A_field() const { return shared_->A; }
  const std::optional<CoefficientField>& V_field() const { return V_field_; }

  /// Same grid and A, different potential values at the quadrature points.
  /// Used by perturbation scans and eigenvalue bisections.
  ProblemSpec with_potential_cells(Vector V_cells) const;
  /// Potential V + tau * V0 sampled at the quadrature points.
  ProblemSpec with_shifted_potential(const Vector& V0_cells, double tau) const;

  /// Shared p=2, A=I, V=0 stiffness factorization for this grid.
  const StiffnessSolver& stiffness() const;

 private:
  struct SharedCache {
    CoefficientField A;
    std::vector<Matrix2> A_cells;
    SpdBounds spd;
    std::shared_ptr<const StiffnessSolver> stiffness;  // built on first use
  };

  double p_;
  GridPtr grid_;
  Regularization reg_;
  std::shared_ptr<SharedCache> shared_;
  std::optional<CoefficientField> V_field_;
  Vector V_cells_;
};

/// A (p, A, V) problem instantiated over every member of an exhaustion.
struct ProblemFamily {
  double p = 2;
  CoefficientField A;
  CoefficientField V;
  std::optional<Regularization> reg;
  Exhaustion exhaustion;

  ProblemFamily(double p_, CoefficientField A_, CoefficientField V_, Exhaustion ex,
                std::optional<Regularization> reg_ = std::nullopt)
      : p(p_), A(std::move(A_)), V(std::move(V_)), reg(reg_), exhaustion(std::move(ex)) {}

  int count() const { return exhaustion.count(); }
  ProblemSpec member(int k) const {
    return ProblemSpec(p, exhaustion.member(k), A, V, reg);
  }
};

}  // namespace pacrit

#endif
