#ifndef PACRIT_FIELD_HPP
#define PACRIT_FIELD_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "pacrit/domain.hpp"
#include "pacrit/expr.hpp"
#include "pacrit/types.hpp"

namespace pacrit {

/// Scalar function represented by its values at grid nodes, interpreted as a
/// multilinear element on each cell.
class NodalField {
 public:
  explicit NodalField(GridPtr grid);
  NodalField(GridPtr grid, Vector values);

  static NodalField zeros(GridPtr grid) { return NodalField(std::move(grid)); }
  static NodalField from_function(GridPtr grid, const std::function<double(const Point&)>& f);
  static NodalField from_expr(GridPtr grid, const CoefficientField& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Vector& values() { return values_; }
  const Vector& values() const { return values_; }
  double operator[](Index i) const { return values_[i]; }
  double& operator[](Index i) { return values_[i]; }
  Index size() const { return values_.size(); }

  /// Multilinear interpolation at an arbitrary point (clamped to the box).
  double sample(const Point& x) const;

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

  /// Zero the values on every non-interior node.
  void enforce_zero_trace();
  /// Largest |value| over non-interior nodes.
  double boundary_trace_norm() const;

 private:
  GridPtr grid_;
  Vector values_;
};

/// First-order multilinear-element gradient at each active cell center.
/// Rows follow grid.active_cells(); columns are the spatial axes.
Matrix gradient(const NodalField& u);

/// Field values interpolated at active cell centers (corner averages).
Vector cell_values(const NodalField& u);

/// Sum of value * cell volume over active cells, in fixed deterministic order.
double integrate(const Vector& cell_vals, const Grid& grid);

/// Evaluate a coefficient field at every active cell center.
Vector cells_from_expr(const Grid& grid, const CoefficientField& f);

/// Matrix coefficient at every active cell center (symmetrized).
std::vector<Matrix2> matrix_cells_from_expr(const Grid& grid, const CoefficientField& A);

/// Write node coordinates and one column per field as CSV.
void write_csv(std::ostream& os, const Grid& grid,
               const std::vector<std::pair<std::string, const NodalField*>>& columns);

}  // namespace pacrit

#endif
