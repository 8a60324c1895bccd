#include "pacrit/field.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace pacrit {

NodalField::NodalField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw ValidationError("null grid");
  values_ = Vector::Zero(grid_->num_nodes());
}

NodalField::NodalField(GridPtr grid, Vector values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ValidationError("null grid");
  if (values_.size() != grid_->num_nodes())
    throw ValidationError("field size does not match grid");
}

NodalField NodalField::from_function(GridPtr grid, const std::function<double(const Point&)>& f) {
  NodalField u(std::move(grid));
  for (Index i = 0; i < u.size(); ++i) u[i] = f(u.grid().node(i));
  return u;
}

NodalField NodalField::from_expr(GridPtr grid, const CoefficientField& f) {
  const int dim = grid->dim();
  return from_function(std::move(grid),
                       [&](const Point& x) { return f.eval_scalar(x, dim); });
}

double NodalField::sample(const Point& x) const {
  const Grid& g = *grid_;
  const int nx = g.nodes_per_axis(0);
  auto locate = [](double t, int n) {
    Index c = static_cast<Index>(std::floor(t));
    c = std::clamp<Index>(c, 0, n - 2);
    return c;
  };
  const double tx = (x[0] - g.box().lower[0]) / g.spacing(0);
  const Index cx = locate(tx, nx);
  const double fx = std::clamp(tx - static_cast<double>(cx), 0.0, 1.0);
  if (g.dim() == 1) {
    return (1 - fx) * values_[cx] + fx * values_[cx + 1];
  }
  const int ny = g.nodes_per_axis(1);
  const double ty = (x[1] - g.box().lower[1]) / g.spacing(1);
  const Index cy = locate(ty, ny);
  const double fy = std::clamp(ty - static_cast<double>(cy), 0.0, 1.0);
  const Index base = cx + nx * cy;
  return (1 - fx) * (1 - fy) * values_[base] + fx * (1 - fy) * values_[base + 1] +
         (1 - fx) * fy * values_[base + nx] + fx * fy * values_[base + nx + 1];
}

void NodalField::enforce_zero_trace() {
  for (Index i = 0; i < size(); ++i) {
    if (!grid_->is_interior(i)) values_[i] = 0.0;
  }
}

double NodalField::boundary_trace_norm() const {
  double m = 0;
  for (Index i = 0; i < size(); ++i) {
    if (!grid_->is_interior(i)) m = std::max(m, std::abs(values_[i]));
  }
  return m;
}

Matrix gradient(const NodalField& u) {
  const Grid& g = u.grid();
  const auto& cells = g.active_cells();
  Matrix out(static_cast<Index>(cells.size()), g.dim());
  const double hx = g.spacing(0);
  if (g.dim() == 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto c = g.cell_corners(cells[k]);
      out(static_cast<Index>(k), 0) = (u[c[1]] - u[c[0]]) / hx;
    }
  } else {
    const double hy = g.spacing(1);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto c = g.cell_corners(cells[k]);
      const double u00 = u[c[0]], u10 = u[c[1]], u01 = u[c[2]], u11 = u[c[3]];
      out(static_cast<Index>(k), 0) = ((u10 + u11) - (u00 + u01)) / (2 * hx);
      out(static_cast<Index>(k), 1) = ((u01 + u11) - (u00 + u10)) / (2 * hy);
    }
  }
  return out;
}

Vector cell_values(const NodalField& u) {
  const Grid& g = u.grid();
  const auto& cells = g.active_cells();
  Vector out(static_cast<Index>(cells.size()));
  if (g.dim() == 1) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto c = g.cell_corners(cells[k]);
      out[static_cast<Index>(k)] = 0.5 * (u[c[0]] + u[c[1]]);
    }
  } else {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto c = g.cell_corners(cells[k]);
      out[static_cast<Index>(k)] = 0.25 * (u[c[0]] + u[c[1]] + u[c[2]] + u[c[3]]);
    }
  }
  return out;
}

double integrate(const Vector& cell_vals, const Grid& grid) {
  if (cell_vals.size() != grid.num_active_cells())
    throw ValidationError("cell value vector does not match grid");
  const double vol = grid.cell_volume();
  double sum = 0;
  for (Index k = 0; k < cell_vals.size(); ++k) sum += cell_vals[k];
  return sum * vol;
}

Vector cells_from_expr(const Grid& grid, const CoefficientField& f) {
  const auto& cells = grid.active_cells();
  Vector out(static_cast<Index>(cells.size()));
  for (std::size_t k = 0; k < cells.size(); ++k)
    out[static_cast<Index>(k)] = f.eval_scalar(grid.cell_center(cells[k]), grid.dim());
  return out;
}

std::vector<Matrix2> matrix_cells_from_expr(const Grid& grid, const CoefficientField& A) {
  const auto& cells = grid.active_cells();
  std::vector<Matrix2> out(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k)
    out[k] = A.eval_matrix(grid.cell_center(cells[k]), grid.dim());
  return out;
}

void write_csv(std::ostream& os, const Grid& grid,
               const std::vector<std::pair<std::string, const NodalField*>>& columns) {
  os << "x";
  if (grid.dim() == 2) os << ",y";
  for (const auto& [name, field] : columns) os << "," << name;
  os << "\n";
  os.precision(17);
  for (Index i = 0; i < grid.num_nodes(); ++i) {
    if (!grid.is_active(i)) continue;
    const Point x = grid.node(i);
    os << x[0];
    if (grid.dim() == 2) os << "," << x[1];
    for (const auto& [name, field] : columns) os << "," << (*field)[i];
    os << "\n";
  }
}

}  // namespace pacrit
