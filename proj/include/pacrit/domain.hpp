#ifndef PACRIT_DOMAIN_HPP
#define PACRIT_DOMAIN_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "pacrit/types.hpp"

namespace pacrit {

/// Axis-aligned box in 1 or 2 dimensions.
struct DomainBox {
  int dim = 1;
  Point lower = Point::Zero();
  Point upper = Point::Ones();

  static DomainBox interval(double a, double b);
  static DomainBox rectangle(double ax, double bx, double ay, double by);
  static DomainBox square(double half_width);  // (-R,R)^2

  double extent(int axis) const { return upper[axis] - lower[axis]; }
  double min_extent() const;
  Point center() const { return 0.5 * (lower + upper); }
  bool contains(const Point& x, double shrink = 0.0) const;
  void validate() const;  // throws ValidationError on lower >= upper etc.
};

enum class NodeKind : std::uint8_t { Interior, Boundary, Excluded };

/// Tensor-product grid over a DomainBox with one midpoint quadrature point
/// per cell.  An optional disk mask restricts the active region: cells whose
/// corners do not all lie inside the disk are dropped, and zero-trace fields
/// vanish on every non-interior node.  Nodes are indexed ix + nx*iy.
class Grid {
 public:
  Grid(DomainBox box, int nx, int ny = 1);

  /// Grid with the same box/resolution whose active region is the disk
  /// |x - center| <= radius.
  Grid with_disk_mask(const Point& center, double radius) const;

  /// Grid with the closed ball |x - center| <= radius removed: every cell
  /// touching the ball becomes inactive, and the ring of nodes around it
  /// becomes boundary (Dirichlet data can be placed there).
  Grid with_hole(const Point& center, double radius) const;
  /// The hole, if one was punched.
  std::optional<std::pair<Point, double>> hole() const;

  int dim() const { return box_.dim; }
  const DomainBox& box() const { return box_; }
  int nodes_per_axis(int axis) const { return axis == 0 ? nx_ : ny_; }
  Index num_nodes() const { return static_cast<Index>(nx_) * ny_; }
  double spacing(int axis) const { return axis == 0 ? hx_ : hy_; }
  double max_spacing() const { return box_.dim == 1 ? hx_ : std::max(hx_, hy_); }
  double cell_volume() const { return box_.dim == 1 ? hx_ : hx_ * hy_; }
  int corners_per_cell() const { return box_.dim == 1 ? 2 : 4; }

  Point node(Index i) const;
  NodeKind kind(Index i) const { return kind_[static_cast<std::size_t>(i)]; }
  bool is_interior(Index i) const { return kind(i) == NodeKind::Interior; }
  bool is_boundary(Index i) const { return kind(i) == NodeKind::Boundary; }
  bool is_active(Index i) const { return kind(i) != NodeKind::Excluded; }

  /// Active cells, by raw tensor-cell index cx + (nx-1)*cy.
  const std::vector<Index>& active_cells() const { return active_cells_; }
  Index num_active_cells() const { return static_cast<Index>(active_cells_.size()); }
  Point cell_center(Index raw_cell) const;
  /// Corner node indices of a raw cell; 1D uses the first two entries.
  std::array<Index, 4> cell_corners(Index raw_cell) const;

  const std::vector<Index>& interior_nodes() const { return interior_nodes_; }
  /// Position of a node in interior_nodes(), or -1.
  Index interior_index(Index node) const {
    return interior_index_[static_cast<std::size_t>(node)];
  }
  Index num_interior() const { return static_cast<Index>(interior_nodes_.size()); }

  /// Nearest node to a point (clamped to the grid).
  Index nearest_node(const Point& x) const;
  /// Nodes within the closed ball |x - center| <= radius.
  std::vector<Index> nodes_in_ball(const Point& center, double radius) const;

  bool has_mask() const { return mask_.has_value(); }

 private:
  void rebuild();
  bool cell_active_raw(Index raw_cell) const;

  DomainBox box_;
  int nx_ = 0, ny_ = 1;
  double hx_ = 0, hy_ = 0;
  struct DiskMask {
    Point center;
    double radius;
  };
  std::optional<DiskMask> mask_;
  std::optional<DiskMask> hole_;
  std::vector<NodeKind> kind_;
  std::vector<Index> active_cells_;
  std::vector<Index> interior_nodes_;
  std::vector<Index> interior_index_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Convenience: build a grid with roughly the requested spacing.
GridPtr make_grid(const DomainBox& box, double spacing);
GridPtr make_grid(const DomainBox& box, int nx, int ny = 1);

enum class ExhaustionPolicy { MarginShrink, Concentric };

struct ExhaustionOptions {
  int count = 3;
  double spacing = 0.125;
  ExhaustionPolicy policy = ExhaustionPolicy::MarginShrink;
  double growth = 2.0;  // Concentric: half-extent ratio between members
};

/// Increasing sequence of strictly nested grids exhausting a base domain,
/// all built with the same target spacing, with an anchor point interior to
/// every member.
class Exhaustion {
 public:
  Exhaustion(DomainBox base, std::vector<GridPtr> members, Point x0);

  const DomainBox& base() const { return base_; }
  const Point& anchor() const { return x0_; }
  int count() const { return static_cast<int>(members_.size()); }
  const GridPtr& member(int k) const { return members_.at(static_cast<std::size_t>(k)); }
  const std::vector<GridPtr>& members() const { return members_; }

 private:
  void validate() const;

  DomainBox base_;
  std::vector<GridPtr> members_;
  Point x0_;
};

Exhaustion make_exhaustion(const DomainBox& domain, const ExhaustionOptions& opts);

}  // namespace pacrit

#endif
