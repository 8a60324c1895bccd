#include "pacrit/domain.hpp"

#include <algorithm>
#include <cmath>

namespace pacrit {

DomainBox DomainBox::interval(double a, double b) {
  DomainBox box;
  box.dim = 1;
  box.lower << a, 0.0;
  box.upper << b, 1.0;
  box.validate();
  return box;
}

DomainBox DomainBox::rectangle(double ax, double bx, double ay, double by) {
  DomainBox box;
  box.dim = 2;
  box.lower << ax, ay;
  box.upper << bx, by;
  box.validate();
  return box;
}

DomainBox DomainBox::square(double half_width) {
  return rectangle(-half_width, half_width, -half_width, half_width);
}

double DomainBox::min_extent() const {
  double e = extent(0);
  if (dim == 2) e = std::min(e, extent(1));
  return e;
}

bool DomainBox::contains(const Point& x, double shrink) const {
  for (int a = 0; a < dim; ++a) {
    if (x[a] <= lower[a] + shrink || x[a] >= upper[a] - shrink) return false;
  }
  return true;
}

void DomainBox::validate() const {
  if (dim != 1 && dim != 2) throw ValidationError("domain dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (!(lower[a] < upper[a])) throw ValidationError("degenerate domain: lower >= upper");
    if (!std::isfinite(lower[a]) || !std::isfinite(upper[a]))
      throw ValidationError("domain corners must be finite");
  }
}

Grid::Grid(DomainBox box, int nx, int ny) : box_(box), nx_(nx), ny_(box.dim == 1 ? 1 : ny) {
  box_.validate();
  if (nx_ < 3 || (box_.dim == 2 && ny_ < 3))
    throw ValidationError("grid needs at least 3 nodes per axis");
  hx_ = box_.extent(0) / (nx_ - 1);
  hy_ = box_.dim == 2 ? box_.extent(1) / (ny_ - 1) : 0.0;
  rebuild();
}

Grid Grid::with_disk_mask(const Point& center, double radius) const {
  if (box_.dim != 2) throw ValidationError("disk mask requires a 2D grid");
  if (radius <= 0) throw ValidationError("disk mask radius must be positive");
  Grid g = *this;
  g.mask_ = DiskMask{center, radius};
  g.rebuild();
  if (g.interior_nodes_.empty()) throw ValidationError("disk mask leaves no interior nodes");
  return g;
}

Grid Grid::with_hole(const Point& center, double radius) const {
  if (radius <= 0) throw ValidationError("hole radius must be positive");
  Grid g = *this;
  g.hole_ = DiskMask{center, radius};
  g.rebuild();
  if (g.active_cells_.size() == active_cells_.size())
    throw ValidationError("hole too small for the grid (no cell removed)");
  if (g.interior_nodes_.empty()) throw ValidationError("hole leaves no interior nodes");
  return g;
}

std::optional<std::pair<Point, double>> Grid::hole() const {
  if (!hole_) return std::nullopt;
  return std::make_pair(hole_->center, hole_->radius);
}

Point Grid::node(Index i) const {
  const Index ix = i % nx_;
  const Index iy = i / nx_;
  Point x;
  x[0] = box_.lower[0] + hx_ * static_cast<double>(ix);
  x[1] = box_.dim == 2 ? box_.lower[1] + hy_ * static_cast<double>(iy) : 0.0;
  return x;
}

Point Grid::cell_center(Index raw_cell) const {
  const Index cx = raw_cell % (nx_ - 1);
  const Index cy = box_.dim == 2 ? raw_cell / (nx_ - 1) : 0;
  Point x;
  x[0] = box_.lower[0] + hx_ * (static_cast<double>(cx) + 0.5);
  x[1] = box_.dim == 2 ? box_.lower[1] + hy_ * (static_cast<double>(cy) + 0.5) : 0.0;
  return x;
}

std::array<Index, 4> Grid::cell_corners(Index raw_cell) const {
  const Index cx = raw_cell % (nx_ - 1);
  if (box_.dim == 1) return {cx, cx + 1, -1, -1};
  const Index cy = raw_cell / (nx_ - 1);
  const Index base = cx + nx_ * cy;
  return {base, base + 1, base + nx_, base + nx_ + 1};
}

bool Grid::cell_active_raw(Index raw_cell) const {
  if (!mask_ && !hole_) return true;
  const auto corners = cell_corners(raw_cell);
  for (int c = 0; c < corners_per_cell(); ++c) {
    Point d = node(corners[c]);
    if (mask_ && (d - mask_->center).norm() > mask_->radius) return false;
    if (hole_) {
      Point e = d - hole_->center;
      if (box_.dim == 1) e[1] = 0;
      if (e.norm() <= hole_->radius) return false;
    }
  }
  return true;
}

void Grid::rebuild() {
  const Index ncells = box_.dim == 1 ? nx_ - 1 : static_cast<Index>(nx_ - 1) * (ny_ - 1);
  active_cells_.clear();
  std::vector<std::uint8_t> cell_active(static_cast<std::size_t>(ncells), 0);
  for (Index c = 0; c < ncells; ++c) {
    if (cell_active_raw(c)) {
      cell_active[static_cast<std::size_t>(c)] = 1;
      active_cells_.push_back(c);
    }
  }

  // A node is interior iff its full stencil of raw cells exists and is
  // active; it is boundary iff it touches at least one active cell.
  kind_.assign(static_cast<std::size_t>(num_nodes()), NodeKind::Excluded);
  interior_nodes_.clear();
  interior_index_.assign(static_cast<std::size_t>(num_nodes()), -1);
  for (Index i = 0; i < num_nodes(); ++i) {
    const Index ix = i % nx_;
    const Index iy = i / nx_;
    int touching = 0, active = 0, expected = 0;
    const Index cxs[2] = {ix - 1, ix};
    const Index cys[2] = {iy - 1, iy};
    const int ncy = box_.dim == 1 ? 1 : 2;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < ncy; ++b) {
        ++expected;
        const Index cx = cxs[a];
        const Index cy = box_.dim == 1 ? 0 : cys[b];
        if (cx < 0 || cx >= nx_ - 1) continue;
        if (box_.dim == 2 && (cy < 0 || cy >= ny_ - 1)) continue;
        const Index raw = box_.dim == 1 ? cx : cx + (nx_ - 1) * cy;
        ++touching;
        if (cell_active[static_cast<std::size_t>(raw)]) ++active;
      }
    }
    if (active == 0) continue;
    if (touching == expected && active == expected) {
      kind_[static_cast<std::size_t>(i)] = NodeKind::Interior;
      interior_index_[static_cast<std::size_t>(i)] = static_cast<Index>(interior_nodes_.size());
      interior_nodes_.push_back(i);
    } else {
      kind_[static_cast<std::size_t>(i)] = NodeKind::Boundary;
    }
  }
}

Index Grid::nearest_node(const Point& x) const {
  auto clampi = [](double t, Index n) {
    const Index i = static_cast<Index>(std::lround(t));
    return std::clamp<Index>(i, 0, n - 1);
  };
  const Index ix = clampi((x[0] - box_.lower[0]) / hx_, nx_);
  const Index iy = box_.dim == 2 ? clampi((x[1] - box_.lower[1]) / hy_, ny_) : 0;
  return ix + nx_ * iy;
}

std::vector<Index> Grid::nodes_in_ball(const Point& center, double radius) const {
  std::vector<Index> out;
  for (Index i = 0; i < num_nodes(); ++i) {
    if (!is_active(i)) continue;
    Point d = node(i) - center;
    if (box_.dim == 1) d[1] = 0;
    if (d.norm() <= radius) out.push_back(i);
  }
  return out;
}

GridPtr make_grid(const DomainBox& box, double spacing) {
  if (spacing <= 0) throw ValidationError("grid spacing must be positive");
  auto nodes = [&](int axis) {
    const int n = static_cast<int>(std::lround(box.extent(axis) / spacing)) + 1;
    if (n < 3)
      throw ValidationError("grid spacing too coarse for domain extent");
    return n;
  };
  const int nx = nodes(0);
  const int ny = box.dim == 2 ? nodes(1) : 1;
  return std::make_shared<Grid>(box, nx, ny);
}

GridPtr make_grid(const DomainBox& box, int nx, int ny) {
  return std::make_shared<Grid>(box, nx, ny);
}

Exhaustion::Exhaustion(DomainBox base, std::vector<GridPtr> members, Point x0)
    : base_(base), members_(std::move(members)), x0_(x0) {
  validate();
}

void Exhaustion::validate() const {
  base_.validate();
  if (members_.size() < 2) throw ValidationError("exhaustion needs at least 2 members");
  for (std::size_t k = 0; k + 1 < members_.size(); ++k) {
    const DomainBox& inner = members_[k]->box();
    const DomainBox& outer = members_[k + 1]->box();
    for (int a = 0; a < base_.dim; ++a) {
      if (!(outer.lower[a] < inner.lower[a] && inner.upper[a] < outer.upper[a]))
        throw ValidationError("exhaustion nesting violated by policy");
    }
  }
  const DomainBox& last = members_.back()->box();
  for (int a = 0; a < base_.dim; ++a) {
    const double tol = 1e-9 * base_.extent(a);
    if (std::abs(last.lower[a] - base_.lower[a]) > tol ||
        std::abs(last.upper[a] - base_.upper[a]) > tol)
      throw ValidationError("exhaustion members do not fill the base domain");
  }
  for (const auto& g : members_) {
    if (!g->box().contains(x0_)) throw ValidationError("anchor point not interior to a member");
  }
}

Exhaustion make_exhaustion(const DomainBox& domain, const ExhaustionOptions& opts) {
  domain.validate();
  if (opts.count < 2) throw ValidationError("exhaustion count must be >= 2");

  std::vector<GridPtr> members;
  members.reserve(static_cast<std::size_t>(opts.count));
  if (opts.policy == ExhaustionPolicy::MarginShrink) {
    // Margins extent/4, extent/8, ..., 0: the last member is the base box.
    for (int k = 1; k <= opts.count; ++k) {
      DomainBox b = domain;
      if (k < opts.count) {
        const double scale = std::pow(0.5, k + 1);
        for (int a = 0; a < domain.dim; ++a) {
          const double m = domain.extent(a) * scale;
          b.lower[a] += m;
          b.upper[a] -= m;
        }
      }
      members.push_back(make_grid(b, opts.spacing));
    }
  } else {
    if (opts.growth <= 1.0)
      throw ValidationError("exhaustion nesting violated by policy (growth <= 1)");
    const Point c = domain.center();
    for (int k = 1; k <= opts.count; ++k) {
      DomainBox b = domain;
      const double scale = std::pow(opts.growth, k - opts.count);
      for (int a = 0; a < domain.dim; ++a) {
        const double half = 0.5 * domain.extent(a) * scale;
        b.lower[a] = c[a] - half;
        b.upper[a] = c[a] + half;
      }
      members.push_back(make_grid(b, opts.spacing));
    }
  }
  return Exhaustion(domain, std::move(members), domain.center());
}

}  // namespace pacrit
