#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pacrit/domain.hpp"

using namespace pacrit;

TEST_CASE("domain box validation") {
  CHECK_THROWS_AS(DomainBox::interval(1, 0), ValidationError);
  CHECK_THROWS_AS(DomainBox::interval(0, 0), ValidationError);
  DomainBox b;
  b.dim = 3;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  const DomainBox box = DomainBox::rectangle(-1, 2, 0, 1);
  CHECK(box.extent(0) == doctest::Approx(3));
  CHECK(box.extent(1) == doctest::Approx(1));
  CHECK(box.min_extent() == doctest::Approx(1));
  CHECK(box.contains(Point(0.5, 0.5)));
  CHECK(!box.contains(Point(0.5, 1.0)));  // boundary points are not interior
}

TEST_CASE("grid boundary mask is exactly the box boundary") {
  const Grid g(DomainBox::rectangle(0, 1, 0, 2), 5, 7);
  CHECK(g.num_nodes() == 35);
  CHECK(g.num_active_cells() == 24);
  for (Index i = 0; i < g.num_nodes(); ++i) {
    const Index ix = i % 5, iy = i / 5;
    const bool on_edge = ix == 0 || ix == 4 || iy == 0 || iy == 6;
    CHECK(g.is_boundary(i) == on_edge);
    CHECK(g.is_interior(i) == !on_edge);
  }
  CHECK(g.cell_volume() == doctest::Approx(0.25 * (2.0 / 6)));
  CHECK_THROWS_AS(Grid(DomainBox::interval(0, 1), 2), ValidationError);
}

TEST_CASE("cell centers are corner averages") {
  const Grid g(DomainBox::rectangle(0, 1, 0, 1), 4, 4);
  for (const Index raw : g.active_cells()) {
    const auto corners = g.cell_corners(raw);
    Point mean = Point::Zero();
    for (int c = 0; c < g.corners_per_cell(); ++c) mean += g.node(corners[c]);
    mean /= g.corners_per_cell();
    CHECK((mean - g.cell_center(raw)).norm() < 1e-14);
  }
}

TEST_CASE("disk mask classifies rim nodes as boundary") {
  const Grid base(DomainBox::square(1.0), 33, 33);
  const Grid disk = base.with_disk_mask(Point::Zero(), 1.0);
  CHECK(disk.num_active_cells() < base.num_active_cells());
  long interior = 0;
  for (Index i = 0; i < disk.num_nodes(); ++i) {
    const double r = disk.node(i).norm();
    if (disk.is_interior(i)) {
      ++interior;
      CHECK(r < 1.0);
    }
    if (disk.kind(i) == NodeKind::Excluded) CHECK(r > 0.9);
  }
  CHECK(interior > 500);
  CHECK_THROWS_AS(base.with_disk_mask(Point::Zero(), 1e-3), ValidationError);
}

TEST_CASE("hole removes the ball and exposes a data ring") {
  const Grid base(DomainBox::square(1.0), 33, 33);
  const Grid holed = base.with_hole(Point::Zero(), 0.25);
  CHECK(holed.num_active_cells() < base.num_active_cells());
  bool has_rim = false;
  for (Index i = 0; i < holed.num_nodes(); ++i) {
    const double r = holed.node(i).norm();
    if (r <= 0.25) CHECK(!holed.is_interior(i));
    if (holed.is_boundary(i) && r < 0.4) has_rim = true;
  }
  CHECK(has_rim);
  CHECK(holed.hole().has_value());
  CHECK_THROWS_AS(base.with_hole(Point(0.031, 0.027), 1e-4), ValidationError);
}

TEST_CASE("margin exhaustion of the unit interval") {
  const Exhaustion ex =
      make_exhaustion(DomainBox::interval(0, 1), {.count = 3, .spacing = 1.0 / 64});
  REQUIRE(ex.count() == 3);
  CHECK(ex.member(0)->box().lower[0] == doctest::Approx(0.25));
  CHECK(ex.member(0)->box().upper[0] == doctest::Approx(0.75));
  CHECK(ex.member(1)->box().lower[0] == doctest::Approx(0.125));
  CHECK(ex.member(1)->box().upper[0] == doctest::Approx(0.875));
  CHECK(ex.member(2)->box().lower[0] == doctest::Approx(0.0));
  CHECK(ex.member(2)->box().upper[0] == doctest::Approx(1.0));
  CHECK(ex.anchor()[0] == doctest::Approx(0.5));
}

TEST_CASE("concentric exhaustion doubles the half-width") {
  const Exhaustion ex = make_exhaustion(
      DomainBox::square(8.0),
      {.count = 4, .spacing = 0.25, .policy = ExhaustionPolicy::Concentric});
  REQUIRE(ex.count() == 4);
  for (int k = 0; k < 4; ++k) {
    const double half = std::pow(2.0, k) * 1.0;
    CHECK(ex.member(k)->box().upper[0] == doctest::Approx(half));
    CHECK(ex.member(k)->box().lower[1] == doctest::Approx(-half));
  }
}

TEST_CASE("exhaustion nesting property: member nodes interior to the next box") {
  for (const auto policy : {ExhaustionPolicy::MarginShrink, ExhaustionPolicy::Concentric}) {
    const Exhaustion ex = make_exhaustion(DomainBox::rectangle(-2, 2, -1, 1),
                                          {.count = 3, .spacing = 0.125, .policy = policy});
    for (int k = 0; k + 1 < ex.count(); ++k) {
      const Grid& inner = *ex.member(k);
      const DomainBox& outer = ex.member(k + 1)->box();
      for (Index i = 0; i < inner.num_nodes(); ++i) CHECK(outer.contains(inner.node(i)));
      CHECK(ex.member(k)->box().contains(ex.anchor()));
    }
  }
}

TEST_CASE("exhaustion error paths") {
  CHECK_THROWS_AS(make_exhaustion(DomainBox::interval(0, 1), {.count = 1, .spacing = 0.01}),
                  ValidationError);
  CHECK_THROWS_WITH_AS(
      make_exhaustion(DomainBox::interval(0, 1),
                      {.count = 3,
                       .spacing = 0.01,
                       .policy = ExhaustionPolicy::Concentric,
                       .growth = 0.5}),
      doctest::Contains("nesting violated"), ValidationError);
  // Spacing too coarse for the smallest member.
  CHECK_THROWS_AS(make_exhaustion(DomainBox::interval(0, 1), {.count = 3, .spacing = 0.4}),
                  ValidationError);
}

TEST_CASE("nodes_in_ball and nearest_node") {
  const auto g = make_grid(DomainBox::square(1.0), 21, 21);
  const auto K = g->nodes_in_ball(Point::Zero(), 0.35);
  CHECK(!K.empty());
  for (const Index i : K) CHECK(g->node(i).norm() <= 0.35 + 1e-12);
  const Index n = g->nearest_node(Point(0.021, -0.49));
  CHECK((g->node(n) - Point(0.0, -0.5)).norm() < 1e-12);
}
