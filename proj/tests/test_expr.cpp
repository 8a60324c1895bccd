#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pacrit/expr.hpp"
#include "pacrit/field.hpp"

using namespace pacrit;

namespace {
double at(const CoefficientField& f, double x, double y = 0, int dim = 2) {
  return f.eval_scalar(Point(x, y), dim);
}
}  // namespace

TEST_CASE("constants and polynomials") {
  CHECK(at(parse_field_expr("1", FieldKind::Scalar), 0.3) == doctest::Approx(1));
  CHECK(at(parse_field_expr("x*(1-x)", FieldKind::Scalar), 0.5) == doctest::Approx(0.25));
  CHECK(at(parse_field_expr("2+3*4^2", FieldKind::Scalar), 0) == doctest::Approx(50));
  CHECK(at(parse_field_expr("2^3^2", FieldKind::Scalar), 0) == doctest::Approx(512));
  CHECK(at(parse_field_expr("-x^2", FieldKind::Scalar), 2) == doctest::Approx(-4));
  CHECK(at(parse_field_expr("(2+3)*4", FieldKind::Scalar), 0) == doctest::Approx(20));
  CHECK(at(parse_field_expr("6/3/2", FieldKind::Scalar), 0) == doctest::Approx(1));
}

TEST_CASE("variables and functions") {
  CHECK(at(parse_field_expr("r^2", FieldKind::Scalar), 3, 4) == doctest::Approx(25));
  CHECK(at(parse_field_expr("r", FieldKind::Scalar), -2, 0, 1) == doctest::Approx(2));
  CHECK(at(parse_field_expr("exp(0)", FieldKind::Scalar), 0) == doctest::Approx(1));
  CHECK(at(parse_field_expr("log(exp(2))", FieldKind::Scalar), 0) == doctest::Approx(2));
  CHECK(at(parse_field_expr("abs(-3)", FieldKind::Scalar), 0) == doctest::Approx(3));
  CHECK(at(parse_field_expr("min(x, y)", FieldKind::Scalar), 2, -1) == doctest::Approx(-1));
  CHECK(at(parse_field_expr("max(x, 0) * 2", FieldKind::Scalar), -5) == doctest::Approx(0));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_field_expr("x +", FieldKind::Scalar), ParseError);
  CHECK_THROWS_AS(parse_field_expr("(x", FieldKind::Scalar), ParseError);
  CHECK_THROWS_AS(parse_field_expr("sin(x)", FieldKind::Scalar), ParseError);
  CHECK_THROWS_AS(parse_field_expr("x 1", FieldKind::Scalar), ParseError);
  CHECK_THROWS_AS(parse_field_expr("min(x)", FieldKind::Scalar), ParseError);
  try {
    parse_field_expr("1 + sin(x)", FieldKind::Scalar);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position == 4);
    CHECK(std::string(e.what()).find("sin") != std::string::npos);
  }
}

TEST_CASE("matrix fields: shape errors and symmetrization") {
  CHECK_THROWS_AS(parse_field_expr("[[1,2],[3]]", FieldKind::SpdMatrix), ParseError);
  CHECK_THROWS_AS(parse_field_expr("[[1,2,3],[4,5,6],[7,8,9]]", FieldKind::SpdMatrix),
                  ParseError);
  CHECK_THROWS_AS(parse_field_expr("[[1,0],[0,1]", FieldKind::SpdMatrix), ParseError);

  const auto A = parse_field_expr("[[2, 1],[0, 2]]", FieldKind::SpdMatrix);
  const Matrix2 M = A.eval_matrix(Point::Zero(), 2);
  CHECK(M(0, 1) == doctest::Approx(0.5));  // (M + M^T)/2
  CHECK(M(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("spd bounds of a diagonal matrix are its diagonal entries") {
  const auto A = parse_field_expr("[[2,0],[0,1]]", FieldKind::SpdMatrix);
  const auto g = make_grid(DomainBox::square(1.0), 9, 9);
  const SpdBounds b = A.spd_bounds(*g);
  CHECK(b.theta == doctest::Approx(1.0));
  CHECK(b.Theta == doctest::Approx(2.0));
}

TEST_CASE("spd violation reports the first failing quadrature point") {
  const auto A = parse_field_expr("[[x,0],[0,1]]", FieldKind::SpdMatrix);
  const auto g = make_grid(DomainBox::rectangle(-1, 1, -1, 1), 9, 9);
  try {
    A.spd_bounds(*g);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("positive definite") != std::string::npos);
    CHECK(msg.find("-0.875") != std::string::npos);  // first cell center
  }
}

TEST_CASE("non-finite coefficient values are reported") {
  const auto f = parse_field_expr("1/(x-0.125)", FieldKind::Scalar);
  const auto g = make_grid(DomainBox::interval(0, 1), 5);
  CHECK_THROWS_AS(f.check_finite(*g), ValidationError);
  const auto ok = parse_field_expr("1/(1+x^2)", FieldKind::Scalar);
  CHECK_NOTHROW(ok.check_finite(*g));
}

TEST_CASE("bump fields are compactly supported with unit peak") {
  const auto W = bump_field(Point(0.5, 0), 0.25, 2);
  CHECK(at(W, 0.5, 0) == doctest::Approx(1.0));
  CHECK(at(W, 0.75, 0) == doctest::Approx(0.0));
  CHECK(at(W, 0.9, 0) == doctest::Approx(0.0));
  CHECK(at(W, 0.6, 0) > 0);

  const auto ring = annular_bump_field(Point::Zero(), 0.5, 1.0, 2);
  CHECK(at(ring, 0.25, 0) == doctest::Approx(0.0));
  CHECK(at(ring, 0.5, 0) == doctest::Approx(0.0));
  CHECK(at(ring, 1.0, 0) == doctest::Approx(0.0));
  const double mid = std::sqrt(0.5 * (0.25 + 1.0));
  CHECK(at(ring, mid, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(annular_bump_field(Point::Zero(), 1.0, 0.5, 2), ValidationError);
}

TEST_CASE("constant_field handles negatives") {
  CHECK(at(constant_field(-2.5), 7) == doctest::Approx(-2.5));
  CHECK(at(constant_field(0.0), 7) == doctest::Approx(0.0));
}

TEST_CASE("fields evaluate the same through NodalField::from_expr") {
  const auto g = make_grid(DomainBox::square(1.0), 9, 9);
  const auto f = parse_field_expr("exp(x)*max(y, 0.25)", FieldKind::Scalar);
  const NodalField u = NodalField::from_expr(g, f);
  for (Index i = 0; i < u.size(); ++i)
    CHECK(u[i] == doctest::Approx(f.eval_scalar(g->node(i), 2)));
}
