#ifndef PACRIT_EXPR_HPP
#define PACRIT_EXPR_HPP

#include <memory>
#include <string>
#include <vector>

#include "pacrit/domain.hpp"
#include "pacrit/types.hpp"

namespace pacrit {

namespace detail {
struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;
}  // namespace detail

enum class FieldKind { Scalar, SpdMatrix };

/// Eigenvalue bounds of a matrix field over the quadrature points of a grid;
/// the discrete surrogate for the local ellipticity constants.
struct SpdBounds {
  double theta = 0;  // smallest eigenvalue seen
  double Theta = 0;  // largest eigenvalue seen
};

/// Coefficient field defined by a tiny total expression grammar over
/// variables x, y, r = |x|; see docs/expressions.md.  Matrix fields hold one
/// expression per entry and are symmetrized as (M + M^T)/2 before use.
/// Immutable and safe to evaluate from multiple threads.
class CoefficientField {
 public:
  FieldKind kind() const { return kind_; }
  const std::string& source() const { return source_; }

  double eval_scalar(const Point& x, int dim) const;
  /// Symmetrized matrix value; 1D matrices occupy the (0,0) entry.
  Matrix2 eval_matrix(const Point& x, int dim) const;
  int matrix_dim() const { return rows_; }

  /// Smallest/largest eigenvalue over the grid's quadrature points.  Throws
  /// ValidationError at the first point where the matrix is not positive
  /// definite or an entry is not finite.
  SpdBounds spd_bounds(const Grid& grid) const;
  /// Throws ValidationError at the first quadrature point with a non-finite
  /// value.
  void check_finite(const Grid& grid) const;

 private:
  friend CoefficientField parse_field_expr(const std::string&, FieldKind);
  FieldKind kind_ = FieldKind::Scalar;
  int rows_ = 0;
  std::string source_;
  std::vector<detail::ExprPtr> entries_;  // scalar: 1; matrix: rows*rows row-major
};

/// Parse expression text.  Scalar grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := unary ('^' factor)?
///   unary  := '-' unary | primary
///   primary:= number | 'x' | 'y' | 'r' | fn1 '(' expr ')'
///           | fn2 '(' expr ',' expr ')' | '(' expr ')'
///   fn1    := 'exp' | 'log' | 'abs';  fn2 := 'min' | 'max'
/// Matrix fields use '[[e,..],[e,..]]' with scalar expressions as entries.
/// Throws ParseError with the offending position.
CoefficientField parse_field_expr(const std::string& text, FieldKind kind);

/// Constant scalar field.
CoefficientField constant_field(double value);

/// Compactly supported C^1 bump with unit peak at `center`, vanishing for
/// |x-center| >= radius:  ((max(0, R^2-s^2))/R^2)^2 with s = |x-center|.
/// Returned as an ordinary expression-backed field so configs can reproduce it.
CoefficientField bump_field(const Point& center, double radius, int dim, double amplitude = 1.0);

/// Compactly supported C^1 annular bump with unit peak between the radii.
CoefficientField annular_bump_field(const Point& center, double r_in, double r_out, int dim,
                                    double amplitude = 1.0);

/// Compactly supported bump that is identically 1 on |x-center| <=
/// plateau_fraction * radius and decays to 0 at radius (Lipschitz at the
/// plateau seam).
CoefficientField plateau_bump_field(const Point& center, double radius, int dim,
                                    double plateau_fraction = 0.85);

}  // namespace pacrit

#endif
