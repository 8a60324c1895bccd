#ifndef PACRIT_ENERGY_HPP
#define PACRIT_ENERGY_HPP

#include <optional>

#include "pacrit/field.hpp"
#include "pacrit/problem.hpp"
#include "pacrit/types.hpp"

namespace pacrit {

/// |xi|_A = sqrt(<A xi, xi>).  Throws ValidationError if A is not symmetric
/// positive definite.
double anisotropic_norm(const Point& xi, const Matrix2& A, int dim = 2);

/// Energy functional Q(phi) = integral of |grad phi|_A^p + V |phi|^p over the
/// grid.  phi must have zero boundary trace.
double functional_Q(const NodalField& phi, const ProblemSpec& problem);

/// Source-coupled objective J_f(u) = integral of |grad u|_A^p + V|u|^p - p f u.
double functional_J(const NodalField& u, const NodalField& f, const ProblemSpec& problem);

/// Picone identity evaluation.  L is the three-term expansion, R the route
/// through the gradient of u^p / v^{p-1}; both are evaluated per cell from
/// the same cell gradients and interpolated values, so L = R holds to
/// rounding while each side exercises a different expression tree.
struct PiconeResult {
  Vector L;  // per active cell
  Vector R;
  double intL = 0;
  double intR = 0;
};
PiconeResult picone(const NodalField& u, const NodalField& v, const ProblemSpec& problem);

/// Simplified energy: integral of v^2 |grad w|_A^2 (w |grad v|_A + v |grad w|_A)^{p-2},
/// with the convention 0 * 0^{p-2} = 0.  w must be supported in the interior.
double simplified_energy(const NodalField& v, const NodalField& w, const ProblemSpec& problem);

/// Anane-Diaz-Saa functional, computed as int R_A(u,v) + int R_A(v,u).
/// Requires u, v > 0 with nodewise ratios below the configured cap.
double adsa_I(const NodalField& u, const NodalField& v, const ProblemSpec& problem);

/// Ratio cap defining the admissible domain of adsa_I.
inline constexpr double kAdsaRatioCap = 1e12;

/// Elementary two-sided expansion bound:
///   lhs = |a+b|_A^p - |a|_A^p - p |a|_A^{p-2} a.Ab,
///   rhs = |b|_A^2 (|a|_A + |b|_A)^{p-2}.
/// ratio is empty when b = 0 (then lhs is exactly 0).
struct EquivSample {
  double lhs = 0;
  double rhs = 0;
  std::optional<double> ratio;
};
EquivSample elementary_equiv(const Point& a, const Point& b, const Matrix2& A, double p,
                             int dim = 2);

/// Quadratic form of the linearized operator coefficients a^{ij}(A, x, grad u)
/// against xi, with two-sided ellipticity bounds in terms of the extreme
/// eigenvalues theta, Theta of A.
struct LinearizedBounds {
  double quadform = 0;
  double lower = 0;
  double upper = 0;
};
LinearizedBounds linearized_bounds(const Point& grad_u, const Point& xi, const Matrix2& A,
                                   double p, int dim = 2);

namespace detail {
/// (s2 + eps^2)^{(p-2)/2} -- the regularized |.|^{p-2} factor on squared input.
double reg_pow_pm2(double s2, double p, double eps);
/// s2^{p/2} with the p = 2 fast path.
double pow_p(double s2, double p);
}  // namespace detail

}  // namespace pacrit

#endif
