#include "pacrit/energy.hpp"

#include <cmath>

namespace pacrit {

namespace detail {

double reg_pow_pm2(double s2, double p, double eps) {
  const double t = s2 + eps * eps;
  if (p == 2) return 1.0;
  return std::pow(t, 0.5 * p - 1.0);
}

double pow_p(double s2, double p) {
  if (p == 2) return s2;
  return std::pow(s2, 0.5 * p);
}

}  // namespace detail

using detail::pow_p;
using detail::reg_pow_pm2;

namespace {

double quad_form(const Point& xi, const Matrix2& A, int dim) {
  if (dim == 1) return A(0, 0) * xi[0] * xi[0];
  return A(0, 0) * xi[0] * xi[0] + 2 * A(0, 1) * xi[0] * xi[1] + A(1, 1) * xi[1] * xi[1];
}

double quad_cross(const Point& a, const Matrix2& A, const Point& b, int dim) {
  if (dim == 1) return A(0, 0) * a[0] * b[0];
  return a[0] * (A(0, 0) * b[0] + A(0, 1) * b[1]) + a[1] * (A(1, 0) * b[0] + A(1, 1) * b[1]);
}

void require_spd(const Matrix2& A, int dim) {
  if (dim == 1) {
    if (!(A(0, 0) > 0)) throw ValidationError("matrix is not positive definite");
    return;
  }
  if (std::abs(A(0, 1) - A(1, 0)) > 1e-12 * (1 + A.cwiseAbs().maxCoeff()))
    throw ValidationError("matrix is not symmetric");
  if (!(A(0, 0) > 0 && A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0) > 0))
    throw ValidationError("matrix is not positive definite");
}

std::pair<double, double> extreme_eigs(const Matrix2& A, int dim) {
  if (dim == 1) return {A(0, 0), A(0, 0)};
  const double tr = A(0, 0) + A(1, 1);
  const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
  return {0.5 * tr - disc, 0.5 * tr + disc};
}

Point row_point(const Matrix& m, Index k, int dim) {
  Point g = Point::Zero();
  g[0] = m(k, 0);
  if (dim == 2) g[1] = m(k, 1);
  return g;
}

}  // namespace

double anisotropic_norm(const Point& xi, const Matrix2& A, int dim) {
  require_spd(A, dim);
  return std::sqrt(std::max(0.0, quad_form(xi, A, dim)));
}

double functional_Q(const NodalField& phi, const ProblemSpec& problem) {
  const double scale = 1 + phi.values().cwiseAbs().maxCoeff();
  if (phi.boundary_trace_norm() > 1e-10 * scale)
    throw ValidationError("field does not have zero boundary trace");
  const Grid& g = problem.grid();
  const int dim = g.dim();
  const double p = problem.p();
  const Matrix grads = gradient(phi);
  const Vector vals = cell_values(phi);
  const auto& A = problem.A_cells();
  const Vector& V = problem.V_cells();
  Vector integrand(vals.size());
  for (Index k = 0; k < vals.size(); ++k) {
    const Point gr = row_point(grads, k, dim);
    integrand[k] = pow_p(quad_form(gr, A[static_cast<std::size_t>(k)], dim), p) +
                   V[k] * std::pow(std::abs(vals[k]), p);
  }
  return integrate(integrand, g);
}

double functional_J(const NodalField& u, const NodalField& f, const ProblemSpec& problem) {
  const Grid& g = problem.grid();
  const int dim = g.dim();
  const double p = problem.p();
  const Matrix grads = gradient(u);
  const Vector vals = cell_values(u);
  const Vector fvals = cell_values(f);
  const auto& A = problem.A_cells();
  const Vector& V = problem.V_cells();
  Vector integrand(vals.size());
  for (Index k = 0; k < vals.size(); ++k) {
    const Point gr = row_point(grads, k, dim);
    integrand[k] = pow_p(quad_form(gr, A[static_cast<std::size_t>(k)], dim), p) +
                   V[k] * std::pow(std::abs(vals[k]), p) - p * fvals[k] * vals[k];
  }
  return integrate(integrand, g);
}

PiconeResult picone(const NodalField& u, const NodalField& v, const ProblemSpec& problem) {
  if (!(v.min() > 0)) throw ValidationError("picone: v must be positive at all nodes");
  if (u.min() < 0) throw ValidationError("picone: u must be nonnegative");
  const Grid& g = problem.grid();
  const int dim = g.dim();
  const double p = problem.p();
  const double eps = problem.epsilon();
  const Matrix gu = gradient(u);
  const Matrix gv = gradient(v);
  const Vector uc = cell_values(u);
  const Vector vc = cell_values(v);
  const auto& A = problem.A_cells();

  PiconeResult out;
  out.L.resize(uc.size());
  out.R.resize(uc.size());
  for (Index k = 0; k < uc.size(); ++k) {
    const auto& Ak = A[static_cast<std::size_t>(k)];
    const Point du = row_point(gu, k, dim);
    const Point dv = row_point(gv, k, dim);
    const double w = uc[k] / vc[k];
    const double wp1 = std::pow(w, p - 1);
    const double wp = wp1 * w;
    const double nu2 = quad_form(du, Ak, dim);
    const double nv2 = quad_form(dv, Ak, dim);
    const double cross = quad_cross(du, Ak, dv, dim);
    const double vfac = reg_pow_pm2(nv2, p, eps);

    out.L[k] = pow_p(nu2, p) + (p - 1) * wp * pow_p(nv2, p) - p * wp1 * cross * vfac;
    // R route: grad(u^p / v^{p-1}) expanded at the quadrature point.
    const double ratio_du = p * wp1;    // coefficient of grad u
    const double ratio_dv = (p - 1) * wp;  // coefficient of -grad v
    out.R[k] = pow_p(nu2, p) - (ratio_du * cross - ratio_dv * nv2) * vfac;
  }
  out.intL = integrate(out.L, g);
  out.intR = integrate(out.R, g);
  return out;
}

double simplified_energy(const NodalField& v, const NodalField& w, const ProblemSpec& problem) {
  if (!(v.min() > 0)) throw ValidationError("simplified_energy: v must be positive");
  if (w.min() < 0) throw ValidationError("simplified_energy: w must be nonnegative");
  const Grid& g = problem.grid();
  const int dim = g.dim();
  const double p = problem.p();
  const double eps = problem.epsilon();
  const Matrix gv = gradient(v);
  const Matrix gw = gradient(w);
  const Vector vc = cell_values(v);
  const Vector wc = cell_values(w);
  const auto& A = problem.A_cells();
  Vector integrand(vc.size());
  for (Index k = 0; k < vc.size(); ++k) {
    const auto& Ak = A[static_cast<std::size_t>(k)];
    const Point dv = row_point(gv, k, dim);
    const Point dw = row_point(gw, k, dim);
    const double nv = std::sqrt(std::max(0.0, quad_form(dv, Ak, dim)));
    const double nw2 = std::max(0.0, quad_form(dw, Ak, dim));
    const double lead = vc[k] * vc[k] * nw2;
    if (lead == 0) {
      integrand[k] = 0;  // 0 * 0^{p-2} convention
      continue;
    }
    const double s = wc[k] * nv + vc[k] * std::sqrt(nw2);
    integrand[k] = lead * reg_pow_pm2(s * s, p, eps);
  }
  return integrate(integrand, g);
}

double adsa_I(const NodalField& u, const NodalField& v, const ProblemSpec& problem) {
  if (!(u.min() > 0) || !(v.min() > 0))
    throw ValidationError("adsa_I: u and v must be positive");
  for (Index i = 0; i < u.size(); ++i) {
    const double r = u[i] / v[i];
    if (!(r <= kAdsaRatioCap && 1 / r <= kAdsaRatioCap))
      throw ValidationError("adsa_I: ratio unbounded (u/v or v/u beyond cap)");
  }
  const Grid& g = problem.grid();
  const int dim = g.dim();
  const double p = problem.p();
  const double eps = problem.epsilon();
  const Matrix gu = gradient(u);
  const Matrix gv = gradient(v);
  const Vector uc = cell_values(u);
  const Vector vc = cell_values(v);
  const auto& A = problem.A_cells();

  auto r_term = [&](const Point& da, double ac, const Point& db, double bc,
                    const Matrix2& Ak) {
    // R_A(a, b) at one quadrature point via the expanded ratio gradient.
    const double w = ac / bc;
    const double wp1 = std::pow(w, p - 1);
    const double wp = wp1 * w;
    const double nb2 = quad_form(db, Ak, dim);
    const double na2 = quad_form(da, Ak, dim);
    const double cross = quad_cross(da, Ak, db, dim);
    const double bfac = reg_pow_pm2(nb2, p, eps);
    return pow_p(na2, p) - (p * wp1 * cross - (p - 1) * wp * nb2) * bfac;
  };

  Vector integrand(uc.size());
  for (Index k = 0; k < uc.size(); ++k) {
    const auto& Ak = A[static_cast<std::size_t>(k)];
    const Point du = row_point(gu, k, dim);
    const Point dv = row_point(gv, k, dim);
    integrand[k] = r_term(du, uc[k], dv, vc[k], Ak) + r_term(dv, vc[k], du, uc[k], Ak);
  }
  return integrate(integrand, g);
}

EquivSample elementary_equiv(const Point& a, const Point& b, const Matrix2& A, double p,
                             int dim) {
  require_spd(A, dim);
  const double na2 = quad_form(a, A, dim);
  const double nb2 = quad_form(b, A, dim);
  if (na2 == 0 && nb2 == 0)
    throw ValidationError("elementary_equiv: a and b cannot both vanish");
  const Point ab = a + b;
  const double nab2 = quad_form(ab, A, dim);
  const double cross = quad_cross(a, A, b, dim);
  const double third = na2 == 0 ? 0.0 : p * std::pow(na2, 0.5 * p - 1.0) * cross;
  EquivSample out;
  out.lhs = pow_p(nab2, p) - pow_p(na2, p) - third;
  const double s = std::sqrt(na2) + std::sqrt(nb2);
  out.rhs = nb2 * std::pow(s, p - 2.0);
  if (nb2 > 0) out.ratio = out.lhs / out.rhs;
  return out;
}

LinearizedBounds linearized_bounds(const Point& grad_u, const Point& xi, const Matrix2& A,
                                   double p, int dim) {
  require_spd(A, dim);
  const double nu2 = quad_form(grad_u, A, dim);
  if (nu2 == 0) throw ValidationError("linearized_bounds: zero gradient");
  const double Axi = quad_form(xi, A, dim);
  const double cross = quad_cross(grad_u, A, xi, dim);
  LinearizedBounds out;
  out.quadform = std::pow(nu2, 0.5 * p - 1.0) * (Axi + (p - 2) * cross * cross / nu2);

  const auto [theta, Theta] = extreme_eigs(A, dim);
  const double eu2 = dim == 1 ? grad_u[0] * grad_u[0] : grad_u.squaredNorm();
  const double xi2 = dim == 1 ? xi[0] * xi[0] : xi.squaredNorm();
  const double gu_pm2 = std::pow(eu2, 0.5 * p - 1.0);
  // For p >= 2 these reduce to min{1,p-1} theta^{p/2} and max{1,p-1} Theta^{p/2};
  // for p < 2 the conversion |grad u|_A^{p-2} <-> |grad u|^{p-2} flips which
  // eigenvalue carries the (p-2)/2 exponent.
  const double lo_conv = p >= 2 ? std::pow(theta, 0.5 * p - 1.0) : std::pow(Theta, 0.5 * p - 1.0);
  const double hi_conv = p >= 2 ? std::pow(Theta, 0.5 * p - 1.0) : std::pow(theta, 0.5 * p - 1.0);
  out.lower = std::min(1.0, p - 1) * theta * lo_conv * gu_pm2 * xi2;
  out.upper = std::max(1.0, p - 1) * Theta * hi_conv * gu_pm2 * xi2;
  return out;
}

}  // namespace pacrit
