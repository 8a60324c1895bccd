#ifndef PACRIT_TESTS_ORACLES_HPP
#define PACRIT_TESTS_ORACLES_HPP

// Independent oracles used by the test and acceptance suites.  Everything
// here is deliberately written from scratch against textbook formulas and
// stays independent of the library's solution paths.

#include <cmath>
#include <random>
#include <stdexcept>

#include "pacrit/field.hpp"

namespace oracles {

/// pi_p = 2 pi / (p sin(pi/p)); the first Dirichlet eigenvalue of the 1D
/// p-Laplacian on (0,1) is (p-1) pi_p^p.
inline double pi_p(double p) {
  return 2 * M_PI / (p * std::sin(M_PI / p));
}

inline double lambda1_closed_form(double p) {
  return (p - 1) * std::pow(pi_p(p), p);
}

/// Shooting method for -(|u'|^{p-2}u')' = lambda |u|^{p-2}u, u(0)=u(1)=0:
/// integrate the flux system once at lambda = 1 with RK4, locate the first
/// zero x0 of u, and rescale: lambda_1(0,1) = x0^p.
inline double shooting_lambda1_interval(double p, int steps = 200000) {
  const double pp = p / (p - 1.0);  // conjugate exponent
  // State (u, s) with s = |u'|^{p-2}u', so u' = |s|^{1/(p-1)} sign(s).
  auto du = [&](double s) { return std::copysign(std::pow(std::abs(s), pp - 1.0), s); };
  auto ds = [&](double u) { return -std::copysign(std::pow(std::abs(u), p - 1.0), u); };

  double u = 0, s = 1, x = 0;
  const double h = 4.0 / steps;  // generous range; the first zero is < 4 for p in (1,4]
  double prev_u = u, prev_x = x;
  for (int i = 0; i < steps; ++i) {
    const double k1u = du(s), k1s = ds(u);
    const double k2u = du(s + 0.5 * h * k1s), k2s = ds(u + 0.5 * h * k1u);
    const double k3u = du(s + 0.5 * h * k2s), k3s = ds(u + 0.5 * h * k2u);
    const double k4u = du(s + h * k3s), k4s = ds(u + h * k3u);
    prev_u = u;
    prev_x = x;
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    s += h / 6 * (k1s + 2 * k2s + 2 * k3s + k4s);
    x += h;
    if (i > 10 && prev_u > 0 && u <= 0) {
      const double t = prev_u / (prev_u - u);  // linear interpolation of the zero
      const double x0 = prev_x + t * h;
      return std::pow(x0, p);
    }
  }
  throw std::runtime_error("shooting oracle: no zero crossing found");
}

/// Condenser capacity of the annulus r < |x| < R in the plane (p = 2):
/// the harmonic potential is log(R/|x|)/log(R/r), with energy 2 pi / log(R/r).
inline double annulus_capacity_2d(double r, double R) {
  return 2 * M_PI / std::log(R / r);
}

/// Direct quadratic-form arithmetic for a symmetric 2x2 matrix, row-major.
inline double quadform_2x2(const double A[4], const double xi[2]) {
  return A[0] * xi[0] * xi[0] + A[1] * xi[0] * xi[1] + A[2] * xi[1] * xi[0] +
         A[3] * xi[1] * xi[1];
}

/// Random SPD 2x2 matrix with eigenvalues in [lo, hi].
inline pacrit::Matrix2 random_spd(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double theta = unif(rng) * M_PI;
  const double c = std::cos(theta), s = std::sin(theta);
  const double d1 = lo + (hi - lo) * unif(rng);
  const double d2 = lo + (hi - lo) * unif(rng);
  pacrit::Matrix2 Q;
  Q << c, -s, s, c;
  pacrit::Matrix2 D = pacrit::Matrix2::Zero();
  D(0, 0) = d1;
  D(1, 1) = d2;
  return Q * D * Q.transpose();
}

/// Smooth random zero-trace field: a low-order sine series on the box, built
/// from the public API only.
inline pacrit::NodalField random_fourier_field(const pacrit::GridPtr& grid,
                                               std::mt19937_64& rng, int modes = 4) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const pacrit::DomainBox& box = grid->box();
  std::vector<double> cx, cy, amp;
  for (int kx = 1; kx <= modes; ++kx)
    for (int ky = 1; ky <= (box.dim == 2 ? modes : 1); ++ky) {
      cx.push_back(kx);
      cy.push_back(ky);
      amp.push_back(unif(rng) / (kx * ky));
    }
  return pacrit::NodalField::from_function(grid, [&](const pacrit::Point& x) {
    double v = 0;
    for (std::size_t m = 0; m < amp.size(); ++m) {
      double term = amp[m] * std::sin(cx[m] * M_PI * (x[0] - box.lower[0]) / box.extent(0));
      if (box.dim == 2)
        term *= std::sin(cy[m] * M_PI * (x[1] - box.lower[1]) / box.extent(1));
      v += term;
    }
    return v;
  });
}

}  // namespace oracles

#endif
