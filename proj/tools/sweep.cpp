// Dev utility: measure the empirical constants that the test suite freezes.
#include <cstdio>
#include <random>

#include "pacrit/criticality.hpp"
#include "pacrit/energy.hpp"
#include "pacrit/solve.hpp"

using namespace pacrit;

namespace {

Matrix2 random_spd(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double theta = unif(rng) * M_PI;
  const double c = std::cos(theta), s = std::sin(theta);
  Matrix2 Q;
  Q << c, -s, s, c;
  Matrix2 D = Matrix2::Zero();
  D(0, 0) = lo + (hi - lo) * unif(rng);
  D(1, 1) = lo + (hi - lo) * unif(rng);
  return Q * D * Q.transpose();
}

}  // namespace

int main() {
  std::mt19937_64 rng(20240809);
  std::normal_distribution<double> normal;

  for (const double p : {1.5, 3.0, 4.0}) {
    double rmin = 1e300, rmax = -1e300;
    for (int t = 0; t < 100000; ++t) {
      const Matrix2 A = random_spd(rng, 0.2, 5.0);
      Point a(normal(rng), normal(rng)), b(normal(rng), normal(rng));
      if (a.norm() < 1e-12 || b.norm() < 1e-12) continue;
      // stress extreme length ratios too
      if (t % 3 == 1) a *= 1e3;
      if (t % 3 == 2) b *= 1e3;
      const EquivSample s = elementary_equiv(a, b, A, p);
      if (!s.ratio) continue;
      rmin = std::min(rmin, *s.ratio);
      rmax = std::max(rmax, *s.ratio);
    }
    std::printf("equiv p=%.1f ratio in [%.6f, %.6f]\n", p, rmin, rmax);
  }

  // simplified energy vs Q(vw) when v solves Q(v) = 0 (V = -lambda1 shift)
  for (const double p : {1.5, 2.0, 3.0}) {
    const auto grid = make_grid(DomainBox::interval(0, 1), 129);
    const auto A = parse_field_expr("[[1]]", FieldKind::SpdMatrix);
    const ProblemSpec spec0(p, grid, A, parse_field_expr("0", FieldKind::Scalar));
    const EigenReport eig = principal_eigenpair(spec0);
    const ProblemSpec spec(p, grid, A, constant_field(-eig.lambda1));
    NodalField v = eig.phi;
    v.values().array() += 1e-9;  // keep v strictly positive at the boundary nodes

    std::mt19937_64 rng2(7);
    double cmin = 1e300, cmax = -1e300;
    for (int t = 0; t < 200; ++t) {
      // random nonnegative compactly supported w
      NodalField w(grid);
      std::uniform_real_distribution<double> unif(0.2, 0.8);
      const double c0 = unif(rng2), rad = 0.05 + 0.3 * unif(rng2);
      for (const Index i : grid->interior_nodes()) {
        const double x = grid->node(i)[0];
        const double s = std::abs(x - c0) / rad;
        w[i] = s < 1 ? (1 - s * s) * (1 - s * s) * (0.5 + unif(rng2)) : 0.0;
      }
      if (w.values().maxCoeff() <= 0) continue;
      NodalField vw(grid, v.values().cwiseProduct(w.values()));
      vw.enforce_zero_trace();
      const double q = functional_Q(vw, spec);
      const double se = simplified_energy(v, w, spec);
      if (se <= 0 || q <= 0) continue;
      cmin = std::min(cmin, q / se);
      cmax = std::max(cmax, q / se);
    }
    std::printf("simplified p=%.1f Q/simplified in [%.4f, %.4f]\n", p, cmin, cmax);
  }
  return 0;
}
