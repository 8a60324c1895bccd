#include "pacrit/minimal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "internal.hpp"

namespace pacrit {

using internal::restrict_interior;
using internal::sample_onto;

namespace {

GridPtr punctured(const GridPtr& grid, const Point& center, double radius) {
  return std::make_shared<Grid>(grid->with_hole(center, radius));
}

// Dirichlet values on a punctured grid: `ring` on the nodes hugging the hole,
// zero on the outer boundary.  The ring test is geometric: boundary nodes
// within one cell diagonal of the hole.
NodalField hole_boundary_data(const GridPtr& grid, const Point& center, double radius,
                              const std::function<double(const Point&)>& ring) {
  const double diag = grid->dim() == 1
                          ? grid->spacing(0)
                          : std::hypot(grid->spacing(0), grid->spacing(1));
  NodalField g(grid);
  for (Index i = 0; i < g.size(); ++i) {
    if (grid->kind(i) != NodeKind::Boundary) continue;
    Point d = grid->node(i) - center;
    if (grid->dim() == 1) d[1] = 0;
    if (d.norm() <= radius + 2 * diag) g[i] = ring(grid->node(i));
  }
  return g;
}

double max_gap_on(const Grid& probe, const NodalField& a, const NodalField& b,
                  const Point& skip_center, double skip_radius) {
  double gap = 0;
  for (Index i = 0; i < probe.num_nodes(); ++i) {
    const Point x = probe.node(i);
    Point d = x - skip_center;
    if (probe.dim() == 1) d[1] = 0;
    if (skip_radius > 0 && d.norm() < skip_radius) continue;
    gap = std::max(gap, std::abs(a.sample(x) - b.sample(x)));
  }
  return gap;
}

}  // namespace

MinimalGrowthReport minimal_growth_solution(const ProblemFamily& family, const BallSpec& hole,
                                            const CoefficientField& data,
                                            const MinimalGrowthOptions& opts) {
  const Exhaustion& ex = family.exhaustion;
  if (!ex.member(0)->box().contains(hole.center, hole.radius))
    throw ValidationError("minimal_growth: K must lie inside the first member");
  const int dim = ex.base().dim;
  auto ring_value = [&](const Point& x) { return data.eval_scalar(x, dim); };

  const GridPtr first = punctured(ex.member(0), hole.center, hole.radius);
  MinimalGrowthReport report{NodalField(first)};
  std::optional<NodalField> prev;
  for (int k = 0; k < ex.count(); ++k) {
    const GridPtr grid = punctured(ex.member(k), hole.center, hole.radius);
    ProblemSpec spec(family.p, grid, family.A, family.V, family.reg);

    EigenReport eig = principal_eigenpair(spec, opts.eigen);
    report.lambda1.push_back(eig.lambda1);
    if (!(eig.lambda1 > 0))
      throw AnalysisError("minimal_growth: lambda_1 <= 0 on punctured member " +
                          std::to_string(k));

    NodalField g = hole_boundary_data(grid, hole.center, hole.radius, ring_value);
    for (Index i = 0; i < g.size(); ++i) {
      if (grid->kind(i) == NodeKind::Boundary && g[i] != 0 && !(g[i] > 0))
        throw ValidationError("minimal_growth: boundary data must be positive on the ring");
    }

    SolveOptions sopts = opts.solve;
    NodalField warm{grid};
    if (prev) {
      warm = sample_onto(*prev, grid);
      sopts.warm_start = &warm;
    }
    SolveReport sol = solve_dirichlet(spec, NodalField(grid), g, sopts);
    if (!sol.converged)
      throw AnalysisError("minimal_growth: member solve did not converge");

    report.members_used = k + 1;
    if (prev) {
      // Weak-comparison consequence: the sequence grows with the domain.
      double worst = 0;
      const Grid& pg = prev->grid();
      for (Index i = 0; i < pg.num_nodes(); ++i) {
        if (!pg.is_interior(i)) continue;
        const Point x = pg.node(i);
        worst = std::min(worst, sol.solution.sample(x) - (*prev)[i]);
      }
      report.monotone_margin = std::min(report.monotone_margin, worst);
      if (worst < -opts.monotone_tol * (1 + prev->max()))
        throw AnalysisError(
            "minimal_growth: monotonicity violated beyond tolerance (solver inconsistency)");

      const double gap = max_gap_on(*first, sol.solution, *prev, hole.center, 0);
      report.gaps.push_back(gap);
      if (gap <= opts.stabilize_tol) {
        report.solution = sol.solution;
        report.stabilized = true;
        return report;
      }
    }
    prev = sol.solution;
    report.solution = *prev;
  }
  report.stabilized = false;  // ran out of members: caller reports inconclusive
  return report;
}

ExponentFit singularity_exponent(const NodalField& u, const Point& x0, double rmin,
                                 double rmax, SingularityModel model,
                                 double removable_ratio) {
  const Grid& g = u.grid();
  if (!(rmin > 0 && rmax > rmin))
    throw ValidationError("singularity_exponent: need 0 < rmin < rmax");
  const double h = g.max_spacing();
  const int nshells = static_cast<int>(std::floor((rmax - rmin) / h)) + 1;

  ExponentFit fit;
  for (int s = 0; s < nshells; ++s) {
    const double lo = rmin + s * h;
    const double hi = std::min(lo + h, rmax);
    if (lo >= hi) break;
    double sum = 0, rsum = 0;
    long count = 0;
    for (Index i = 0; i < g.num_nodes(); ++i) {
      if (!g.is_active(i)) continue;
      Point d = g.node(i) - x0;
      if (g.dim() == 1) d[1] = 0;
      const double r = d.norm();
      if (r < lo || r >= hi) continue;
      sum += u[i];
      rsum += r;
      ++count;
    }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    if (!(mean > 0))
      throw ValidationError("singularity_exponent: field not positive on the fit window");
    fit.profile.emplace_back(rsum / static_cast<double>(count), mean);
  }
  fit.shells = static_cast<int>(fit.profile.size());
  if (fit.shells <= 4)
    throw ValidationError(
        "singularity_exponent: fit window too small (grid too coarse near x0)");

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [r, v] : fit.profile) {
    const double x = model == SingularityModel::PowerLaw ? std::log(r) : -std::log(r);
    const double y = model == SingularityModel::PowerLaw ? std::log(v) : v;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(fit.shells);
  const double vx = n * sxx - sx * sx;
  const double vy = n * syy - sy * sy;
  const double cov = n * sxy - sx * sy;
  fit.value = cov / vx;
  fit.r2 = vy > 0 ? (cov * cov) / (vx * vy) : 1.0;

  // Classification: bounded profiles are removable; profiles diverging at a
  // rate consistent with the fitted model are nonremovable.
  double vmax = 0, vmed;
  {
    std::vector<double> vals;
    for (const auto& [r, v] : fit.profile) {
      vals.push_back(v);
      vmax = std::max(vmax, v);
    }
    std::nth_element(vals.begin(), vals.begin() + vals.size() / 2, vals.end());
    vmed = vals[vals.size() / 2];
  }
  const bool bounded = vmax / vmed < removable_ratio;
  if (model == SingularityModel::PowerLaw) {
    if (fit.value < -0.2 && fit.r2 >= 0.9) fit.classification = "nonremovable";
    else if (bounded) fit.classification = "removable";
    else fit.classification = "inconclusive";
  } else {
    const double range = std::log(fit.profile.back().first / fit.profile.front().first);
    const bool diverging = fit.value > 0 && fit.value * range > 0.3 * vmed && fit.r2 >= 0.9;
    if (diverging) fit.classification = "nonremovable";
    else if (bounded) fit.classification = "removable";
    else fit.classification = "inconclusive";
  }
  return fit;
}

GreenReport green_function(const ProblemFamily& family, const Point& x0, const Point& x1,
                           const GreenOptions& opts) {
  const Exhaustion& ex = family.exhaustion;
  const int dim = ex.base().dim;
  const GridPtr& first_plain = ex.member(0);
  if (!first_plain->box().contains(x0))
    throw ValidationError("green_function: x0 must be interior to the first member");
  if (!first_plain->box().contains(x1) || (x1 - x0).norm() < 1e-12)
    throw ValidationError("green_function: x1 must lie in the first member, away from x0");

  const double h = first_plain->max_spacing();
  double first_scale = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) {
    first_scale = std::min(first_scale, first_plain->box().upper[a] - x0[a]);
    first_scale = std::min(first_scale, x0[a] - first_plain->box().lower[a]);
  }
  const double fit_rmin = 4 * h;
  const double fit_rmax = 0.25 * first_scale;
  if ((x1 - x0).norm() <= fit_rmax)
    throw ValidationError("green_function: x1 must sit outside the fit window");

  // Geometric source schedule, floored at 2h so the annulus stays resolved.
  std::vector<double> radii;
  double rho = 0.5 * fit_rmax;
  for (int k = 0; k < ex.count(); ++k) {
    radii.push_back(std::max(2 * h, rho));
    rho *= 0.5;
  }

  GreenReport report{NodalField(first_plain)};
  report.x0 = x0;
  report.x1 = x1;
  report.model = family.p == dim ? SingularityModel::Logarithmic : SingularityModel::PowerLaw;

  std::optional<NodalField> prev;
  for (int k = 0; k < ex.count(); ++k) {
    const double rho = radii[static_cast<std::size_t>(k)];
    report.source_radius.push_back(rho);
    const GridPtr grid = punctured(ex.member(k), x0, rho);
    ProblemSpec spec(family.p, grid, family.A, family.V, family.reg);

    EigenReport eig = principal_eigenpair(spec, opts.eigen);
    if (!(eig.lambda1 > 0))
      throw AnalysisError("green_function: lambda_1 <= 0 on punctured member " +
                          std::to_string(k));

    const NodalField f =
        NodalField::from_expr(grid, annular_bump_field(x0, rho, 2 * rho, dim));
    SolveOptions sopts = opts.solve;
    NodalField warm{grid};
    if (prev) {
      warm = sample_onto(*prev, grid);
      sopts.warm_start = &warm;
    }
    SolveReport sol = solve_dirichlet(spec, f, NodalField(grid), sopts);
    if (!sol.converged) throw AnalysisError("green_function: member solve did not converge");

    const double v1 = sol.solution.sample(x1);
    if (!(v1 > 0)) throw AnalysisError("green_function: solution not positive at x1");
    sol.solution.values() /= v1;

    report.members_used = k + 1;
    if (prev) {
      // Relative agreement outside the source region of the first member.
      double gap = 0;
      for (Index i = 0; i < first_plain->num_nodes(); ++i) {
        const Point x = first_plain->node(i);
        Point d = x - x0;
        if (dim == 1) d[1] = 0;
        if (d.norm() < fit_rmin) continue;
        const double a = sol.solution.sample(x);
        const double b = prev->sample(x);
        gap = std::max(gap, std::abs(a - b) / (1 + std::abs(b)));
      }
      report.gaps.push_back(gap);
    }
    prev = sol.solution;
    report.field = *prev;
  }
  report.stabilized =
      !report.gaps.empty() && report.gaps.back() <= opts.stabilize_tol;

  report.fit =
      singularity_exponent(report.field, x0, fit_rmin, fit_rmax, report.model);
  if (report.fit.shells < opts.fit_min_shells)
    throw ValidationError("green_function: fit window too small (grid too coarse near x0)");
  return report;
}

LiouvilleReport liouville_check(const LiouvilleInput& input) {
  const ProblemSpec& p0 = input.problem0;
  const ProblemSpec& p1 = input.problem1;
  if (p0.grid_ptr() != p1.grid_ptr())
    throw ValidationError("liouville_check: both problems must share one grid");
  if (p0.p() != p1.p())
    throw ValidationError("liouville_check: both problems must share the exponent p");
  if (input.psi.grid_ptr() != p0.grid_ptr() || input.phi.grid_ptr() != p0.grid_ptr())
    throw ValidationError("liouville_check: fields must live on the problem grid");
  if (!(input.M > 0) || !(input.N > 0))
    throw ValidationError("liouville_check: constants M, N must be positive");
  const Grid& grid = p0.grid();
  const int dim = grid.dim();
  const double p = p0.p();

  LiouvilleReport report;
  std::ostringstream os;

  {  // (i) phi is a positive (numerical) ground state of problem1
    double phimin = std::numeric_limits<double>::infinity();
    for (const Index i : grid.interior_nodes()) phimin = std::min(phimin, input.phi[i]);
    const double res = el_residual(p1, input.phi);
    const double scale = 1 + input.phi.values().cwiseAbs().maxCoeff();
    if (!(phimin > 0)) {
      report.ground_state = {false, "phi not positive in the interior (min " +
                                        std::to_string(phimin) + ")"};
    } else if (res > 1e-6 * scale) {
      report.ground_state = {false, "phi does not solve problem1: dual residual " +
                                        std::to_string(res)};
    } else {
      report.ground_state = {true, "phi > 0, dual residual " + std::to_string(res)};
    }
  }

  {  // (ii) psi_+ != 0 and psi is a subsolution of problem0
    const double psimax = input.psi.max();
    if (!(psimax > 0)) {
      report.subsolution = {false, "psi_+ vanishes identically"};
    } else {
      const Vector r = el_pairing(p0, input.psi);
      const double margin = r.size() ? r.maxCoeff() : 0.0;
      const double scale = 1 + input.psi.values().cwiseAbs().maxCoeff();
      if (margin > 1e-6 * scale)
        report.subsolution = {false,
                              "psi fails the weak subsolution inequality (margin " +
                                  std::to_string(margin) + ")"};
      else
        report.subsolution = {true, "psi_+ != 0, subsolution margin " + std::to_string(margin)};
    }
  }

  const NodalField psi_plus(input.psi.grid_ptr(), input.psi.values().cwiseMax(0.0));
  const Vector psi_c = cell_values(psi_plus);
  const Vector phi_c = cell_values(input.phi);
  const Matrix gpsi = gradient(psi_plus);
  const Matrix gphi = gradient(input.phi);
  const auto& A0 = p0.A_cells();
  const auto& A1 = p1.A_cells();
  const auto& cells = grid.active_cells();

  {  // (iii) M^2 phi^2 A1 - psi_+^2 A0 nonnegative definite per quadrature point
    bool pass = true;
    std::string witness = "holds at every quadrature point";
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const double mphi = input.M * phi_c[static_cast<Index>(k)];
      const Matrix2 S = mphi * mphi * A1[k] -
                        psi_c[static_cast<Index>(k)] * psi_c[static_cast<Index>(k)] * A0[k];
      double lmin;
      if (dim == 1) {
        lmin = S(0, 0);
      } else {
        const double tr = S(0, 0) + S(1, 1);
        const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
        lmin = 0.5 * tr - std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
      }
      const double scale = 1 + mphi * mphi * A1[k].cwiseAbs().maxCoeff();
      if (lmin < -1e-10 * scale) {
        const Point x = grid.cell_center(cells[k]);
        os.str("");
        os << "indefinite at (" << x[0];
        if (dim == 2) os << ", " << x[1];
        os << "): smallest eigenvalue " << lmin;
        witness = os.str();
        pass = false;
        break;
      }
    }
    report.matrix_bound = {pass, witness};
  }

  {  // (iv) |grad psi|_{A0}^{p-2} <= N^{p-2} |grad phi|_{A1}^{p-2} on {psi > 0}
    bool pass = true;
    std::string witness = "holds on {psi > 0}";
    const double eps0 = p0.epsilon();
    const double eps1 = p1.epsilon();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!(psi_c[static_cast<Index>(k)] > 0)) continue;
      auto nsq = [&](const Matrix& gm, const Matrix2& A) {
        Point gr = Point::Zero();
        gr[0] = gm(static_cast<Index>(k), 0);
        if (dim == 2) gr[1] = gm(static_cast<Index>(k), 1);
        if (dim == 1) return A(0, 0) * gr[0] * gr[0];
        return A(0, 0) * gr[0] * gr[0] + 2 * A(0, 1) * gr[0] * gr[1] +
               A(1, 1) * gr[1] * gr[1];
      };
      const double n0 = nsq(gpsi, A0[k]);
      const double n1 = nsq(gphi, A1[k]);
      // Both gradients at the regularization floor: 0^{p-2} on both sides.
      if (n0 <= 4 * eps0 * eps0 && n1 <= 4 * eps1 * eps1) continue;
      const double lhs = detail::reg_pow_pm2(n0, p, eps0);
      const double rhs = std::pow(input.N, p - 2.0) * detail::reg_pow_pm2(n1, p, eps1);
      if (lhs > rhs * (1 + 1e-9)) {
        const Point x = grid.cell_center(cells[k]);
        os.str("");
        os << "fails at (" << x[0];
        if (dim == 2) os << ", " << x[1];
        os << "): lhs " << lhs << " > rhs " << rhs;
        witness = os.str();
        pass = false;
        break;
      }
    }
    report.gradient_bound = {pass, witness};
  }

  report.certified = report.ground_state.pass && report.subsolution.pass &&
                     report.matrix_bound.pass && report.gradient_bound.pass;
  report.conclusion = report.certified
                          ? "criticality of problem0 certified (desk scale)"
                          : "conditions not satisfied; no conclusion";
  return report;
}

}  // namespace pacrit
