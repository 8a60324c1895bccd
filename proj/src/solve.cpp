#include "pacrit/solve.hpp"

#include "internal.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace pacrit {

double default_solve_tol(double p) { return p >= 2 ? 1e-8 : 1e-6; }

namespace {

using internal::Assembled;
using internal::assemble;
using internal::MassResult;
using internal::mass_and_grad;
using internal::restrict_interior;
using internal::scatter_interior;

}  // namespace

Vector el_pairing(const ProblemSpec& problem, const NodalField& u, double lambda) {
  Assembled a = assemble(problem, u.values(), nullptr);
  Vector r = a.grad;
  if (lambda != 0) {
    MassResult m = mass_and_grad(problem, u.values());
    r -= lambda * m.grad;
  }
  return restrict_interior(problem.grid(), r) / problem.p();
}

double el_residual(const ProblemSpec& problem, const NodalField& u, double lambda) {
  return problem.stiffness().dual_norm(el_pairing(problem, u, lambda) * problem.p());
}

SolveReport solve_dirichlet(const ProblemSpec& problem, const NodalField& f,
                            const NodalField& g, const SolveOptions& opts) {
  const Grid& grid = problem.grid();
  if (!f.values().allFinite() || !g.values().allFinite())
    throw ValidationError("source and boundary data must be finite");
  const double tol = opts.tol.value_or(default_solve_tol(problem.p()));
  const StiffnessSolver& P = problem.stiffness();
  const Vector f_cells = cell_values(f);

  NodalField u(problem.grid_ptr());
  for (Index i = 0; i < u.size(); ++i) {
    if (grid.kind(i) == NodeKind::Boundary) u[i] = g[i];
  }
  if (opts.warm_start) {
    for (const Index i : grid.interior_nodes()) u[i] = (*opts.warm_start)[i];
  }

  const double blowup_guard = 1e12 * (1 + g.values().cwiseAbs().maxCoeff());

  SolveReport report(u);
  Assembled cur = assemble(problem, u.values(), &f_cells);
  Vector r = restrict_interior(grid, cur.grad);
  double alpha = 1.0;
  std::unique_ptr<StiffnessSolver> rescue;
  int rebuilds = 0;
  long it = 0;
  for (; it < opts.max_iter; ++it) {
    const double res = P.dual_norm(r);
    if (res <= tol) {
      report.converged = true;
      break;
    }
    const StiffnessSolver& metric = rescue ? *rescue : P;
    const Vector d = metric.solve(r);
    const double dg = d.dot(r);
    if (!(dg > 0)) break;  // numerically flat

    // Armijo backtracking line search with a BB-style initial step.  Near the
    // floating-point resolution of the energy the sufficient-decrease test is
    // meaningless; there we accept on dual-residual decrease instead.
    const double floor = 1e-13 * (1 + std::abs(cur.energy));
    const double fallback_gate = 1e-9 * (1 + std::abs(cur.energy));
    double step = alpha;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vector trial_int = restrict_interior(grid, u.values()) - step * d;
      Vector trial_full = u.values();
      scatter_interior(grid, trial_int, trial_full);
      Assembled trial = assemble(problem, trial_full, &f_cells);
      bool ok = trial.energy <= cur.energy - 1e-4 * step * dg;
      Vector r_new;
      if (!ok && step * dg <= fallback_gate && trial.energy <= cur.energy + floor) {
        r_new = restrict_interior(grid, trial.grad);
        ok = P.dual_norm(r_new) <= 0.999 * res;
      }
      if (ok) {
        if (r_new.size() == 0) r_new = restrict_interior(grid, trial.grad);
        // BB1 step for the next iteration, from s = -step*d and y = g_new - g_old.
        const double dy = d.dot(r - r_new);
        const double bb = dy > 1e-12 * dg ? step * dg / dy : 10 * step;
        u.values() = std::move(trial_full);
        cur = std::move(trial);
        r = std::move(r_new);
        alpha = std::clamp(bb, 1e-8, 1e6);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // The fixed metric cannot resolve the degenerate p != 2 curvature down
      // to the tolerance; refactorize with the lagged linearized weights.
      if (problem.p() != 2 && rebuilds < 8) {
        const Vector w = internal::linearized_weights(problem, u.values());
        rescue = std::make_unique<StiffnessSolver>(grid, nullptr, &problem.A_cells(), &w);
        ++rebuilds;
        alpha = 1.0;
        continue;
      }
      break;
    }

    if (u.values().cwiseAbs().maxCoeff() > blowup_guard || cur.energy < -1e30)
      throw AnalysisError(
          "supercritical domain: unbounded descent direction in the Dirichlet energy");
  }

  report.solution = u;
  report.iterations = it;
  report.residual = P.dual_norm(r);
  report.converged = report.residual <= tol;
  report.energy = functional_J(u, f, problem);
  return report;
}

namespace {

NodalField default_eigen_seed(const GridPtr& grid) {
  const DomainBox& box = grid->box();
  NodalField u(grid);
  for (const Index i : grid->interior_nodes()) {
    const Point x = grid->node(i);
    double v = 1;
    for (int a = 0; a < box.dim; ++a) {
      const double t = (x[a] - box.lower[a]) / box.extent(a);
      v *= 4 * t * (1 - t);
    }
    u[i] = v;
  }
  return u;
}

}  // namespace

EigenReport principal_eigenpair(const ProblemSpec& problem, const EigenOptions& opts) {
  const Grid& grid = problem.grid();
  const double p = problem.p();
  const double tol = opts.tol.value_or(default_solve_tol(p));
  const StiffnessSolver& P = problem.stiffness();

  // Shift the potential so the quotient is nonnegative: V_M = V + M >= 1.
  const double M = std::max(0.0, -problem.V_cells().minCoeff()) + 1.0;
  const ProblemSpec shifted = problem.with_shifted_potential(
      Vector::Ones(problem.V_cells().size()), M);

  NodalField u = opts.warm_start ? *opts.warm_start : default_eigen_seed(problem.grid_ptr());
  u.enforce_zero_trace();
  if (u.values().cwiseAbs().maxCoeff() == 0) u = default_eigen_seed(problem.grid_ptr());

  auto normalize = [&](Vector& vals) {
    MassResult m = mass_and_grad(shifted, vals);
    if (!(m.mass > 0)) throw AnalysisError("eigen solver: degenerate normalization");
    vals /= std::pow(m.mass, 1.0 / p);
  };
  normalize(u.values());

  EigenReport report(u);
  report.shift = M;

  Assembled cur = assemble(shifted, u.values(), nullptr);
  MassResult mass = mass_and_grad(shifted, u.values());
  double lambda = cur.energy / mass.mass;
  Vector r = restrict_interior(grid, (cur.grad - lambda * mass.grad) / mass.mass);
  double alpha = 1.0;
  std::unique_ptr<StiffnessSolver> rescue;
  int rebuilds = 0;
  long it = 0;
  for (; it < opts.max_iter; ++it) {
    const double res = P.dual_norm(r);
    if (res <= tol) {
      report.converged = true;
      break;
    }
    const StiffnessSolver& metric = rescue ? *rescue : P;
    Vector d = metric.solve(r);
    const double dg = d.dot(r);
    if (!(dg > 0)) break;

    const double floor = 1e-13 * (1 + std::abs(lambda));
    const double fallback_gate = 1e-9 * (1 + std::abs(lambda));
    double step = alpha;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      Vector trial_full = u.values();
      Vector trial_int = restrict_interior(grid, trial_full) - step * d;
      scatter_interior(grid, trial_int, trial_full);
      MassResult tm = mass_and_grad(shifted, trial_full);
      if (tm.mass > 0) {
        trial_full /= std::pow(tm.mass, 1.0 / p);
        Assembled te = assemble(shifted, trial_full, nullptr);
        MassResult tm2 = mass_and_grad(shifted, trial_full);
        const double tlambda = te.energy / tm2.mass;
        Vector r_new;
        bool ok = tlambda <= lambda - 1e-4 * step * dg;
        if (!ok && step * dg <= fallback_gate && tlambda <= lambda + floor) {
          r_new = restrict_interior(grid, (te.grad - tlambda * tm2.grad) / tm2.mass);
          ok = P.dual_norm(r_new) <= 0.999 * res;
        }
        if (ok) {
          if (r_new.size() == 0)
            r_new = restrict_interior(grid, (te.grad - tlambda * tm2.grad) / tm2.mass);
          const double dy = d.dot(r - r_new);
          const double bb = dy > 1e-12 * dg ? step * dg / dy : 10 * step;
          u.values() = std::move(trial_full);
          cur = std::move(te);
          mass = std::move(tm2);
          lambda = tlambda;
          r = std::move(r_new);
          alpha = std::clamp(bb, 1e-8, 1e6);
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (problem.p() != 2 && rebuilds < 8) {
        const Vector w = internal::linearized_weights(shifted, u.values());
        rescue = std::make_unique<StiffnessSolver>(grid, nullptr, &problem.A_cells(), &w);
        ++rebuilds;
        alpha = 1.0;
        continue;
      }
      break;
    }
  }

  // Principal eigenfunctions have a sign; report the nonnegative one.
  if (u.values().minCoeff() < 0 && u.values().maxCoeff() <= 0) u.values() = -u.values();
  u.values() = u.values().cwiseMax(0.0);
  normalize(u.values());
  MassResult fm = mass_and_grad(shifted, u.values());
  Assembled fe = assemble(shifted, u.values(), nullptr);
  lambda = fe.energy / fm.mass;

  report.phi = u;
  report.lambda1 = lambda - M;
  report.iterations = it;
  report.residual = P.dual_norm(restrict_interior(grid, fe.grad - lambda * fm.grad));
  if (!report.converged) report.converged = report.residual <= tol;
  return report;
}

double rayleigh_quotient(const ProblemSpec& problem, const NodalField& u) {
  NodalField v = u;
  v.enforce_zero_trace();
  MassResult m = mass_and_grad(problem, v.values());
  if (!(m.mass > 0)) throw ValidationError("rayleigh quotient of a null field");
  return functional_Q(v, problem) / m.mass;
}

NodalField ring_source_field(const GridPtr& grid, const DomainBox& inner,
                             const DomainBox& outer) {
  const Point ci = inner.center();
  const Point co = outer.center();
  NodalField f(grid);
  for (Index i = 0; i < f.size(); ++i) {
    const Point x = grid->node(i);
    double s_in = 0, s_out = 0;
    for (int a = 0; a < grid->dim(); ++a) {
      s_in = std::max(s_in, std::abs(x[a] - ci[a]) / (0.5 * inner.extent(a)));
      s_out = std::max(s_out, std::abs(x[a] - co[a]) / (0.5 * outer.extent(a)));
    }
    const double v = std::max(0.0, s_in - 1.0) * std::max(0.0, 1.0 - s_out);
    f[i] = v * v;
  }
  const double peak = f.values().maxCoeff();
  if (peak <= 0)
    throw AnalysisError("ring source is empty: members too close for the grid");
  f.values() /= peak;
  return f;
}

AapReport positive_solution_aap(const ProblemFamily& family, const AapOptions& opts) {
  const Exhaustion& ex = family.exhaustion;
  const Point x0 = ex.anchor();
  const GridPtr& first = ex.member(0);

  AapReport report{NodalField(first)};
  std::optional<NodalField> prev;
  for (int k = 0; k < ex.count(); ++k) {
    ProblemSpec spec = family.member(k);
    EigenReport eig = principal_eigenpair(spec, opts.eigen);
    report.lambda1.push_back(eig.lambda1);
    if (!(eig.lambda1 > 0))
      throw AnalysisError("supercritical: lambda_1 <= 0 on exhaustion member " +
                          std::to_string(k) + " (functional not nonnegative)");

    // Source supported in Omega_k \ Omega_{k-1}; the first member uses the
    // outer half-ring of its own box.
    DomainBox inner = k == 0 ? ex.member(0)->box() : ex.member(k - 1)->box();
    if (k == 0) {
      const Point c = inner.center();
      for (int a = 0; a < inner.dim; ++a) {
        const double half = 0.25 * inner.extent(a);
        inner.lower[a] = c[a] - half;
        inner.upper[a] = c[a] + half;
      }
    }
    const NodalField ffield = ring_source_field(spec.grid_ptr(), inner, spec.grid().box());

    NodalField warm(spec.grid_ptr());
    SolveOptions sopts = opts.solve;
    if (prev) {
      for (const Index i : spec.grid().interior_nodes()) {
        const Point x = spec.grid().node(i);
        if (prev->grid().box().contains(x)) warm[i] = prev->sample(x);
      }
      sopts.warm_start = &warm;
    }
    SolveReport sol = solve_dirichlet(spec, ffield, NodalField(spec.grid_ptr()), sopts);
    if (!sol.converged)
      throw AnalysisError("positive_solution_aap: member solve did not converge");
    const double v0 = sol.solution.sample(x0);
    if (!(v0 > 0))
      throw AnalysisError("positive_solution_aap: solution not positive at the anchor");
    sol.solution.values() /= v0;

    report.members_used = k + 1;
    if (prev) {
      double gap = 0;
      for (Index i = 0; i < first->num_nodes(); ++i) {
        const Point x = first->node(i);
        gap = std::max(gap, std::abs(sol.solution.sample(x) - prev->sample(x)));
      }
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

SubsolutionReport truncate_subsolution(const NodalField& v, const ProblemSpec& problem,
                                       double tol) {
  const double scale = 1 + v.values().cwiseAbs().maxCoeff();
  Vector r = el_pairing(problem, v);
  SubsolutionReport report{v, r.size() ? r.maxCoeff() : 0.0, 0.0};
  if (report.margin_before > tol * scale)
    throw ValidationError("truncate_subsolution: input is not a subsolution (margin " +
                          std::to_string(report.margin_before) + ")");
  NodalField vp(v.grid_ptr(), v.values().cwiseMax(0.0));
  Vector r2 = el_pairing(problem, vp);
  report.truncated = vp;
  report.margin_after = r2.size() ? r2.maxCoeff() : 0.0;
  if (report.margin_after > tol * scale)
    throw AnalysisError("truncate_subsolution: truncation failed the subsolution check");
  return report;
}

}  // namespace pacrit
