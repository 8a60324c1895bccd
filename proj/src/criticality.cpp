#include "pacrit/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "internal.hpp"

namespace pacrit {

using internal::Assembled;
using internal::assemble;
using internal::restrict_interior;
using internal::restrict_to;
using internal::sample_onto;
using internal::scatter_interior;
using internal::scatter_to;
using internal::weighted_mass_and_grad;

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Subcritical: return "subcritical";
    case Verdict::Critical: return "critical";
    case Verdict::Supercritical: return "supercritical";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

CapacityReport capacity(const std::vector<Index>& K, const ProblemSpec& problem,
                        const CapacityOptions& opts) {
  const Grid& grid = problem.grid();
  for (const Index i : K) {
    if (!grid.is_interior(i))
      throw ValidationError("capacity: K must consist of interior nodes");
  }
  CapacityReport report{NodalField(problem.grid_ptr())};
  if (K.empty()) {
    report.converged = true;
    return report;  // phi = 0 is admissible and optimal
  }
  if (opts.check_lambda1) {
    EigenReport eig = principal_eigenpair(problem);
    if (eig.lambda1 < -1e-7 * (1 + std::abs(eig.shift)))
      throw AnalysisError("capacity undefined: lambda_1 < 0 on the grid");
  }

  const double tol = opts.tol.value_or(default_solve_tol(problem.p()));

  NodalField u(problem.grid_ptr());
  if (opts.warm_start) {
    for (const Index i : grid.interior_nodes()) u[i] = (*opts.warm_start)[i];
  }
  auto project = [&](Vector& vals) {
    for (const Index i : K) vals[i] = std::max(vals[i], 1.0);
  };
  project(u.values());
  long it = 0;

  // Descent on the free nodes with the obstacle enforced by clamping on K.
  // The metric pins K, so clamped components never pollute the line search;
  // nodes the obstacle releases (negative multiplier) are freed and the
  // containing metric rebuilt.
  std::vector<char> active(static_cast<std::size_t>(grid.num_nodes()), 0);
  for (const Index i : K) active[static_cast<std::size_t>(i)] = 1;
  auto kkt_residual = [&](const Vector& grad_full, const Vector& vals) {
    // Free components of the gradient, plus wrong-signed multipliers on the
    // clamped set.
    Vector pg = grad_full;
    for (const Index i : K) {
      if (vals[i] <= 1.0 + 1e-12 && pg[i] > 0) pg[i] = 0;
    }
    return restrict_interior(grid, pg);
  };

  for (int phase = 0; phase < 8 && !report.converged; ++phase) {
    std::vector<Index> pinned;
    for (const Index i : K) {
      if (active[static_cast<std::size_t>(i)]) pinned.push_back(i);
    }
    const StiffnessSolver P(grid, &pinned);
    std::unique_ptr<StiffnessSolver> rescue;
    int rebuilds = 0;
    const auto& dofs = P.dofs();

    Assembled cur = assemble(problem, u.values(), nullptr);
    Vector r = restrict_to(dofs, cur.grad);
    double alpha = 1.0;
    for (; it < opts.max_iter; ++it) {
      const double res = P.dual_norm(r);
      if (res <= tol) break;
      const StiffnessSolver& metric = rescue ? *rescue : P;
      const Vector d = metric.solve(r);
      const double dg = d.dot(r);
      if (!(dg > 0)) break;

      const double floor = 1e-13 * (1 + std::abs(cur.energy));
      const double fallback_gate = 1e-9 * (1 + std::abs(cur.energy));
      double step = alpha;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        Vector trial = u.values();
        Vector ti = restrict_to(dofs, trial) - step * d;
        scatter_to(dofs, ti, trial);
        project(trial);
        Assembled te = assemble(problem, trial, nullptr);
        bool ok = te.energy <= cur.energy - 1e-4 * step * dg;
        Vector r_new;
        if (!ok && step * dg <= fallback_gate && te.energy <= cur.energy + floor) {
          r_new = restrict_to(dofs, te.grad);
          ok = P.dual_norm(r_new) <= 0.999 * res;
        }
        if (ok) {
          if (r_new.size() == 0) r_new = restrict_to(dofs, te.grad);
          const double dy = d.dot(r - r_new);
          const double bb = dy > 1e-12 * dg ? step * dg / dy : 10 * step;
          u.values() = std::move(trial);
          cur = std::move(te);
          r = std::move(r_new);
          alpha = std::clamp(bb, 1e-8, 1e6);
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        if (problem.p() != 2 && rebuilds < 8) {
          const Vector w = internal::linearized_weights(problem, u.values());
          rescue = std::make_unique<StiffnessSolver>(grid, &pinned, &problem.A_cells(), &w);
          ++rebuilds;
          alpha = 1.0;
          continue;
        }
        break;
      }
    }

    // KKT check on the full system; release constraints with negative
    // multipliers (the obstacle solution sits above 1 there).
    Assembled fin = assemble(problem, u.values(), nullptr);
    const double kkt = problem.stiffness().dual_norm(kkt_residual(fin.grad, u.values()));
    if (kkt <= tol) {
      report.converged = true;
      break;
    }
    bool released = false;
    for (const Index i : K) {
      if (active[static_cast<std::size_t>(i)] && u[i] <= 1.0 + 1e-12 && fin.grad[i] < 0) {
        active[static_cast<std::size_t>(i)] = 0;
        released = true;
      }
    }
    if (!released) break;
  }

  report.minimizer = u;
  report.iterations = it;
  report.value = std::max(0.0, functional_Q(u, problem));
  return report;
}

SequenceFit fit_inverse_log(const std::vector<double>& scales,
                            const std::vector<double>& values) {
  SequenceFit fit;
  const std::size_t n = values.size();
  if (n < 3 || scales.size() != n) return fit;
  // Without substantial scale growth any smooth decreasing sequence fits an
  // affine 1/value law; require at least two doublings.
  if (scales.back() < 3.9 * scales.front()) return fit;
  for (const double v : values) {
    if (!(v > 0)) return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(scales[i]);
    const double y = 1.0 / values[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (denom <= 0) return fit;
  fit.slope = (nn * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / nn;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = 1.0 / (fit.slope * std::log(scales[i]) + fit.intercept);
    if (!(pred > 0)) return fit;
    fit.max_rel_residual =
        std::max(fit.max_rel_residual, std::abs(pred - values[i]) / values[i]);
  }
  fit.valid = true;
  return fit;
}

namespace {

double member_scale(const Grid& g, const Point& anchor) {
  double s = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    s = std::min(s, g.box().upper[a] - anchor[a]);
    s = std::min(s, anchor[a] - g.box().lower[a]);
  }
  return s;
}

bool strictly_decreasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (!(v[i + 1] < v[i] + slack)) return false;
  }
  return v.size() >= 2 && v.back() < v.front();
}

double tail_spread(const std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t k = std::min<std::size_t>(3, n);
  double lo = std::numeric_limits<double>::infinity(), hi = 0, sum = 0;
  for (std::size_t i = n - k; i < n; ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
    sum += v[i];
  }
  const double mid = sum / static_cast<double>(k);
  return mid > 0 ? (hi - lo) / mid : std::numeric_limits<double>::infinity();
}

// Decay evidence for the critical verdict: strictly decreasing plus a
// well-fitted 1/log R law over a growing exhaustion.
bool decays_by_fit(const std::vector<double>& seq, const SequenceFit& fit,
                   const ClassifyOptions& opts) {
  if (!strictly_decreasing(seq, 1e-12)) return false;
  if (!(seq.front() > 0) || !(seq.back() >= 0)) return false;
  const double total = seq.back() > 0 ? seq.front() / seq.back()
                                      : std::numeric_limits<double>::infinity();
  return fit.valid && total >= opts.decay_factor && fit.slope > 0 &&
         fit.max_rel_residual <= opts.fit_rel_tol;
}

// Fallback decay evidence when the member scales do not grow (bounded base
// domains): a strong raw drop with no sign of a floor.
bool decays_strongly(const std::vector<double>& seq, const ClassifyOptions& opts) {
  if (!strictly_decreasing(seq, 1e-12)) return false;
  if (!(seq.front() > 0)) return false;
  const double total = seq.back() > 0 ? seq.front() / seq.back()
                                      : std::numeric_limits<double>::infinity();
  return total >= opts.strong_decay_factor;
}

void check_probe_weight(const ProblemFamily& family, const CoefficientField& W) {
  if (W.kind() != FieldKind::Scalar)
    throw ValidationError("probe weight W must be a scalar field");
  const Grid& first = *family.exhaustion.member(0);
  const Vector w0 = cells_from_expr(first, W);
  if (w0.minCoeff() < -1e-12) throw ValidationError("probe weight W must be nonnegative");
  if (w0.maxCoeff() <= 0) throw ValidationError("probe weight W must be nonzero");
  const Grid& last = *family.exhaustion.member(family.count() - 1);
  const Vector wl = cells_from_expr(last, W);
  const auto& cells = last.active_cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Point x = last.cell_center(cells[k]);
    if (!first.box().contains(x) && std::abs(wl[static_cast<Index>(k)]) > 1e-12)
      throw ValidationError("probe weight W must be supported in the first member");
  }
}

}  // namespace

double bisect_critical_t(const ProblemSpec& problem, const Vector& W_cells,
                         const ClassifyOptions& opts) {
  if (W_cells.minCoeff() < -1e-12 || W_cells.maxCoeff() <= 0)
    throw ValidationError("bisect_critical_t: W must be nonnegative and nonzero");
  EigenOptions eopts = opts.eigen;
  EigenReport eig = principal_eigenpair(problem, eopts);
  if (eig.lambda1 <= 0) return 0.0;  // already at (or past) the critical point

  NodalField warm = eig.phi;
  auto lambda_at = [&](double t) {
    EigenOptions w = opts.eigen;
    w.warm_start = &warm;
    EigenReport e = principal_eigenpair(problem.with_shifted_potential(W_cells, -t), w);
    warm = e.phi;
    return e.lambda1;
  };

  double lo = 0, hi = 1;
  double lam_hi = lambda_at(hi);
  int guard = 0;
  while (lam_hi > 0) {
    lo = hi;
    hi *= 2;
    lam_hi = lambda_at(hi);
    if (++guard > 60)
      throw AnalysisError("bisect_critical_t: no sign change found while doubling t");
  }
  for (int step = 0; step < opts.tn_bisect_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if ((hi - lo) <= opts.tn_rel_tol * mid) break;
    if (lambda_at(mid) > 0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

CriticalityReport classify(const ProblemFamily& family, const CoefficientField& W,
                           const BallSpec& capacity_ball, const ClassifyOptions& opts) {
  if (family.count() < 3)
    throw ValidationError("classify: exhaustion too short for a trend fit (need >= 3 members)");
  check_probe_weight(family, W);
  if (!family.exhaustion.member(0)->box().contains(capacity_ball.center,
                                                    capacity_ball.radius))
    throw ValidationError("classify: capacity ball must lie inside the first member");

  CriticalityReport report;
  report.notes.push_back(
      "decay/floor thresholds are desk-scale conventions: critical needs a fitted "
      "1/log-R decay (or a strong observed drop), subcritical a stable positive floor");

  const Point anchor = family.exhaustion.anchor();
  std::vector<ProblemSpec> specs;
  std::vector<NodalField> phis;
  for (int k = 0; k < family.count(); ++k) {
    specs.push_back(family.member(k));
    report.member_scale.push_back(member_scale(specs.back().grid(), anchor));
    EigenOptions eopts = opts.eigen;
    NodalField warm{specs.back().grid_ptr()};
    if (!phis.empty()) {
      warm = sample_onto(phis.back(), specs.back().grid_ptr());
      eopts.warm_start = &warm;
    }
    EigenReport eig = principal_eigenpair(specs.back(), eopts);
    if (!eig.converged)
      throw AnalysisError("classify: eigen solve did not converge on member " +
                          std::to_string(k));
    report.lambda1.push_back(eig.lambda1);
    phis.push_back(eig.phi);
  }

  for (std::size_t k = 0; k < report.lambda1.size(); ++k) {
    if (report.lambda1[k] < -opts.supercritical_tol) {
      report.verdict = Verdict::Supercritical;
      report.notes.push_back("lambda_1(Omega_" + std::to_string(k) +
                             ") = " + std::to_string(report.lambda1[k]) + " < 0");
      return report;
    }
  }

  // Capacity of the fixed ball and critical-t thresholds per member.
  std::optional<NodalField> cap_warm;
  for (int k = 0; k < family.count(); ++k) {
    const auto K = specs[static_cast<std::size_t>(k)].grid().nodes_in_ball(
        capacity_ball.center, capacity_ball.radius);
    if (K.empty())
      throw ValidationError("classify: capacity ball contains no grid nodes");
    CapacityOptions copts = opts.capacity;
    copts.check_lambda1 = false;  // lambda_1 >= -tol established above
    NodalField warm{specs[static_cast<std::size_t>(k)].grid_ptr()};
    if (cap_warm) {
      warm = sample_onto(*cap_warm, specs[static_cast<std::size_t>(k)].grid_ptr());
      copts.warm_start = &warm;
    }
    CapacityReport cap = capacity(K, specs[static_cast<std::size_t>(k)], copts);
    if (!cap.converged)
      throw AnalysisError("classify: capacity solve did not converge on member " +
                          std::to_string(k));
    report.cap.push_back(cap.value);
    cap_warm = cap.minimizer;

    const Vector W_cells = cells_from_expr(specs[static_cast<std::size_t>(k)].grid(), W);
    report.tN.push_back(bisect_critical_t(specs[static_cast<std::size_t>(k)], W_cells, opts));
  }

  report.cap_fit = fit_inverse_log(report.member_scale, report.cap);
  report.tn_fit = fit_inverse_log(report.member_scale, report.tN);

  if (decays_by_fit(report.cap, report.cap_fit, opts) &&
      decays_by_fit(report.tN, report.tn_fit, opts)) {
    report.verdict = Verdict::Critical;
    report.notes.push_back("capacity and t_N follow a fitted 1/log-R decay");
    return report;
  }
  const double spread = tail_spread(report.cap);
  if (report.cap.back() > 0 && spread <= opts.floor_spread) {
    report.verdict = Verdict::Subcritical;
    report.notes.push_back("capacity stabilized at a positive floor (tail spread " +
                           std::to_string(spread) + ")");
    return report;
  }
  if (decays_strongly(report.cap, opts) && decays_strongly(report.tN, opts)) {
    report.verdict = Verdict::Critical;
    report.notes.push_back("capacity and t_N collapsed by more than the strong-decay factor");
    return report;
  }
  report.verdict = Verdict::Inconclusive;
  report.notes.push_back("sequences neither decay cleanly nor stabilize: capacity spread " +
                         std::to_string(spread));
  return report;
}

CriticalityReport classify(const ProblemFamily& family, const BallSpec& probe,
                           const ClassifyOptions& opts) {
  const CoefficientField W =
      bump_field(probe.center, probe.radius, family.exhaustion.base().dim);
  return classify(family, W, probe, opts);
}

PerturbationScan perturbation_threshold(const ProblemFamily& family, const CoefficientField& V0,
                                        const PerturbOptions& opts) {
  if (V0.kind() != FieldKind::Scalar)
    throw ValidationError("perturbation potential V0 must be a scalar field");
  const ProblemSpec spec = family.member(family.count() - 1);
  const Grid& grid = spec.grid();
  const Vector v0 = cells_from_expr(grid, V0);
  if (v0.cwiseAbs().maxCoeff() <= 0)
    throw ValidationError("perturbation potential V0 must be nonzero");
  const DomainBox& first_box = family.exhaustion.member(0)->box();
  const auto& cells = grid.active_cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!first_box.contains(grid.cell_center(cells[k])) &&
        std::abs(v0[static_cast<Index>(k)]) > 1e-12)
      throw ValidationError("V0 must be compactly supported in the first member");
  }

  PerturbationScan scan;
  EigenReport base = principal_eigenpair(spec, opts.eigen);
  scan.base_lambda = base.lambda1;
  scan.history.emplace_back(0.0, base.lambda1);
  if (!(base.lambda1 > 0))
    throw ValidationError("perturbation_threshold: base problem is not subcritical");

  if (v0.minCoeff() >= -1e-12) {
    // V0 >= 0: adding it only improves the functional; tau_+ = +infinity.
    scan.tau_plus_infinite = true;
    return scan;
  }

  NodalField warm = base.phi;
  auto lambda_at = [&](double tau) {
    EigenOptions w = opts.eigen;
    w.warm_start = &warm;
    EigenReport e = principal_eigenpair(spec.with_shifted_potential(v0, tau), w);
    warm = e.phi;
    scan.history.emplace_back(tau, e.lambda1);
    return e.lambda1;
  };

  double lo = 0, hi = 1;
  double lam = lambda_at(hi);
  int guard = 0;
  while (lam > 0) {
    lo = hi;
    hi *= 2;
    lam = lambda_at(hi);
    if (++guard > 60)
      throw AnalysisError("perturbation_threshold: verdict never flipped while doubling tau");
  }
  const double zero_tol = opts.lambda_zero_rel_tol * std::abs(scan.base_lambda);
  for (int step = 0; step < opts.bisect_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double l = lambda_at(mid);
    if (std::abs(l) <= 0.25 * zero_tol) {
      lo = hi = mid;
      break;
    }
    if (l > 0) lo = mid;
    else hi = mid;
  }
  scan.tau_plus = 0.5 * (lo + hi);
  scan.lambda_at_tau_plus = lambda_at(scan.tau_plus);

  // Finite probe for tau_-; it may be -infinity, so only a bound is reported.
  warm = base.phi;
  double tau = -1;
  scan.tau_minus_probed_down_to = tau;
  while (tau >= -opts.tau_minus_probe_limit) {
    const double l = lambda_at(tau);
    scan.tau_minus_probed_down_to = tau;
    if (l < 0) {
      double nlo = tau, nhi = tau / 2;  // lambda(nhi) > 0 >= lambda(nlo)
      for (int step = 0; step < 30; ++step) {
        const double mid = 0.5 * (nlo + nhi);
        if (lambda_at(mid) < 0) nlo = mid;
        else nhi = mid;
      }
      scan.tau_minus = 0.5 * (nlo + nhi);
      break;
    }
    tau *= 2;
  }
  return scan;
}

GroundStateReport ground_state(const ProblemFamily& family, const CoefficientField& W,
                               const BallSpec& capacity_ball,
                               const GroundStateOptions& opts) {
  if (!opts.override_critical_check) {
    CriticalityReport cls = classify(family, W, capacity_ball, opts.classify);
    if (cls.verdict != Verdict::Critical)
      throw ValidationError("ground_state: classify verdict is " + to_string(cls.verdict) +
                            ", not critical (use the override to force)");
  }
  check_probe_weight(family, W);

  const Point anchor = family.exhaustion.anchor();
  const GridPtr& first = family.exhaustion.member(0);
  GroundStateReport report{NodalField(first)};
  std::optional<NodalField> prev;
  for (int k = 0; k < family.count(); ++k) {
    const ProblemSpec spec = family.member(k);
    const Vector W_cells = cells_from_expr(spec.grid(), W);
    const double t = bisect_critical_t(spec, W_cells, opts.classify);
    if (!report.tN.empty() && t > report.tN.back() * (1 + opts.classify.tn_rel_tol * 10))
      throw AnalysisError("ground_state: t_N increased along the exhaustion, "
                          "inconsistent with criticality");
    report.tN.push_back(t);

    EigenOptions eopts = opts.classify.eigen;
    NodalField warm{spec.grid_ptr()};
    if (prev) {
      warm = sample_onto(*prev, spec.grid_ptr());
      eopts.warm_start = &warm;
    }
    EigenReport eig = principal_eigenpair(spec.with_shifted_potential(W_cells, -t), eopts);
    const double v0 = eig.phi.sample(anchor);
    if (!(v0 > 0))
      throw AnalysisError("ground_state: eigenfunction vanishes at the anchor");
    eig.phi.values() /= v0;

    report.members_used = k + 1;
    if (prev) {
      double gap = 0;
      for (Index i = 0; i < first->num_nodes(); ++i) {
        const Point x = first->node(i);
        gap = std::max(gap, std::abs(eig.phi.sample(x) - prev->sample(x)));
      }
      report.gaps.push_back(gap);
      if (gap <= opts.stabilize_tol) {
        report.state = eig.phi;
        report.stabilized = true;
        return report;
      }
    }
    prev = eig.phi;
    report.state = *prev;
  }
  report.stabilized = false;
  return report;
}

GroundStateReport ground_state(const ProblemFamily& family, const BallSpec& probe,
                               const GroundStateOptions& opts) {
  const CoefficientField W =
      bump_field(probe.center, probe.radius, family.exhaustion.base().dim);
  return ground_state(family, W, probe, opts);
}

PoincareReport poincare_constant(const ProblemSpec& problem, const NodalField& phi,
                                 const NodalField& psi, const CoefficientField& W,
                                 const PoincareOptions& opts) {
  const Grid& grid = problem.grid();
  const double p = problem.p();
  const Vector W_cells = cells_from_expr(grid, W);
  if (W_cells.minCoeff() < -1e-12 || W_cells.maxCoeff() <= 0)
    throw ValidationError("poincare_constant: weight W must be nonnegative and nonzero");

  const Vector psi_cells = cell_values(psi);
  {
    const Vector phi_cells = cell_values(phi);
    const double pairing = integrate(phi_cells.cwiseProduct(psi_cells), grid);
    if (std::abs(pairing) < opts.pairing_tol)
      throw ValidationError("poincare_constant: int psi phi is too close to zero");
  }

  PoincareReport report;
  auto implied_C = [&](const NodalField& trial) {
    NodalField t = trial;
    t.enforce_zero_trace();
    const Vector tc = cell_values(t);
    const double q = std::max(0.0, functional_Q(t, problem));
    const double a = std::pow(std::abs(integrate(tc.cwiseProduct(psi_cells), grid)), p);
    Vector wphi(tc.size());
    for (Index k = 0; k < tc.size(); ++k)
      wphi[k] = W_cells[k] * std::pow(std::abs(tc[k]), p);
    const double b = integrate(wphi, grid);
    if (b <= 0) return 0.0;
    if (q > 0) report.worst_quotient = std::max(report.worst_quotient, b / q);
    if (a > 0) return (-q + std::sqrt(q * q + 4 * a * b)) / (2 * a);
    if (q > 0) return b / q;
    throw AnalysisError("poincare_constant: trial with Q = 0 and zero psi-pairing");
  };

  double C = implied_C(phi);
  ++report.trials;
  std::mt19937_64 rng(opts.seed);
  for (int t = 0; t < opts.battery; ++t) {
    NodalField trial = internal::random_smooth_field(problem, rng());
    C = std::max(C, implied_C(trial));
    ++report.trials;
    // Adversarial trials near the ground state.
    NodalField mix = trial;
    const double delta = std::pow(10.0, -1 - (t % 3));
    mix.values() = phi.values() + delta * trial.values();
    C = std::max(C, implied_C(mix));
    ++report.trials;
  }
  report.constant = C;
  return report;
}

HsmReport hsm_ratio(const ProblemSpec& problem, const CoefficientField& Wtilde,
                    const HsmOptions& opts) {
  const Grid& grid = problem.grid();
  const int n = grid.dim();
  const double p = problem.p();
  if (!(p < n))
    throw ValidationError("hsm_ratio requires p < n (critical Sobolev exponent undefined)");
  const double pstar = p * n / (n - p);
  const Vector W_cells = cells_from_expr(grid, Wtilde);
  if (W_cells.minCoeff() <= 0)
    throw ValidationError("hsm_ratio: weight must be strictly positive");

  auto ratio_of = [&](const Vector& vals) {
    const auto m = weighted_mass_and_grad(problem, vals, pstar, &W_cells);
    if (!(m.mass > 0)) return std::numeric_limits<double>::infinity();
    Assembled e = assemble(problem, vals, nullptr);
    return e.energy / std::pow(m.mass, p / pstar);
  };

  HsmReport report;
  report.ratio = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(opts.seed);
  Vector best;
  for (int t = 0; t < opts.battery; ++t) {
    NodalField trial = internal::random_smooth_field(problem, rng());
    const double r = ratio_of(trial.values());
    ++report.trials;
    if (r < report.ratio) {
      report.ratio = r;
      best = trial.values();
    }
  }

  // Polish the best trial by preconditioned descent on the scale-invariant ratio.
  const StiffnessSolver& P = problem.stiffness();
  Vector u = best;
  double cur = report.ratio;
  double alpha = 1.0;
  for (long it = 0; it < opts.polish_iters; ++it) {
    Assembled e = assemble(problem, u, nullptr);
    const auto m = weighted_mass_and_grad(problem, u, pstar, &W_cells);
    const double mp = std::pow(m.mass, p / pstar);
    Vector grad = e.grad / mp -
                  (p / pstar) * (e.energy / mp / m.mass) * m.grad;
    Vector r = restrict_interior(grid, grad);
    if (P.dual_norm(r) <= 1e-10 * (1 + std::abs(cur))) break;
    Vector d = P.solve(r);
    const double dg = d.dot(r);
    if (!(dg > 0)) break;
    double step = alpha;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vector trial = u;
      Vector ti = restrict_interior(grid, trial) - step * d;
      scatter_interior(grid, ti, trial);
      const double tr = ratio_of(trial);
      if (tr < cur) {
        u = std::move(trial);
        cur = tr;
        alpha = step * 2;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  report.ratio = std::min(report.ratio, cur);
  return report;
}

}  // namespace pacrit
