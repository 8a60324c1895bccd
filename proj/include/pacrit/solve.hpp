#ifndef PACRIT_SOLVE_HPP
#define PACRIT_SOLVE_HPP

#include <optional>
#include <vector>

#include "pacrit/energy.hpp"
#include "pacrit/field.hpp"
#include "pacrit/problem.hpp"

namespace pacrit {

/// Dual-residual tolerance defaults: 1e-8 for p >= 2, 1e-6 for p < 2.
double default_solve_tol(double p);

struct SolveOptions {
  std::optional<double> tol;
  long max_iter = 100000;
  const NodalField* warm_start = nullptr;  // interior values used as initial guess
};

struct SolveReport {
  NodalField solution;
  double energy = 0;    // J_f at the minimizer (unregularized)
  double residual = 0;  // Euler-Lagrange residual in the dual norm
  long iterations = 0;
  bool converged = false;
};

/// Minimize J_f(u) = int(|grad u|_A^p + V|u|^p - p f u) over fields equal to g
/// on the boundary.  Requires lambda_1 > 0 on the grid (asserted by the
/// caller); an unbounded descent direction is reported as a supercritical
/// domain error.
SolveReport solve_dirichlet(const ProblemSpec& problem, const NodalField& f,
                            const NodalField& g, const SolveOptions& opts = {});

struct EigenOptions {
  std::optional<double> tol;
  long max_iter = 100000;
  const NodalField* warm_start = nullptr;
};

struct EigenReport {
  double lambda1 = 0;
  NodalField phi;       // nonnegative, int |phi|^p = 1
  double shift = 0;     // M used to make V + M >= 1
  double residual = 0;  // dual-norm residual of the eigen system
  long iterations = 0;
  bool converged = false;

  explicit EigenReport(NodalField f) : phi(std::move(f)) {}
};

/// Principal eigenpair by minimizing the M-shifted Rayleigh quotient with
/// projected, preconditioned, normalized gradient descent.
EigenReport principal_eigenpair(const ProblemSpec& problem, const EigenOptions& opts = {});

/// Q(u) / int |u|^p for a zero-trace field.
double rayleigh_quotient(const ProblemSpec& problem, const NodalField& u);

/// Interior components of the discrete Euler-Lagrange pairing <Q(u), hat_i>
/// (for lambda != 0, of <Q(u) - lambda |u|^{p-2}u, hat_i>).
Vector el_pairing(const ProblemSpec& problem, const NodalField& u, double lambda = 0);
/// Dual norm of the above, measured through the stiffness preconditioner.
double el_residual(const ProblemSpec& problem, const NodalField& u, double lambda = 0);

struct AapOptions {
  double stabilize_tol = 1e-4;  // max-norm agreement on the first member
  SolveOptions solve;
  EigenOptions eigen;
};

struct AapReport {
  NodalField solution;              // on the last member used, value 1 at x0
  std::vector<double> lambda1;      // per member
  std::vector<double> gaps;         // successive max-norm differences
  bool stabilized = false;
  int members_used = 0;

  explicit AapReport(NodalField f) : solution(std::move(f)) {}
};

/// Exhaustion construction of a positive solution of Q(u) = 0: solve
/// Q(u) = f_N with f_N >= 0 supported in Omega_N \ Omega_{N-1}, normalize
/// u(x0) = 1, stop when successive members agree on the first member grid.
/// Throws AnalysisError("supercritical...") if some lambda_1(Omega_N) <= 0.
AapReport positive_solution_aap(const ProblemFamily& family, const AapOptions& opts = {});

struct SubsolutionReport {
  NodalField truncated;
  double margin_before = 0;  // largest EL pairing of the input
  double margin_after = 0;   // largest EL pairing of max(v, 0)
};

/// Verify v is a (weak, discrete) subsolution, truncate to v_+ = max(v,0),
/// and re-verify.  The acceptance tolerance is tol * (1 + max|v|).
SubsolutionReport truncate_subsolution(const NodalField& v, const ProblemSpec& problem,
                                       double tol = 1e-8);

/// Smooth nonnegative source with unit peak supported in the box-metric ring
/// between two nested boxes, as a nodal field on grid.
NodalField ring_source_field(const GridPtr& grid, const DomainBox& inner,
                             const DomainBox& outer);

}  // namespace pacrit

#endif
