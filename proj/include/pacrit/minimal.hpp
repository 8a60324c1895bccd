#ifndef PACRIT_MINIMAL_HPP
#define PACRIT_MINIMAL_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pacrit/criticality.hpp"
#include "pacrit/solve.hpp"

namespace pacrit {

struct MinimalGrowthOptions {
  double stabilize_tol = 1e-3;   // max-norm agreement on the first member
  double monotone_tol = 1e-6;    // allowed nodewise decrease between members
  SolveOptions solve;
  EigenOptions eigen;
};

struct MinimalGrowthReport {
  NodalField solution;             // on the last member used
  std::vector<double> lambda1;     // on each punctured member
  std::vector<double> gaps;
  double monotone_margin = 0;      // most negative u_{N+1} - u_N seen
  bool stabilized = false;
  int members_used = 0;

  explicit MinimalGrowthReport(NodalField f) : solution(std::move(f)) {}
};

/// Positive solution of minimal growth u^K: solve Q(u) = 0 on Omega_N \ K
/// with u = data on the ring around K and u = 0 on the outer boundary, for
/// each member; the sequence must be nodewise nondecreasing and its
/// stabilized limit is returned.  K is the closed ball `hole`; `data` is
/// evaluated on the ring nodes.
MinimalGrowthReport minimal_growth_solution(const ProblemFamily& family, const BallSpec& hole,
                                            const CoefficientField& data,
                                            const MinimalGrowthOptions& opts = {});

enum class SingularityModel { PowerLaw, Logarithmic };

struct ExponentFit {
  double value = 0;  // power-law exponent, or the coefficient of -log r
  double r2 = 0;
  int shells = 0;
  std::vector<std::pair<double, double>> profile;  // (radius, shell mean)
  std::string classification;  // removable | nonremovable | inconclusive
};

/// Least-squares fit of the near-singularity profile of a positive field in
/// shells r in [rmin, rmax] around x0:  log u vs log r for the power-law
/// model, u vs -log r for the logarithmic one.  Classification: bounded
/// profiles (max/median below `removable_ratio`) are removable; profiles
/// diverging consistently with the fitted model are nonremovable.
ExponentFit singularity_exponent(const NodalField& u, const Point& x0, double rmin,
                                 double rmax, SingularityModel model,
                                 double removable_ratio = 3.0);

struct GreenOptions {
  int fit_min_shells = 6;
  double stabilize_tol = 1e-2;  // relative agreement on the fit window
  SolveOptions solve;
  EigenOptions eigen;
};

struct GreenReport {
  NodalField field;  // normalized to 1 at x1, on the last member used
  Point x0 = Point::Zero();
  Point x1 = Point::Zero();
  ExponentFit fit;
  SingularityModel model = SingularityModel::PowerLaw;
  std::vector<double> source_radius;  // inner annulus radius per member
  std::vector<double> gaps;
  bool stabilized = false;
  int members_used = 0;

  explicit GreenReport(NodalField f) : field(std::move(f)) {}
};

/// Minimal positive Green function candidate: per member solve with an
/// annular bump source around x0 whose radius shrinks on a geometric
/// schedule (floored at 2h so the annulus stays resolved), normalize to 1
/// at x1, and fit the near-field profile on [4h, quarter of the first
/// member].  The model is logarithmic for p = n and power-law otherwise.
GreenReport green_function(const ProblemFamily& family, const Point& x0, const Point& x1,
                           const GreenOptions& opts = {});

struct LiouvilleInput {
  ProblemSpec problem0;  // candidate: (A0, V0) with subsolution psi
  ProblemSpec problem1;  // reference: (A1, V1) with ground state phi
  NodalField psi;
  NodalField phi;
  double M = 1;
  double N = 1;
};

struct LiouvilleCondition {
  bool pass = false;
  std::string detail;  // witness point / margin description
};

struct LiouvilleReport {
  LiouvilleCondition ground_state;     // (i)   phi > 0 solves problem1
  LiouvilleCondition subsolution;      // (ii)  psi_+ != 0, psi subsolution of problem0
  LiouvilleCondition matrix_bound;     // (iii) psi_+^2 A0 <= M^2 phi^2 A1
  LiouvilleCondition gradient_bound;   // (iv)  |grad psi|_{A0}^{p-2} <= N^{p-2}|grad phi|_{A1}^{p-2}
  bool certified = false;
  std::string conclusion;
};

/// Numerical verifier of the Liouville comparison conditions; all four pass
/// means "criticality of problem0 certified (desk scale)".
LiouvilleReport liouville_check(const LiouvilleInput& input);

}  // namespace pacrit

#endif
