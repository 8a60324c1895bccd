#ifndef PACRIT_CRITICALITY_HPP
#define PACRIT_CRITICALITY_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pacrit/solve.hpp"

namespace pacrit {

enum class Verdict { Subcritical, Critical, Supercritical, Inconclusive };
std::string to_string(Verdict v);

/// A ball, used for probe weights, capacity compacts and source supports.
struct BallSpec {
  Point center = Point::Zero();
  double radius = 0.5;
};

struct CapacityOptions {
  std::optional<double> tol;  // projected-gradient dual tolerance
  long max_iter = 100000;
  bool check_lambda1 = true;  // verify Q >= 0 on the grid first
  const NodalField* warm_start = nullptr;
};

struct CapacityReport {
  double value = 0;
  NodalField minimizer;
  long iterations = 0;
  bool converged = false;

  explicit CapacityReport(NodalField f) : minimizer(std::move(f)) {}
};

/// Q-capacity of the node set K: minimize Q(phi) over zero-trace fields with
/// phi >= 1 on K, by preconditioned descent with the obstacle enforced by
/// clamping on K after every step.  K must consist of interior nodes.
CapacityReport capacity(const std::vector<Index>& K, const ProblemSpec& problem,
                        const CapacityOptions& opts = {});

/// Affine fit of 1/value against the log of the member scale; the discrete
/// stand-in for a ~ 1/log R decay law.
struct SequenceFit {
  double slope = 0;
  double intercept = 0;
  double max_rel_residual = 0;  // of the reconstructed values
  bool valid = false;           // enough members and scale growth to fit
};

SequenceFit fit_inverse_log(const std::vector<double>& scales,
                            const std::vector<double>& values);

struct ClassifyOptions {
  double supercritical_tol = 1e-7;  // lambda1 below -tol on a member
  double floor_spread = 0.10;       // subcritical: relative spread of the tail
  double decay_factor = 2.0;        // critical: least observed total decay
  double strong_decay_factor = 5.0; // critical without scale growth
  double fit_rel_tol = 0.10;        // critical: fit quality of 1/value vs log R
  int tn_bisect_steps = 40;
  double tn_rel_tol = 1e-3;
  EigenOptions eigen;
  CapacityOptions capacity;
};

struct CriticalityReport {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<double> lambda1;
  std::vector<double> cap;
  std::vector<double> tN;
  std::vector<double> member_scale;  // min half-extent of each member
  SequenceFit cap_fit;
  SequenceFit tn_fit;
  std::optional<NodalField> ground_state;
  std::vector<std::string> notes;
};

/// Classify the functional over the exhaustion: lambda_1 per member decides
/// supercritical; otherwise the capacity of a fixed closed ball and the t_N
/// sequence (lambda_1(V - t W) = 0 thresholds) are trend-fitted.  The decay
/// thresholds are desk-scale conventions and are echoed in the notes.
CriticalityReport classify(const ProblemFamily& family, const CoefficientField& W,
                           const BallSpec& capacity_ball, const ClassifyOptions& opts = {});
/// Same with the default probe: W is a unit bump on `probe` and the capacity
/// ball coincides with its support.
CriticalityReport classify(const ProblemFamily& family, const BallSpec& probe,
                           const ClassifyOptions& opts = {});

/// t with lambda_1(Q_{A, V - t W}, grid) = 0, by bracket doubling and
/// bisection with warm-started eigen solves.
double bisect_critical_t(const ProblemSpec& problem, const Vector& W_cells,
                         const ClassifyOptions& opts = {});

struct PerturbOptions {
  int bisect_steps = 40;
  double lambda_zero_rel_tol = 1e-4;  // |lambda| <= rel_tol * |lambda_base| stops early
  double tau_minus_probe_limit = 256;
  EigenOptions eigen;
};

struct PerturbationScan {
  bool tau_plus_infinite = false;
  double tau_plus = 0;
  double lambda_at_tau_plus = 0;
  double base_lambda = 0;
  std::optional<double> tau_minus;     // only when found within the probe range
  double tau_minus_probed_down_to = 0; // certified lower bound of the scan
  std::vector<std::pair<double, double>> history;  // (tau, lambda1)
};

/// Threshold tau_+ where Q_{A, V + tau V0} stops being subcritical, measured
/// by the sign of lambda_1 on the largest exhaustion member.  V0 must be
/// compactly supported in the first member; V0 >= 0 yields the +infinity
/// marker, V0 == 0 is rejected.
PerturbationScan perturbation_threshold(const ProblemFamily& family, const CoefficientField& V0,
                                        const PerturbOptions& opts = {});

struct GroundStateOptions {
  bool override_critical_check = false;  // callers may skip the classify gate
  double stabilize_tol = 5e-2;           // max-norm agreement on the first member
  ClassifyOptions classify;
};

struct GroundStateReport {
  NodalField state;  // normalized to 1 at the anchor, on the last member used
  std::vector<double> tN;
  std::vector<double> gaps;
  bool stabilized = false;
  int members_used = 0;

  explicit GroundStateReport(NodalField f) : state(std::move(f)) {}
};

/// Null-sequence ground-state construction: per member bisect t_N with
/// lambda_1(V - t_N W) = 0, take the principal eigenfunction normalized at
/// the anchor, and return the stabilized limit.  t_N must decrease; a rise
/// beyond tolerance is reported as an inconsistency with criticality.  The
/// capacity ball feeds the classify gate.
GroundStateReport ground_state(const ProblemFamily& family, const CoefficientField& W,
                               const BallSpec& capacity_ball,
                               const GroundStateOptions& opts = {});
GroundStateReport ground_state(const ProblemFamily& family, const BallSpec& probe,
                               const GroundStateOptions& opts = {});

struct PoincareOptions {
  int battery = 64;
  unsigned seed = 1;
  double pairing_tol = 1e-8;  // least allowed |int psi phi|
};

struct PoincareReport {
  double constant = 0;          // battery maximum of the implied C
  double worst_quotient = 0;    // diagnostic: largest b/q ratio seen
  int trials = 0;
};

/// Empirical Poincare-type constant: smallest C with
///   Q(phi~) + C |int phi~ psi|^p >= C^{-1} int W |phi~|^p
/// over a battery of random zero-trace trials plus adversarial fields near
/// the ground state phi.
PoincareReport poincare_constant(const ProblemSpec& problem, const NodalField& phi,
                                 const NodalField& psi, const CoefficientField& W,
                                 const PoincareOptions& opts = {});

struct HsmOptions {
  int battery = 32;
  unsigned seed = 1;
  long polish_iters = 400;
};

struct HsmReport {
  double ratio = 0;  // best (lowest) Q(phi) / (int W~ |phi|^{p*})^{p/p*}
  int trials = 0;
};

/// Hardy-Sobolev-Maz'ya ratio estimate for p < n via random plus optimized
/// trial fields.  Throws for p >= n.
HsmReport hsm_ratio(const ProblemSpec& problem, const CoefficientField& Wtilde,
                    const HsmOptions& opts = {});

}  // namespace pacrit

#endif
