// Dev probe for classifier scenarios and capacity accuracy.
#include <chrono>
#include <cstdio>

#include "pacrit/criticality.hpp"
#include "pacrit/minimal.hpp"

using namespace pacrit;

static double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

static void print_report(const char* tag, const CriticalityReport& r, double dt) {
  std::printf("%s: verdict=%s (%.1fs)\n  lambda1:", tag, to_string(r.verdict).c_str(), dt);
  for (double v : r.lambda1) std::printf(" %.5f", v);
  std::printf("\n  cap:    ");
  for (double v : r.cap) std::printf(" %.5f", v);
  std::printf("\n  tN:     ");
  for (double v : r.tN) std::printf(" %.5f", v);
  std::printf("\n  capfit: slope=%.4f res=%.3f valid=%d | tnfit: slope=%.4f res=%.3f valid=%d\n",
              r.cap_fit.slope, r.cap_fit.max_rel_residual, int(r.cap_fit.valid),
              r.tn_fit.slope, r.tn_fit.max_rel_residual, int(r.tn_fit.valid));
}

int main(int argc, char** argv) {
  const int which = argc > 1 ? std::atoi(argv[1]) : 0;
  const auto A2 = parse_field_expr("[[1,0],[0,1]]", FieldKind::SpdMatrix);
  const auto A1 = parse_field_expr("[[1]]", FieldKind::SpdMatrix);
  const auto V0 = parse_field_expr("0", FieldKind::Scalar);

  if (which == 0 || which == 1) {  // capacity oracle, 2D annulus (1,4)
    for (int n : {129, 257}) {
      double t = now();
      auto base = Grid(DomainBox::square(4.0), n, n);
      auto grid = std::make_shared<Grid>(base.with_disk_mask(Point::Zero(), 4.0));
      ProblemSpec spec(2.0, grid, A2, V0);
      const auto K = grid->nodes_in_ball(Point::Zero(), 1.0);
      CapacityOptions copts;
      CapacityReport rep = capacity(K, spec, copts);
      const double exact = 2 * M_PI / std::log(4.0);
      std::printf("capacity n=%d: %.5f vs %.5f (rel %.3f%%) iters=%ld conv=%d (%.1fs)\n", n,
                  rep.value, exact, 100 * std::abs(rep.value - exact) / exact,
                  rep.iterations, int(rep.converged), now() - t);
    }
  }

  if (which == 0 || which == 2) {  // classify p=2 growing boxes
    double t = now();
    const Exhaustion ex = make_exhaustion(
        DomainBox::square(16.0),
        {.count = 5, .spacing = 0.125, .policy = ExhaustionPolicy::Concentric});
    const ProblemFamily family(2.0, A2, V0, ex);
    const CriticalityReport rep = classify(family, BallSpec{Point::Zero(), 0.5});
    print_report("p=2 boxes", rep, now() - t);
  }

  if (which == 0 || which == 3) {  // classify p=1.5 growing boxes
    double t = now();
    const Exhaustion ex = make_exhaustion(
        DomainBox::square(16.0),
        {.count = 5, .spacing = 0.125, .policy = ExhaustionPolicy::Concentric});
    const ProblemFamily family(1.5, A2, V0, ex);
    const CriticalityReport rep = classify(family, BallSpec{Point::Zero(), 0.5});
    print_report("p=1.5 boxes", rep, now() - t);
  }

  if (which == 0 || which == 4) {  // 1D critical-by-construction interval
    double t = now();
    ProblemSpec base(2.0, make_grid(DomainBox::interval(0, 1), 129), A1, V0);
    const double l1 = principal_eigenpair(base).lambda1;
    const Exhaustion ex =
        make_exhaustion(DomainBox::interval(0, 1), {.count = 7, .spacing = 1.0 / 128});
    const ProblemFamily family(2.0, A1, constant_field(-l1), ex);
    const CriticalityReport rep = classify(family, BallSpec{Point(0.5, 0), 0.15});
    print_report("1D critical", rep, now() - t);
  }

  if (which == 6) {  // ground-state scan: annular probe weight near the first boundary
    for (bool use_override : {false}) {
      double t = now();
      const Exhaustion ex = make_exhaustion(
          DomainBox::square(16.0),
          {.count = 5, .spacing = 0.125, .policy = ExhaustionPolicy::Concentric});
      const ProblemFamily family(2.0, A2, V0, ex);
      GroundStateOptions gopts;
      gopts.override_critical_check = use_override;
      const GroundStateReport rep = ground_state(
          family, annular_bump_field(Point::Zero(), 0.75, 0.95, 2),
          BallSpec{Point::Zero(), 0.5}, gopts);
      std::printf("gs annular tN:");
      for (double v : rep.tN) std::printf(" %.5f", v);
      std::printf("  ratio=%.2f\n", rep.tN.front() / rep.tN.back());
      // flatness on the inner half of the first member (half-width 0.5)
      double mn = 1e300, mx = -1e300;
      const Grid& first = *ex.member(0);
      for (Index i = 0; i < first.num_nodes(); ++i) {
        const Point x = first.node(i);
        if (std::abs(x[0]) <= 0.5 && std::abs(x[1]) <= 0.5) {
          const double v = rep.state.sample(x);
          mn = std::min(mn, v);
          mx = std::max(mx, v);
        }
      }
      std::printf("  inner-half variation: %.2f%%  (%.1fs)\n",
                  100 * (mx - mn) / (0.5 * (mx + mn)), now() - t);
    }
  }

  if (which == 0 || which == 5) {  // 1D subcritical interval (V=0)
    double t = now();
    const Exhaustion ex =
        make_exhaustion(DomainBox::interval(0, 1), {.count = 7, .spacing = 1.0 / 128});
    const ProblemFamily family(2.0, A1, V0, ex);
    const CriticalityReport rep = classify(family, BallSpec{Point(0.5, 0), 0.15});
    print_report("1D subcrit", rep, now() - t);
  }
  return 0;
}
