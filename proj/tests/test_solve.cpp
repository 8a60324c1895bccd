#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pacrit/solve.hpp"

using namespace pacrit;

namespace {

ProblemSpec interval_spec(double p, int n = 129, const std::string& V = "0") {
  return ProblemSpec(p, make_grid(DomainBox::interval(0, 1), n),
                     parse_field_expr("[[1]]", FieldKind::SpdMatrix),
                     parse_field_expr(V, FieldKind::Scalar));
}

}  // namespace

TEST_CASE("shooting oracle reproduces the closed-form eigenvalue") {
  for (const double p : {1.5, 2.0, 3.0}) {
    const double shoot = oracles::shooting_lambda1_interval(p);
    const double exact = oracles::lambda1_closed_form(p);
    CHECK(std::abs(shoot - exact) / exact <= 1e-5);
  }
  CHECK(oracles::lambda1_closed_form(2.0) == doctest::Approx(M_PI * M_PI));
}

TEST_CASE("dirichlet: zero data gives the zero minimizer") {
  const ProblemSpec spec = interval_spec(2.0);
  const SolveReport r =
      solve_dirichlet(spec, NodalField(spec.grid_ptr()), NodalField(spec.grid_ptr()));
  CHECK(r.converged);
  CHECK(r.energy == doctest::Approx(0.0));
  CHECK(r.solution.values().cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("dirichlet oracle: -u'' = 1 with zero boundary data") {
  const ProblemSpec spec = interval_spec(2.0, 65);
  const NodalField f(spec.grid_ptr(), Vector::Ones(spec.grid().num_nodes()));
  const SolveReport r = solve_dirichlet(spec, f, NodalField(spec.grid_ptr()));
  REQUIRE(r.converged);
  double err = 0;
  for (Index i = 0; i < r.solution.size(); ++i) {
    const double x = spec.grid().node(i)[0];
    err = std::max(err, std::abs(r.solution[i] - 0.5 * x * (1 - x)));
  }
  CHECK(err <= 1e-8);  // nodal-exact up to the solver tolerance
}

TEST_CASE("dirichlet solves agree from multiple random starts") {
  const ProblemSpec spec = interval_spec(3.0, 65);
  const NodalField f = NodalField::from_expr(spec.grid_ptr(),
                                             parse_field_expr("1 + x", FieldKind::Scalar));
  std::mt19937_64 rng(3);
  SolveOptions opts;
  const SolveReport base = solve_dirichlet(spec, f, NodalField(spec.grid_ptr()), opts);
  REQUIRE(base.converged);
  for (int t = 0; t < 3; ++t) {
    NodalField start = oracles::random_fourier_field(spec.grid_ptr(), rng);
    SolveOptions o2;
    o2.warm_start = &start;
    const SolveReport other = solve_dirichlet(spec, f, NodalField(spec.grid_ptr()), o2);
    REQUIRE(other.converged);
    CHECK((other.solution.values() - base.solution.values()).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("supercritical potential is detected as unbounded descent") {
  const ProblemSpec spec = interval_spec(2.0, 65, "0 - 100");
  const NodalField f(spec.grid_ptr(), Vector::Ones(spec.grid().num_nodes()));
  CHECK_THROWS_WITH_AS(solve_dirichlet(spec, f, NodalField(spec.grid_ptr())),
                       doctest::Contains("supercritical"), AnalysisError);
}

TEST_CASE("weak maximum principle on random nonnegative sources") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const double p = t % 2 == 0 ? 2.0 : 3.0;
    const ProblemSpec spec = interval_spec(p, 65, t % 3 == 0 ? "x" : "0.5 + x^2");
    NodalField f = oracles::random_fourier_field(spec.grid_ptr(), rng);
    f.values() = f.values().cwiseAbs();
    const SolveReport r = solve_dirichlet(spec, f, NodalField(spec.grid_ptr()));
    REQUIRE(r.converged);
    CHECK(r.solution.min() >= -1e-6);
  }
}

TEST_CASE("weak comparison principle on ordered data") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 5; ++t) {
    const double p = t % 2 == 0 ? 2.0 : 1.5;
    const ProblemSpec spec = interval_spec(p, 65, "0.2");
    NodalField f1 = oracles::random_fourier_field(spec.grid_ptr(), rng);
    NodalField bump = oracles::random_fourier_field(spec.grid_ptr(), rng);
    NodalField f2(spec.grid_ptr(), f1.values() + bump.values().cwiseAbs());
    NodalField g1(spec.grid_ptr(), Vector::Constant(spec.grid().num_nodes(), 0.1));
    NodalField g2(spec.grid_ptr(), Vector::Constant(spec.grid().num_nodes(), 0.3));
    const SolveReport r1 = solve_dirichlet(spec, f1, g1);
    const SolveReport r2 = solve_dirichlet(spec, f2, g2);
    REQUIRE(r1.converged);
    REQUIRE(r2.converged);
    CHECK((r1.solution.values() - r2.solution.values()).maxCoeff() <= 1e-6);
  }
}

TEST_CASE("principal eigenpair: p=2 interval against separation of variables") {
  const ProblemSpec spec = interval_spec(2.0, 257);
  const EigenReport eig = principal_eigenpair(spec);
  REQUIRE(eig.converged);
  CHECK(std::abs(eig.lambda1 - M_PI * M_PI) / (M_PI * M_PI) <= 5e-3);
  CHECK(eig.phi.min() >= 0);
  // normalization int |phi|^p = 1 to 1e-10
  Vector pc = cell_values(eig.phi);
  for (Index k = 0; k < pc.size(); ++k) pc[k] = pc[k] * pc[k];
  CHECK(std::abs(integrate(pc, spec.grid()) - 1.0) <= 1e-10);
}

TEST_CASE("eigen residual satisfies the discrete Euler-Lagrange system") {
  for (const double p : {1.5, 2.0, 3.0}) {
    const ProblemSpec spec = interval_spec(p, 129, "x - 0.4");
    const EigenReport eig = principal_eigenpair(spec);
    REQUIRE(eig.converged);
    CHECK(el_residual(spec, eig.phi, eig.lambda1) <= 10 * default_solve_tol(p));
  }
}

TEST_CASE("potential shift moves the eigenvalue and keeps the eigenfunction") {
  const ProblemSpec spec = interval_spec(2.0, 129, "x");
  const ProblemSpec shifted = interval_spec(2.0, 129, "x + 2.5");
  const EigenReport e1 = principal_eigenpair(spec);
  const EigenReport e2 = principal_eigenpair(shifted);
  CHECK(std::abs(e2.lambda1 - e1.lambda1 - 2.5) <= 1e-7);
  CHECK((e1.phi.values() - e2.phi.values()).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("eigen minimality: random zero-trace fields score above lambda1") {
  const ProblemSpec spec = interval_spec(2.0, 65, "x");
  const EigenReport eig = principal_eigenpair(spec);
  std::mt19937_64 rng(19);
  for (int t = 0; t < 100; ++t) {
    NodalField psi = oracles::random_fourier_field(spec.grid_ptr(), rng);
    CHECK(rayleigh_quotient(spec, psi) >= eig.lambda1 - 1e-8);
  }
}

TEST_CASE("p=3 eigenvalue against the shooting oracle") {
  const ProblemSpec spec = interval_spec(3.0, 129);
  const EigenReport eig = principal_eigenpair(spec);
  REQUIRE(eig.converged);
  const double oracle = oracles::shooting_lambda1_interval(3.0);
  CHECK(std::abs(eig.lambda1 - oracle) / oracle <= 0.02);
}

TEST_CASE("strict domain monotonicity of lambda1") {
  auto lambda_on = [](double a, double b) {
    const ProblemSpec spec(2.0, make_grid(DomainBox::interval(a, b), 129),
                           parse_field_expr("[[1]]", FieldKind::SpdMatrix),
                           parse_field_expr("0", FieldKind::Scalar));
    return principal_eigenpair(spec).lambda1;
  };
  const double l1 = lambda_on(0.2, 0.8), l2 = lambda_on(0.1, 0.9), l3 = lambda_on(0.0, 1.0);
  CHECK(l1 - l2 > 10 * 1e-8);
  CHECK(l2 - l3 > 10 * 1e-8);
}

TEST_CASE("aap construction: constants solve V = 0 and the anchor is 1") {
  const Exhaustion ex = make_exhaustion(
      DomainBox::square(2.0),
      {.count = 3, .spacing = 0.125, .policy = ExhaustionPolicy::Concentric});
  const ProblemFamily family(2.0, parse_field_expr("[[1,0],[0,1]]", FieldKind::SpdMatrix),
                             parse_field_expr("0", FieldKind::Scalar), ex);
  const AapReport rep = positive_solution_aap(family);
  CHECK(rep.members_used >= 2);
  CHECK(rep.solution.sample(ex.anchor()) == doctest::Approx(1.0));
  // constants are exact solutions: the limit is flat on the first member
  double mn = 1e300, mx = -1e300;
  const Grid& first = *ex.member(0);
  for (Index i = 0; i < first.num_nodes(); ++i) {
    const double v = rep.solution.sample(first.node(i));
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mx / mn <= 1.05);
  // AAP consistency via Picone: int L_A(test, u) >= -tol for nonneg tests
  const ProblemSpec last = family.member(rep.members_used - 1);
  std::mt19937_64 rng(23);
  NodalField u = rep.solution;
  u.values() = u.values().cwiseMax(1e-8);
  for (int t = 0; t < 5; ++t) {
    NodalField test = oracles::random_fourier_field(last.grid_ptr(), rng);
    test.values() = test.values().cwiseAbs();
    const PiconeResult pr = picone(test, u, last);
    CHECK(pr.intL >= -1e-8 * (1 + pr.L.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("aap rejects supercritical members") {
  const Exhaustion ex = make_exhaustion(
      DomainBox::square(2.0),
      {.count = 3, .spacing = 0.125, .policy = ExhaustionPolicy::Concentric});
  // V = -4 * bump on the unit ball makes lambda1 negative on large members.
  const ProblemFamily family(
      2.0, parse_field_expr("[[1,0],[0,1]]", FieldKind::SpdMatrix),
      bump_field(Point::Zero(), 0.45, 2, -40.0), ex);
  CHECK_THROWS_WITH_AS(positive_solution_aap(family), doctest::Contains("supercritical"),
                       AnalysisError);
}

TEST_CASE("aap with a genuine potential: positive solution with small residual") {
  const Exhaustion ex = make_exhaustion(
      DomainBox::interval(-4, 4),
      {.count = 4, .spacing = 1.0 / 32, .policy = ExhaustionPolicy::Concentric});
  const ProblemFamily family(2.0, parse_field_expr("[[1]]", FieldKind::SpdMatrix),
                             parse_field_expr("0.5/(1+x^2)", FieldKind::Scalar), ex);
  const AapReport rep = positive_solution_aap(family);
  CHECK(rep.solution.min() >= 0);
  CHECK(rep.solution.sample(ex.anchor()) == doctest::Approx(1.0));
  for (const double l : rep.lambda1) CHECK(l > 0);
}

TEST_CASE("truncate_subsolution accepts linear subsolutions and truncates the sign") {
  const ProblemSpec spec = interval_spec(2.0, 65);
  // v = x - 0.5 is p-harmonic: a subsolution with equality.
  const NodalField v = NodalField::from_function(
      spec.grid_ptr(), [](const Point& x) { return x[0] - 0.5; });
  const SubsolutionReport rep = truncate_subsolution(v, spec);
  CHECK(rep.margin_before <= 1e-10);
  CHECK(rep.margin_after <= 1e-10);
  CHECK(rep.truncated.min() >= 0);
  CHECK(rep.truncated[spec.grid().num_nodes() - 1] == doctest::Approx(0.5));

  // v already nonnegative stays unchanged.
  const NodalField vp = NodalField::from_function(
      spec.grid_ptr(), [](const Point& x) { return 0.2 * x[0]; });
  const SubsolutionReport rep2 = truncate_subsolution(vp, spec);
  CHECK((rep2.truncated.values() - vp.values()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncate_subsolution: v = -1 with V >= 0 truncates to zero") {
  const ProblemSpec spec = interval_spec(2.0, 33, "1 + x");
  const NodalField v(spec.grid_ptr(),
                     Vector::Constant(spec.grid().num_nodes(), -1.0));
  const SubsolutionReport rep = truncate_subsolution(v, spec);
  CHECK(rep.truncated.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("truncate_subsolution rejects supersolutions") {
  const ProblemSpec spec = interval_spec(2.0, 65);
  const NodalField v = NodalField::from_function(
      spec.grid_ptr(), [](const Point& x) { return std::sin(M_PI * x[0]); });
  CHECK_THROWS_WITH_AS(truncate_subsolution(v, spec), doctest::Contains("not a subsolution"),
                       ValidationError);
}
