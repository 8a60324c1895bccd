#include <chrono>
#include <cstdio>

#include "pacrit/solve.hpp"

using namespace pacrit;

static double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

int main() {
  auto A1 = parse_field_expr("[[1]]", FieldKind::SpdMatrix);
  auto A2 = parse_field_expr("[[1,0],[0,1]]", FieldKind::SpdMatrix);
  auto V0 = parse_field_expr("0", FieldKind::Scalar);

  {  // p = 1.5 on an interval
    auto grid = make_grid(DomainBox::interval(0, 1), 257);
    ProblemSpec spec(1.5, grid, A1, V0);
    double t = now();
    EigenReport e = principal_eigenpair(spec);
    std::printf("p=1.5 1D lambda1 = %.6f iters=%ld res=%.2e conv=%d (%.2fs)\n", e.lambda1,
                e.iterations, e.residual, int(e.converged), now() - t);
  }
  {  // 2D p=1.5 eigen on a box
    auto grid = make_grid(DomainBox::square(1.0), 65, 65);
    ProblemSpec spec(1.5, grid, A2, V0);
    double t = now();
    EigenReport e = principal_eigenpair(spec);
    std::printf("p=1.5 2D lambda1 = %.6f iters=%ld res=%.2e conv=%d (%.2fs)\n", e.lambda1,
                e.iterations, e.residual, int(e.converged), now() - t);
  }
  {  // masked disk eigen, p=2: lambda1 -> (j_{0,1}/R)^2 = 5.7832/R^2
    auto base = Grid(DomainBox::square(1.0), 65, 65);
    auto grid = std::make_shared<Grid>(base.with_disk_mask(Point::Zero(), 1.0));
    ProblemSpec spec(2.0, grid, A2, V0);
    double t = now();
    EigenReport e = principal_eigenpair(spec);
    std::printf("disk p=2 lambda1 = %.6f (j01^2=5.7832) iters=%ld res=%.2e conv=%d (%.2fs)\n",
                e.lambda1, e.iterations, e.residual, int(e.converged), now() - t);
  }
  {  // 2D p=3 Dirichlet with a bump source
    auto grid = make_grid(DomainBox::square(2.0), 129, 129);
    ProblemSpec spec(3.0, grid, A2, V0);
    NodalField f = NodalField::from_expr(grid, bump_field(Point::Zero(), 1.0, 2));
    double t = now();
    SolveReport s = solve_dirichlet(spec, f, NodalField(grid));
    std::printf("2D p=3 dirichlet iters=%ld res=%.2e conv=%d max=%.4f (%.2fs)\n", s.iterations,
                s.residual, int(s.converged), s.solution.max(), now() - t);
  }
  {  // 2D p=1.5 Dirichlet (regularized)
    auto grid = make_grid(DomainBox::square(2.0), 129, 129);
    ProblemSpec spec(1.5, grid, A2, V0);
    NodalField f = NodalField::from_expr(grid, bump_field(Point::Zero(), 1.0, 2));
    double t = now();
    SolveReport s = solve_dirichlet(spec, f, NodalField(grid));
    std::printf("2D p=1.5 dirichlet iters=%ld res=%.2e conv=%d max=%.4f (%.2fs)\n",
                s.iterations, s.residual, int(s.converged), s.solution.max(), now() - t);
  }
  {  // big grid timing probe: p=2 eigen on 257^2
    auto grid = make_grid(DomainBox::square(8.0), 257, 257);
    ProblemSpec spec(2.0, grid, A2, V0);
    double t = now();
    EigenReport e = principal_eigenpair(spec);
    std::printf("257^2 p=2 eigen lambda1=%.6f iters=%ld res=%.2e (%.2fs)\n", e.lambda1,
                e.iterations, e.residual, now() - t);
    double t2 = now();
    EigenOptions warm;
    warm.warm_start = &e.phi;
    ProblemSpec spec2 = spec.with_shifted_potential(Vector::Ones(spec.V_cells().size()), -0.01);
    EigenReport e2 = principal_eigenpair(spec2, warm);
    std::printf("  warm restart: lambda1=%.6f iters=%ld (%.2fs)\n", e2.lambda1, e2.iterations,
                now() - t2);
  }
  return 0;
}
