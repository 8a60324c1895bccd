#include "internal.hpp"

#include <cmath>
#include <random>

namespace pacrit::internal {

CellBasis::CellBasis(const Grid& g) {
  nc = g.corners_per_cell();
  if (g.dim() == 1) {
    const double h = g.spacing(0);
    gx[0] = -1 / h;
    gx[1] = 1 / h;
    wval = 0.5;
  } else {
    const double ax = 1 / (2 * g.spacing(0));
    const double ay = 1 / (2 * g.spacing(1));
    const double sx[4] = {-1, 1, -1, 1};
    const double sy[4] = {-1, -1, 1, 1};
    for (int c = 0; c < 4; ++c) {
      gx[c] = sx[c] * ax;
      gy[c] = sy[c] * ay;
    }
    wval = 0.25;
  }
}

Assembled assemble(const ProblemSpec& spec, const Vector& u, const Vector* f_cells) {
  const Grid& g = spec.grid();
  const CellBasis basis(g);
  const double p = spec.p();
  const double eps = spec.epsilon();
  const double vol = g.cell_volume();
  const auto& A = spec.A_cells();
  const Vector& V = spec.V_cells();
  const bool dim2 = g.dim() == 2;

  Assembled out;
  out.grad = Vector::Zero(u.size());
  double energy = 0;
  const auto& cells = g.active_cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto corners = g.cell_corners(cells[k]);
    double gxv = 0, gyv = 0, uc = 0;
    for (int c = 0; c < basis.nc; ++c) {
      const double uv = u[corners[c]];
      gxv += basis.gx[c] * uv;
      if (dim2) gyv += basis.gy[c] * uv;
      uc += uv;
    }
    uc *= basis.wval;

    const Matrix2& Ak = A[k];
    double Agx, Agy = 0, n2;
    if (dim2) {
      Agx = Ak(0, 0) * gxv + Ak(0, 1) * gyv;
      Agy = Ak(1, 0) * gxv + Ak(1, 1) * gyv;
      n2 = gxv * Agx + gyv * Agy;
    } else {
      Agx = Ak(0, 0) * gxv;
      n2 = gxv * Agx;
    }

    const double reg = n2 + eps * eps;
    const double grad_energy = p == 2 ? reg : std::pow(reg, 0.5 * p);
    const double gfac = p == 2 ? 1.0 : std::pow(reg, 0.5 * p - 1.0);

    const double absu = std::abs(uc);
    const double u_pm1 = p == 2 ? uc : std::copysign(std::pow(absu, p - 1.0), uc);
    const double u_p = p == 2 ? uc * uc : std::pow(absu, p);
    const double fc = f_cells ? (*f_cells)[static_cast<Index>(k)] : 0.0;

    energy += grad_energy + V[static_cast<Index>(k)] * u_p - p * fc * uc;

    const double vfac = p * (V[static_cast<Index>(k)] * u_pm1 - fc) * basis.wval * vol;
    const double gscale = p * gfac * vol;
    for (int c = 0; c < basis.nc; ++c) {
      double dot = basis.gx[c] * Agx;
      if (dim2) dot += basis.gy[c] * Agy;
      out.grad[corners[c]] += gscale * dot + vfac;
    }
  }
  out.energy = energy * vol;
  return out;
}

MassResult weighted_mass_and_grad(const ProblemSpec& spec, const Vector& u, double exponent,
                                  const Vector* weight_cells) {
  const Grid& g = spec.grid();
  const CellBasis basis(g);
  const double q = exponent;
  const double vol = g.cell_volume();

  MassResult out;
  out.grad = Vector::Zero(u.size());
  double mass = 0;
  const auto& cells = g.active_cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double wc = weight_cells ? (*weight_cells)[static_cast<Index>(k)] : 1.0;
    if (wc == 0) continue;
    const auto corners = g.cell_corners(cells[k]);
    double uc = 0;
    for (int c = 0; c < basis.nc; ++c) uc += u[corners[c]];
    uc *= basis.wval;
    const double absu = std::abs(uc);
    mass += wc * (q == 2 ? uc * uc : std::pow(absu, q));
    const double u_qm1 = q == 2 ? uc : std::copysign(std::pow(absu, q - 1.0), uc);
    const double w = q * wc * u_qm1 * basis.wval * vol;
    for (int c = 0; c < basis.nc; ++c) out.grad[corners[c]] += w;
  }
  out.mass = mass * vol;
  return out;
}

MassResult mass_and_grad(const ProblemSpec& spec, const Vector& u) {
  return weighted_mass_and_grad(spec, u, spec.p(), nullptr);
}

Vector restrict_interior(const Grid& g, const Vector& full) {
  const auto& ids = g.interior_nodes();
  Vector out(static_cast<Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) out[static_cast<Index>(i)] = full[ids[i]];
  return out;
}

void scatter_interior(const Grid& g, const Vector& interior, Vector& full) {
  const auto& ids = g.interior_nodes();
  for (std::size_t i = 0; i < ids.size(); ++i) full[ids[i]] = interior[static_cast<Index>(i)];
}

Vector restrict_to(const std::vector<Index>& dofs, const Vector& full) {
  Vector out(static_cast<Index>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) out[static_cast<Index>(i)] = full[dofs[i]];
  return out;
}

void scatter_to(const std::vector<Index>& dofs, const Vector& reduced, Vector& full) {
  for (std::size_t i = 0; i < dofs.size(); ++i) full[dofs[i]] = reduced[static_cast<Index>(i)];
}

Vector linearized_weights(const ProblemSpec& spec, const Vector& u) {
  const Grid& g = spec.grid();
  const CellBasis basis(g);
  const double p = spec.p();
  const double eps = spec.epsilon();
  const auto& A = spec.A_cells();
  const bool dim2 = g.dim() == 2;
  const auto& cells = g.active_cells();
  Vector w(static_cast<Index>(cells.size()));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto corners = g.cell_corners(cells[k]);
    double gxv = 0, gyv = 0;
    for (int c = 0; c < basis.nc; ++c) {
      gxv += basis.gx[c] * u[corners[c]];
      if (dim2) gyv += basis.gy[c] * u[corners[c]];
    }
    const Matrix2& Ak = A[k];
    double n2;
    if (dim2) {
      n2 = gxv * (Ak(0, 0) * gxv + Ak(0, 1) * gyv) +
           gyv * (Ak(1, 0) * gxv + Ak(1, 1) * gyv);
    } else {
      n2 = Ak(0, 0) * gxv * gxv;
    }
    w[static_cast<Index>(k)] = std::pow(n2 + eps * eps, 0.5 * p - 1.0);
  }
  return w;
}

NodalField sample_onto(const NodalField& src, const GridPtr& dst) {
  NodalField out(dst);
  for (const Index i : dst->interior_nodes()) {
    const Point x = dst->node(i);
    if (src.grid().box().contains(x)) out[i] = src.sample(x);
  }
  return out;
}

NodalField random_smooth_field(const ProblemSpec& spec, std::uint64_t seed) {
  const Grid& g = spec.grid();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector noise(g.num_interior());
  for (Index i = 0; i < noise.size(); ++i) noise[i] = normal(rng);
  // Smooth in the H^1_0 metric; scale to unit sup norm.
  Vector smooth = spec.stiffness().solve(noise);
  const double m = smooth.cwiseAbs().maxCoeff();
  if (m > 0) smooth /= m;
  NodalField out(spec.grid_ptr());
  scatter_interior(g, smooth, out.values());
  return out;
}

}  // namespace pacrit::internal
