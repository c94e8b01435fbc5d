#include "popovdae/mild.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "popovdae/constants.hpp"
#include "popovdae/errors.hpp"

namespace popovdae {

TimeGrid::TimeGrid(double t_f_, int m_) : t_f(t_f_), m(m_) {
  if (!(t_f > 0.0) || !std::isfinite(t_f)) throw InvalidParams("TimeGrid: t_f must be positive");
  if (m < 1) throw InvalidParams("TimeGrid: need at least one step");
}

Signal Signal::zero(const TimeGrid& g, int dim) {
  if (dim < 0) throw InvalidParams("Signal: negative dimension");
  return {g, Matrix::Zero(dim, g.m)};
}

Signal Signal::constant(const TimeGrid& g, const Vector& v) {
  Signal s{g, Matrix(v.size(), g.m)};
  s.values.colwise() = v;
  return s;
}

Signal Signal::sampled(const TimeGrid& g, int dim, const std::function<Vector(double)>& f) {
  Signal s{g, Matrix(dim, g.m)};
  for (int k = 0; k < g.m; ++k) {
    const Vector v = f(g.midpoint(k));
    if (v.size() != dim) throw DimensionMismatch("Signal::sampled: wrong sample dimension");
    s.values.col(k) = v;
  }
  return s;
}

Signal Signal::from_stacked(const TimeGrid& g, int dim, const Vector& stacked) {
  if (stacked.size() != static_cast<Eigen::Index>(dim) * g.m)
    throw DimensionMismatch("Signal::from_stacked: length must be dim * m");
  Signal s{g, Matrix(dim, g.m)};
  for (int k = 0; k < g.m; ++k) s.values.col(k) = stacked.segment(k * dim, dim);
  return s;
}

Vector Signal::stacked() const {
  Vector v(static_cast<Eigen::Index>(dim()) * grid.m);
  for (int k = 0; k < grid.m; ++k) v.segment(k * dim(), dim()) = values.col(k);
  return v;
}

double l2_inner(const Signal& a, const Signal& b) {
  if (a.grid != b.grid) throw GridMismatch("l2_inner: signals on different grids");
  if (a.dim() != b.dim()) throw DimensionMismatch("l2_inner: signal dimensions differ");
  return a.grid.dt() * a.values.cwiseProduct(b.values).sum();
}

double l2_norm(const Signal& s) { return std::sqrt(l2_inner(s, s)); }

InhomogeneityParts decompose_inhomogeneity(const SpectralDecomposition& d, const Pencil& p,
                                           const Signal& f) {
  if (f.dim() != p.n()) throw DimensionMismatch("decompose_inhomogeneity: f must have dim n");
  const Matrix Ainv = resolvent(p, 0.0);  // SingularAtLambda when 0 not in rho(E, A)
  const Matrix fhat = Ainv * f.values;
  InhomogeneityParts parts{{f.grid, d.P * fhat}, {f.grid, Matrix(p.n(), f.grid.m)}};
  parts.f_hat_K.values = fhat - parts.f_hat_R.values;
  return parts;
}

MildSolution mild_solution(const SpectralDecomposition& d, const Pencil& p, const Vector& x0,
                           const Signal& f) {
  const int n = p.n(), m = f.grid.m, r = d.r;
  if (x0.size() != n) throw DimensionMismatch("mild_solution: x0 must have dim n");
  if (d.n != n) throw DimensionMismatch("mild_solution: decomposition size mismatch");
  const auto parts = decompose_inhomogeneity(d, p, f);
  const double dt = f.grid.dt();

  MildSolution sol;
  sol.x.grid = f.grid;
  sol.x.states.resize(n, m + 1);
  sol.consistency_gap =
      ((Matrix::Identity(n, n) - d.P) * x0 + parts.f_hat_K.values.col(0)).norm();

  // V_R coordinates of the dynamic part; phi_k are the forcing coordinates.
  const Matrix Edt = r > 0 ? Matrix((d.A_R * dt).exp()) : Matrix(0, 0);
  const Matrix EdtI = r > 0 ? Matrix(Edt - Matrix::Identity(r, r)) : Matrix(0, 0);
  Vector c = d.V_R.transpose() * (d.P * x0);
  for (int k = 0; k <= m; ++k) {
    const int left = k > 0 ? k - 1 : 0;
    sol.x.states.col(k) = d.V_R * c - parts.f_hat_K.values.col(left);
    if (k < m) {
      const Vector phi = d.V_R.transpose() * parts.f_hat_R.values.col(k);
      c = Edt * c + EdtI * phi;
    }
  }
  return sol;
}

double mild_residual(const Pencil& p, const Trajectory& traj, const Signal& f,
                     const Vector& x0) {
  const int n = p.n(), m = traj.grid.m;
  if (traj.states.rows() != n || x0.size() != n || f.dim() != n)
    throw DimensionMismatch("mild_residual: dimension mismatch");
  if (f.grid != traj.grid) throw GridMismatch("mild_residual: trajectory and f grids differ");
  const double dt = traj.grid.dt();
  Vector cum_x = Vector::Zero(n), cum_f = Vector::Zero(n);
  double res = 0.0;
  for (int k = 0; k <= m; ++k) {
    const Vector rk = p.E * (traj.states.col(k) - x0) - p.A * cum_x - cum_f;
    res = std::max(res, rk.norm());
    if (k < m) {
      cum_x += dt * traj.states.col(k);
      cum_f += dt * f.values.col(k);
    }
  }
  return res;
}

}  // namespace popovdae
