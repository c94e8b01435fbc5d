#pragma once

#include <functional>

#include "popovdae/decomposition.hpp"
#include "popovdae/pencil.hpp"

namespace popovdae {

// Uniform grid 0 = t_0 < t_1 < ... < t_m = t_f.
struct TimeGrid {
  double t_f = 1.0;
  int m = 1;

  TimeGrid() = default;
  TimeGrid(double t_f_, int m_);

  double dt() const { return t_f / m; }
  double node(int k) const { return k * dt(); }
  double midpoint(int k) const { return (k + 0.5) * dt(); }

  bool operator==(const TimeGrid& o) const { return t_f == o.t_f && m == o.m; }
  bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

// Piecewise-constant function of time: column k holds the value on
// [t_k, t_{k+1}). This is the embedding of discrete signals into L^2 used
// throughout; the L^2 inner product is dt * sum of pointwise products.
struct Signal {
  TimeGrid grid;
  Matrix values;  // dim x m

  int dim() const { return static_cast<int>(values.rows()); }

  static Signal zero(const TimeGrid& g, int dim);
  static Signal constant(const TimeGrid& g, const Vector& v);
  // Samples a continuous function at interval midpoints.
  static Signal sampled(const TimeGrid& g, int dim,
                        const std::function<Vector(double)>& f);
  static Signal from_stacked(const TimeGrid& g, int dim, const Vector& stacked);

  Vector stacked() const;  // step-major: (value at step 0; value at step 1; ...)
};

double l2_inner(const Signal& a, const Signal& b);
double l2_norm(const Signal& s);

// State trajectory sampled at the m+1 grid nodes. The algebraic component is
// piecewise constant; node k reports its left-interval value (node 0 the
// first interval's value).
struct Trajectory {
  TimeGrid grid;
  Matrix states;  // n x (m+1)
};

struct InhomogeneityParts {
  Signal f_hat_R;  // P A^{-1} f, lives in X_R
  Signal f_hat_K;  // (I - P) A^{-1} f, lives in X_K
};

// Splits f_hat = A^{-1} f along X = X_R (+) X_K. Requires 0 in rho(E, A)
// (A invertible); otherwise SingularAtLambda — route the problem through
// shift_transform first.
InhomogeneityParts decompose_inhomogeneity(const SpectralDecomposition& d, const Pencil& p,
                                           const Signal& f);

struct MildSolution {
  Trajectory x;
  // |(I - P) x0 + f_hat_K(0+)|: how far the supplied initial value is from
  // satisfying the algebraic constraint. The solver uses P x0 and reports
  // the gap instead of failing.
  double consistency_gap = 0.0;
};

// Mild solution of d/dt E x = A x + f with piecewise-constant f:
//   x(t_k) = T(t_k) P x0
//          + sum_{j<k} [e^{A_R (t_k - t_j)} - e^{A_R (t_k - t_{j+1})}] f_hat_R,j
//          - f_hat_K on the interval left of t_k,
// where the bracket is the exact step kernel of the variation-of-constants
// convolution. Evaluated by the equivalent one-step recursion
//   c_{k+1} = e^{A_R dt} c_k + (e^{A_R dt} - I) phi_k
// in V_R coordinates.
MildSolution mild_solution(const SpectralDecomposition& d, const Pencil& p, const Vector& x0,
                           const Signal& f);

// Integrated-equation residual
//   max_k | E x(t_k) - E x0 - A Int_0^{t_k} x - Int_0^{t_k} f |
// with both integrals the exact integrals of the piecewise-constant
// embeddings (left-endpoint cumulative sums).
double mild_residual(const Pencil& p, const Trajectory& traj, const Signal& f,
                     const Vector& x0);

}  // namespace popovdae
