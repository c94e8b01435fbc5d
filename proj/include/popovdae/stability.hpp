#pragma once

#include <functional>
#include <optional>

#include "popovdae/decomposition.hpp"
#include "popovdae/pencil.hpp"

namespace popovdae {

// Solves A^T Q + Q A = -W for symmetric W. Uses a dense Kronecker
// linearisation for small problems and a real-Schur (Bartels-Stewart) solve
// for larger ones; the two routes are cross-checked in the tests. Throws
// LyapunovSingular when the equation is (numerically) singular, i.e. some
// pair of eigenvalues of A sums to ~0.
Matrix solve_lyapunov(const Matrix& A, const Matrix& W);

namespace detail {
Matrix lyapunov_kron(const Matrix& A, const Matrix& W);
Matrix lyapunov_schur(const Matrix& A, const Matrix& W);
}  // namespace detail

// Pseudo-resolvent Lyapunov test: with S the matrix of R_r(0) restricted to
// X_R (the inverse of A_R), solves S^T Q + Q S = -S^T S. Q is positive
// definite iff the reduced flow is exponentially stable. Requires
// 0 in rho(E, A) (decomposition built without shift); otherwise Inapplicable.
Matrix pseudo_resolvent_lyapunov(const SpectralDecomposition& d);

struct L2DecayReport {
  std::vector<double> integrals;  // trapezoid of |T(t) e_i|^2 over [0, horizon]
  std::vector<double> tail_fraction;  // |I(horizon) - I(horizon/2)| / max(I, eps)
  bool converged = false;             // all tails below the convergence threshold
};

// Energy integrals along the degenerate semigroup for every standard basis
// vector, sampled with the trapezoid rule on `samples` subintervals.
L2DecayReport l2_decay(const SpectralDecomposition& d, double horizon, int samples);

// Sampled sup of the spectral norm of `map` over `grid`. Returns +infinity
// when a grid point is (numerically) in the spectrum — the map throws
// SingularAtLambda — or the norm exceeds 1/eps_reg. Sampled, not certified.
double hinf_bound(const std::function<ComplexMatrix(Complex)>& map,
                  const std::vector<Complex>& grid);

struct DissipativityFlags {
  bool right;  // (1/2)(E^T A + A^T E) + omega E^T E <= 0
  bool left;   // (1/2)(E A^T + A E^T) + omega E E^T <= 0
  double lambda_max_right;
  double lambda_max_left;
};

// Coefficient-level dissipativity test at a given omega.
DissipativityFlags check_dissipativity(const Pencil& p, double omega);

struct StabilityReport {
  double spectral_abscissa;  // max Re eig(A_R); -inf when r = 0
  bool verdict = false;      // exponentially stable
  bool marginal = false;     // |abscissa| <= eps_stab: no criterion asserted

  std::optional<Matrix> lyapunov_Q;         // A_R^T Q + Q A_R = -I, when solvable
  std::optional<Matrix> pseudo_lyapunov_Q;  // when 0 in rho(E, A)
  std::optional<bool> lyapunov_pd;
  std::optional<bool> pseudo_lyapunov_pd;

  std::vector<double> l2_integrals;
  bool l2_converged = false;

  double hinf = 0.0;  // sampled bound for |R_r| over the closed right half-plane

  bool dissipative = false;  // both inequalities hold for some omega > 0
  double omega_witness = 0.0;
};

// Runs every applicable characterisation of exponential stability and checks
// that they agree; disagreement raises InternalInconsistency (it would be a
// bug, not a property of the input). Marginal pencils skip the
// cross-assertions.
StabilityReport stability_verdict(const SpectralDecomposition& d, const Pencil& p);

}  // namespace popovdae
