#pragma once

#include "popovdae/decomposition.hpp"
#include "popovdae/mild.hpp"
#include "popovdae/pencil.hpp"

namespace popovdae {

// Quadratic cost weights on a time grid:
//   J(u, x0) = Int_0^{t_f} [ y^T Q(t) y + 2 u^T N(t) y + u^T R_w(t) u ] dt
// held piecewise constant per step. Q_k and R_k must be symmetric.
struct WeightSchedule {
  TimeGrid grid;
  std::vector<Matrix> Q;  // m blocks, n_y x n_y
  std::vector<Matrix> N;  // m blocks, n_u x n_y
  std::vector<Matrix> R;  // m blocks, n_u x n_u

  int n_y() const { return Q.empty() ? 0 : static_cast<int>(Q[0].rows()); }
  int n_u() const { return R.empty() ? 0 : static_cast<int>(R[0].rows()); }

  static WeightSchedule constant(const TimeGrid& g, const Matrix& Q, const Matrix& N,
                                 const Matrix& R);
  static WeightSchedule per_step(const TimeGrid& g, std::vector<Matrix> Q,
                                 std::vector<Matrix> N, std::vector<Matrix> R);

  bool has_nonzero_N() const;
  void validate() const;
};

// Split input map through A^{-1}: B_hat_0 = (I - P) A^{-1} B feeds through to
// the output instantly (algebraic part), B_hat_1 = P A^{-1} B drives the
// dynamic part. Requires 0 in rho(E, A).
struct InputMaps {
  Matrix B0;  // n x n_u
  Matrix B1;  // n x n_u
};

InputMaps input_maps(const SpectralDecomposition& d, const DescriptorSystem& sys);

// Free-response sampling operator: row block k is C T(t_k^mid), stacked
// (m n_y) x n, with t_k^mid the interval midpoints.
Matrix assemble_psi(const SpectralDecomposition& d, const DescriptorSystem& sys,
                    const TimeGrid& grid);

// Causal input->output operator on piecewise-constant signals, stacked
// (m n_y) x (m n_u). Block (k, j):
//   j < k : C [e^{A_R (t_k^mid - t_j)} - e^{A_R (t_k^mid - t_{j+1})}] B_hat_1
//   j = k : C [e^{A_R dt/2} - I] B_hat_1 - C B_hat_0
//   j > k : 0
// (lifted through V_R); block-Toeplitz since the system is time-invariant.
Matrix assemble_io_operator(const SpectralDecomposition& d, const DescriptorSystem& sys,
                            const TimeGrid& grid);

struct PopovAssembly {
  TimeGrid grid;
  int n = 0, n_y = 0, n_u = 0;
  Matrix Psi;    // (m n_y) x n
  Matrix F;      // (m n_y) x (m n_u)
  Matrix popov;  // (m n_u) x (m n_u): R_bar + N_bar F + (N_bar F)^T + F^T Q_bar F
  double symmetry_drift = 0.0;  // relative asymmetry before symmetrisation
};

// Assembles Psi, F and the Popov matrix for the given weights. The Popov
// matrix is checked for symmetry (drift <= 1e-10 relative, else
// InternalInconsistency) and then symmetrised.
PopovAssembly assemble_popov(const SpectralDecomposition& d, const DescriptorSystem& sys,
                             const WeightSchedule& w);

// Smallest eigenvalue of the (symmetrised) Popov matrix: the coercivity
// margin of <u, popov u> relative to |u|^2 (the dt factors cancel).
double coercivity_margin(const Matrix& popov);

// Discrete cost J(u, x0) for the given assembly and weights.
double evaluate_cost(const PopovAssembly& pa, const WeightSchedule& w, const Vector& x0,
                     const Signal& u);

struct LqrSolution {
  Signal u_opt;         // optimal input (per-interval values)
  Signal y_opt;         // optimal output samples at interval midpoints
  Trajectory x_opt;     // optimal state trajectory at nodes
  double cost = 0.0;    // <P x0, x0> = J(u_opt, x0)
  Matrix riccati_P;     // n x n Riccati-like cost operator
  double coercivity_margin = 0.0;
  double consistency_gap = 0.0;  // from the mild solve of x_opt
  double horizon = 0.0;          // t_f actually used
  double tail_bound = 0.0;       // infinite-horizon truncation bound (0 if finite)
};

// Finite-horizon LQ-optimal control
//   u_opt = -popov^{-1} (F^T Q_bar + N_bar) Psi x0,
//   P     = dt (Psi^T Q_bar Psi - L^T popov^{-1} L),  L = (F^T Q_bar + N_bar) Psi,
// solved with a Cholesky factorisation after the coercivity check
// (margin <= eps_coer raises NotCoercive).
LqrSolution solve_finite_horizon(const SpectralDecomposition& d, const DescriptorSystem& sys,
                                 const WeightSchedule& w, const Vector& x0);

struct NeumannFeedback {
  Matrix K;  // (m n_u) x (m n_y): u = -K y reproduces the optimal input
  double certified_ratio = 0.0;  // |F^T Q F| / (eps_R + |F^T Q F|) < 1
  std::vector<double> increment_norms;
  int iterations = 0;
};

// Output-feedback representation of the optimal input via the Neumann series
//   K = sum_k (popov^{-1} F^T Q_bar F)^k popov^{-1} F^T Q_bar,
// truncated when the increment norm falls below `tol`. Hypotheses: N = 0,
// every R_k >= eps I with eps > 0, every Q_k >= 0 (HypothesisViolated
// otherwise); the certified contraction ratio is then < 1 by construction.
NeumannFeedback output_feedback_neumann(const PopovAssembly& pa, const WeightSchedule& w,
                                        double tol);

// Infinite-horizon LQ via truncation: requires an exponentially stable pencil
// (NotExponentiallyStable otherwise), picks t_f so that the decay-based tail
// bound M^2 e^{-2 w t_f} (|Q| + |N| + 1) |x0|^2 drops below tail_tol, and
// solves the finite-horizon problem on `steps` intervals.
LqrSolution solve_infinite_horizon(const SpectralDecomposition& d,
                                   const DescriptorSystem& sys, const Matrix& Q,
                                   const Matrix& N, const Matrix& R, const Vector& x0,
                                   double tail_tol, int steps);

// Exponential shift: the problem for (E, A - omega E) with weights scaled by
// e^{2 omega t} (sampled at midpoints) is equivalent to the original; map the
// transformed input back with unshift_input (u = e^{omega t} u_omega).
std::pair<DescriptorSystem, WeightSchedule> shift_transform(const DescriptorSystem& sys,
                                                            const WeightSchedule& w,
                                                            double omega);
Signal unshift_input(const Signal& u_shifted, double omega);

// State-feedback embedding u = u_F + F x: dynamics map A + B F, stacked
// output (C x, F x), and augmented weights
//   Q_aug = [[Q, N^T], [N, R]],  N_aug = [N R],  R_aug = R,
// which reproduce the original integrand pointwise.
std::pair<DescriptorSystem, WeightSchedule> feedback_embedding(const DescriptorSystem& sys,
                                                               const WeightSchedule& w,
                                                               const Matrix& F);

}  // namespace popovdae
