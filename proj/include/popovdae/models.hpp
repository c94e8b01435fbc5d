#pragma once

#include "popovdae/pencil.hpp"

namespace popovdae {

// Heat diffusion on (0, L) with Dirichlet ends, written as a
// differential-algebraic system in the temperature/flux pair: the flux
// equation 0 = -D T - j is kept algebraic instead of being eliminated.
// Interior grid points xi_i = i h, i = 1..N, h = L / (N + 1).
struct HeatParams {
  int N = 10;          // interior grid points
  double L = 1.0;      // rod length
  double alpha = 1.0;  // diffusivity (= conductivity / heat capacity)
  double k = 1.0;      // conductivity (scales the physical flux; the reduced
                       // equations below are written in diffusive units)
  double iu_lo = 0.0, iu_hi = 0.0;  // actuation interval for the source term
  double iy_lo = 0.0, iy_hi = 0.0;  // observation interval

  void validate() const;
};

// Backward-difference matrix D_d (N x N): (D_d v)_i = (v_i - v_{i-1}) / h
// with v_0 = 0. Its transpose is the negated forward difference with v_{N+1}=0.
Matrix heat_difference_matrix(const HeatParams& hp);

// Descriptor realisation
//   E = blkdiag(alpha^{-1} I_N, 0),   A = [[0, D_d^T], [-D_d, -I_N]],
//   B = [0; 1_{I_U}],                 C = [1_{I_Y}, 0],
// states (T_1..T_N, j_1..j_N). The indicators select grid points strictly
// inside the configured intervals.
DescriptorSystem build_heat_dae(const HeatParams& hp);

// Largest real part over the pencil spectrum: -alpha * mu_min(D_d^T D_d).
double heat_spectral_abscissa(const HeatParams& hp);

// Residual |(A - lambda E)^{-1} E - X(lambda)| of the closed-form resolvent
//   X(lambda) = [[ -(lambda I + alpha D_d^T D_d)^{-1},      0 ],
//                [ D_d (lambda I + alpha D_d^T D_d)^{-1},   0 ]],
// obtained by eliminating the flux block; checks the dense solve against it.
double verify_heat_resolvent(const HeatParams& hp, double lambda);

// Canonical small systems used across the test-suite and CLI:
//   FIX-A   / decoupled-stable    diag pencil, one ODE + one algebraic state
//   FIX-B   / decoupled-unstable  same with the ODE state unstable
//   FIX-C   / coupled-dae         coupled 2x2 with nontrivial projector
//   FIX-ODE / scalar-ode          E = 1, A = -1 sanity case
//   FIX-NILPOTENT / nilpotent     index-2 pencil every index-1 path rejects
DescriptorSystem canonical_fixture(const std::string& name);

}  // namespace popovdae
