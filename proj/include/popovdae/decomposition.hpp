#pragma once

#include <optional>

#include "popovdae/pencil.hpp"

namespace popovdae {

// Splitting X = X_R (+) X_K of an index-<=1 regular pencil, where
// X_R = ran R_r(lambda0) carries a classical dynamic part and
// X_K = ker R_r(lambda0) is purely algebraic. P projects onto X_R along X_K.
// A_R is the generator of the reduced flow expressed in the orthonormal
// column basis V_R (so the degenerate semigroup is
// T(t) = V_R exp(A_R t) V_R^T P, with T(0) = P).
struct SpectralDecomposition {
  Matrix P;    // n x n oblique projector
  Matrix V_R;  // n x r, orthonormal basis of X_R
  Matrix V_K;  // n x (n - r), orthonormal basis of X_K
  Matrix A_R;  // r x r generator matrix (coordinates of V_R)
  double lambda_ref = 0.0;  // resolvent point the split was computed at
  double shift = 0.0;       // sigma: nonzero iff 0 was not a resolvent point
  int n = 0;
  int r = 0;
};

// Builds the splitting. Prefers lambda0 = 0; if 0 is not a resolvent point
// the pencil is probed for the first usable real point sigma and the work is
// done on (E, A - sigma E), translating the generator back by +sigma I.
// lambda_override forces a specific resolvent point (used to check that the
// splitting does not depend on it). Throws IndexTooHigh when
// rank R_r != rank R_r^2.
SpectralDecomposition spectral_decomposition(const Pencil& p,
                                             std::optional<double> lambda_override = {});

// Degenerate semigroup T(t) as a dense n x n matrix; T(0) = P and T(t)
// vanishes on X_K for every t.
Matrix degenerate_semigroup(const SpectralDecomposition& d, double t);

struct SemigroupLawResiduals {
  double semigroup;   // |T(t+s) - T(t) T(s)|
  double commutation; // |R_r(lambda) T(t) - T(t) R_r(lambda)|
  double projector;   // |(I - T(0)) T(t)|
};

SemigroupLawResiduals verify_semigroup_laws(const SpectralDecomposition& d, const Pencil& p,
                                            double t, double s, Complex lambda);

}  // namespace popovdae
