#pragma once

#include <stdexcept>
#include <string>

namespace popovdae {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define POPOVDAE_DEFINE_ERROR(NAME)      \
  struct NAME : Error {                  \
    using Error::Error;                  \
  }

// A - lambda E is (numerically) singular at a point where it must not be.
POPOVDAE_DEFINE_ERROR(SingularAtLambda);
// No probe point produced an invertible A - lambda E; pencil looks non-regular.
POPOVDAE_DEFINE_ERROR(NoResolventPoint);
// ker and ran of the pseudo-resolvent do not split the space: index > 1.
POPOVDAE_DEFINE_ERROR(IndexTooHigh);
// Matrix/vector shapes do not line up.
POPOVDAE_DEFINE_ERROR(DimensionMismatch);
// Two time grids that must agree do not.
POPOVDAE_DEFINE_ERROR(GridMismatch);
// Lyapunov equation has no (unique) solution.
POPOVDAE_DEFINE_ERROR(LyapunovSingular);
// Operation requires 0 to be a resolvent point of the original pencil.
POPOVDAE_DEFINE_ERROR(Inapplicable);
// Popov operator not coercive for the requested weights.
POPOVDAE_DEFINE_ERROR(NotCoercive);
// Infinite-horizon problem on a system that is not exponentially stable.
POPOVDAE_DEFINE_ERROR(NotExponentiallyStable);
// Hypotheses of the Neumann output-feedback construction are violated.
POPOVDAE_DEFINE_ERROR(HypothesisViolated);
// Neumann series failed to contract (should be impossible under the hypotheses).
POPOVDAE_DEFINE_ERROR(NoContraction);
// Two routes that must agree disagreed; a bug, not a user error.
POPOVDAE_DEFINE_ERROR(InternalInconsistency);
// Malformed user input (JSON/CSV/CLI values).
POPOVDAE_DEFINE_ERROR(InvalidInput);
// Model parameters out of range.
POPOVDAE_DEFINE_ERROR(InvalidParams);
// Unknown canonical fixture name.
POPOVDAE_DEFINE_ERROR(UnknownFixture);

#undef POPOVDAE_DEFINE_ERROR

}  // namespace popovdae
