#pragma once

namespace popovdae {

// Number of threads the parallel kernels may use: the OpenMP maximum, capped
// by the POPOVDAE_THREADS environment variable when it is set to a positive
// integer. Always >= 1. Thread count never changes numerical results (kernels
// partition disjoint outputs computed by partition-independent expressions),
// only wall-clock time.
int max_threads();

}  // namespace popovdae
