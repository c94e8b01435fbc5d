#include "popovdae/threading.hpp"

#include <cstdlib>
#include <string>

#ifdef POPOVDAE_HAVE_OPENMP
#include <omp.h>
#endif

namespace popovdae {

int max_threads() {
#ifdef POPOVDAE_HAVE_OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  if (const char* env = std::getenv("POPOVDAE_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1 && cap < n) n = cap;
    } catch (...) {
      // Unparseable value: ignore the cap rather than fail the computation.
    }
  }
  return n < 1 ? 1 : n;
}

}  // namespace popovdae
