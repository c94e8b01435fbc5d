#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace popovdae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Linear time-invariant descriptor system  d/dt E x = A x + B u,  y = C x.
// E is allowed to be singular; (E, A) must be a regular pencil.
struct DescriptorSystem {
  Matrix E;  // n x n
  Matrix A;  // n x n
  Matrix B;  // n x n_u
  Matrix C;  // n_y x n
  std::vector<std::string> labels;  // optional state labels, size n when present

  int n() const { return static_cast<int>(A.rows()); }
  int n_u() const { return static_cast<int>(B.cols()); }
  int n_y() const { return static_cast<int>(C.rows()); }

  // Throws DimensionMismatch / InvalidInput on inconsistent shapes or
  // non-finite entries.
  void validate() const;
};

// Matrix pencil (E, A). Construction checks shapes and probes for a resolvent
// point; a pencil with empty resolvent set (no probe point where A - lambda E
// is invertible) is rejected with NoResolventPoint.
struct Pencil {
  Matrix E;
  Matrix A;
  double lambda0 = 0.0;  // certified real resolvent point found at construction

  Pencil(Matrix E_, Matrix A_);

  int n() const { return static_cast<int>(A.rows()); }
};

struct ProbeSample {
  Complex lambda;
  double min_singular_value;
  bool invertible;
};

struct RegularityReport {
  bool regular = false;
  double lambda0 = 0.0;  // valid when regular
  std::vector<ProbeSample> probes;
};

struct GrowthEstimate {
  double M;
  double omega;
};

// Deterministic probe points: {0, 1, -1, 2, -2, 10, -10} followed by 16
// seeded pseudo-random complex points. The real prefix (plus seeded real
// points from the same generator) is what the decomposition may shift by.
// The single-argument forms draw the random tail from the given seed; the
// default seed keeps every internal use reproducible.
std::vector<Complex> probe_points();
std::vector<Complex> probe_points(std::uint32_t seed);
std::vector<double> real_probe_points();

// Scale used by singularity thresholds at a given lambda.
double pencil_scale(const Matrix& E, const Matrix& A, Complex lambda);

// Probes the pencil and reports per-point minimum singular values of
// A - lambda E. Does not throw on a non-regular pencil.
RegularityReport regularity_report(const Matrix& E, const Matrix& A);
RegularityReport regularity_report(const Matrix& E, const Matrix& A, std::uint32_t seed);

// First real probe point with A - lambda E invertible; NoResolventPoint if
// none exists.
double find_real_resolvent_point(const Matrix& E, const Matrix& A);

// (A - lambda E)^{-1}. Throws SingularAtLambda when the factor is singular
// relative to eps_reg. Real overload requires a real lambda.
Matrix resolvent(const Pencil& p, double lambda);
ComplexMatrix resolvent(const Pencil& p, Complex lambda);

// Right and left pseudo-resolvents R_r = (A - lambda E)^{-1} E and
// R_l = E (A - lambda E)^{-1}.
Matrix pseudo_resolvent_right(const Pencil& p, double lambda);
ComplexMatrix pseudo_resolvent_right(const Pencil& p, Complex lambda);
Matrix pseudo_resolvent_left(const Pencil& p, double lambda);
ComplexMatrix pseudo_resolvent_left(const Pencil& p, Complex lambda);

// Residual of the pseudo-resolvent identity
//   R(lambda) - R(mu) = (lambda - mu) R(lambda) R(mu)
// evaluated for the right family, maximised over the two orderings
// (R(lambda)R(mu) and R(mu)R(lambda) are interchangeable for a commuting
// family; both are checked).
double verify_resolvent_identity(const Pencil& p, Complex lambda, Complex mu);

struct IndexTestResult {
  bool at_most_one;
  int rank;         // rank R_r(lambda0)
  int rank_square;  // rank R_r(lambda0)^2
  double lambda0;
};

// Index <= 1 test: rank R_r(lambda0) == rank R_r(lambda0)^2, i.e.
// ker R \cap ran R = {0}.
IndexTestResult index_at_most_one(const Pencil& p);

// Sampled growth estimate: the smallest omega among omega_candidates with all
// grid points > omega, together with M = max over the grid of
// (lambda - omega) * |R_r(lambda)|_2. Reported, not certified. Throws
// SingularAtLambda if the grid touches the spectrum.
GrowthEstimate growth_bound_estimate(const Pencil& p, std::vector<double> omega_candidates,
                                     const std::vector<double>& lambda_grid);

// Transfer function G(z) = C (z E - A)^{-1} B.
ComplexMatrix transfer_function(const DescriptorSystem& sys, Complex z);

}  // namespace popovdae
