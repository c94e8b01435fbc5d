#include "popovdae/pencil.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "popovdae/constants.hpp"
#include "popovdae/errors.hpp"

namespace popovdae {

namespace {

constexpr std::uint32_t kProbeSeed = 0x5eed;
constexpr int kRandomProbes = 16;
constexpr double kProbeBox = 15.0;

double min_singular_value(const ComplexMatrix& M) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<ComplexMatrix> svd(M);
  return svd.singularValues().tail(1)(0);
}

double min_singular_value(const Matrix& M) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues().tail(1)(0);
}

void check_pencil_shapes(const Matrix& E, const Matrix& A) {
  if (E.rows() != E.cols() || A.rows() != A.cols() || E.rows() != A.rows())
    throw DimensionMismatch("pencil: E and A must be square and equally sized");
  if (!E.allFinite() || !A.allFinite())
    throw InvalidInput("pencil: E and A must have finite entries");
}

}  // namespace

void DescriptorSystem::validate() const {
  check_pencil_shapes(E, A);
  if (B.rows() != A.rows()) throw DimensionMismatch("system: B must have n rows");
  if (C.cols() != A.cols()) throw DimensionMismatch("system: C must have n columns");
  if (B.cols() < 1 || C.rows() < 1)
    throw DimensionMismatch("system: B and C must be non-empty");
  if (!B.allFinite() || !C.allFinite())
    throw InvalidInput("system: B and C must have finite entries");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n()))
    throw DimensionMismatch("system: labels must have one entry per state");
}

std::vector<Complex> probe_points() { return probe_points(kProbeSeed); }

std::vector<Complex> probe_points(std::uint32_t seed) {
  std::vector<Complex> pts = {{0, 0}, {1, 0}, {-1, 0}, {2, 0}, {-2, 0}, {10, 0}, {-10, 0}};
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-kProbeBox, kProbeBox);
  for (int i = 0; i < kRandomProbes; ++i) {
    const double re = dist(rng), im = dist(rng);
    pts.emplace_back(re, im);
  }
  return pts;
}

std::vector<double> real_probe_points() {
  std::vector<double> pts = {0, 1, -1, 2, -2, 10, -10};
  std::mt19937 rng(kProbeSeed);
  std::uniform_real_distribution<double> dist(-kProbeBox, kProbeBox);
  for (int i = 0; i < kRandomProbes; ++i) pts.push_back(dist(rng));
  return pts;
}

double pencil_scale(const Matrix& E, const Matrix& A, Complex lambda) {
  const double s = A.norm() + std::abs(lambda) * E.norm();
  return s > 0 ? s : std::numeric_limits<double>::min();
}

RegularityReport regularity_report(const Matrix& E, const Matrix& A) {
  return regularity_report(E, A, kProbeSeed);
}

RegularityReport regularity_report(const Matrix& E, const Matrix& A, std::uint32_t seed) {
  check_pencil_shapes(E, A);
  RegularityReport rep;
  bool have_lambda0 = false;
  for (const Complex lambda : probe_points(seed)) {
    const ComplexMatrix M = A.cast<Complex>() - lambda * E.cast<Complex>();
    const double smin = min_singular_value(M);
    const bool inv = smin > tol::eps_reg * pencil_scale(E, A, lambda);
    rep.probes.push_back({lambda, smin, inv});
    if (inv) {
      rep.regular = true;
      if (!have_lambda0 && lambda.imag() == 0.0) {
        rep.lambda0 = lambda.real();
        have_lambda0 = true;
      }
    }
  }
  if (rep.regular && !have_lambda0) {
    // Only complex probes worked; fall back to the extended real list.
    rep.lambda0 = find_real_resolvent_point(E, A);
  }
  return rep;
}

double find_real_resolvent_point(const Matrix& E, const Matrix& A) {
  check_pencil_shapes(E, A);
  for (const double lambda : real_probe_points()) {
    const Matrix M = A - lambda * E;
    if (min_singular_value(M) > tol::eps_reg * pencil_scale(E, A, lambda)) return lambda;
  }
  throw NoResolventPoint("no probe point with A - lambda E invertible; pencil may be singular");
}

Pencil::Pencil(Matrix E_, Matrix A_) : E(std::move(E_)), A(std::move(A_)) {
  check_pencil_shapes(E, A);
  lambda0 = find_real_resolvent_point(E, A);
}

namespace {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> resolvent_impl(const Pencil& p,
                                                                     Scalar lambda) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Mat M = p.A.cast<Scalar>() - lambda * p.E.cast<Scalar>();
  const double smin = min_singular_value(M);
  if (smin <= tol::eps_reg * pencil_scale(p.E, p.A, Complex(lambda)))
    throw SingularAtLambda("A - lambda E singular at the requested lambda");
  return M.partialPivLu().solve(Mat::Identity(p.n(), p.n()));
}

}  // namespace

Matrix resolvent(const Pencil& p, double lambda) { return resolvent_impl<double>(p, lambda); }

ComplexMatrix resolvent(const Pencil& p, Complex lambda) {
  return resolvent_impl<Complex>(p, lambda);
}

Matrix pseudo_resolvent_right(const Pencil& p, double lambda) {
  return resolvent(p, lambda) * p.E;
}

ComplexMatrix pseudo_resolvent_right(const Pencil& p, Complex lambda) {
  return resolvent(p, lambda) * p.E.cast<Complex>();
}

Matrix pseudo_resolvent_left(const Pencil& p, double lambda) {
  return p.E * resolvent(p, lambda);
}

ComplexMatrix pseudo_resolvent_left(const Pencil& p, Complex lambda) {
  return p.E.cast<Complex>() * resolvent(p, lambda);
}

double verify_resolvent_identity(const Pencil& p, Complex lambda, Complex mu) {
  const ComplexMatrix Rl = pseudo_resolvent_right(p, lambda);
  const ComplexMatrix Rm = pseudo_resolvent_right(p, mu);
  const ComplexMatrix D = Rl - Rm;
  const Complex s = lambda - mu;
  const double r1 = (D - s * (Rl * Rm)).norm();
  const double r2 = (D - s * (Rm * Rl)).norm();
  return std::max(r1, r2);
}

IndexTestResult index_at_most_one(const Pencil& p) {
  const double lambda0 = p.lambda0;
  const Matrix R = pseudo_resolvent_right(p, lambda0);
  const Matrix R2 = R * R;
  Eigen::JacobiSVD<Matrix> svd(R);
  Eigen::JacobiSVD<Matrix> svd2(R2);
  const double smax = p.n() == 0 ? 0.0 : svd.singularValues()(0);
  int rank = 0, rank2 = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol::eps_rank * smax) ++rank;
  // The natural scale of R^2 is smax^2; using |R^2| itself would invent rank
  // out of roundoff when R^2 ~ 0 (nilpotent pseudo-resolvents).
  for (int i = 0; i < svd2.singularValues().size(); ++i)
    if (svd2.singularValues()(i) > tol::eps_rank * smax * smax) ++rank2;
  return {rank == rank2, rank, rank2, lambda0};
}

GrowthEstimate growth_bound_estimate(const Pencil& p, std::vector<double> omega_candidates,
                                     const std::vector<double>& lambda_grid) {
  if (omega_candidates.empty() || lambda_grid.empty())
    throw InvalidParams("growth_bound_estimate: empty candidate or grid list");
  std::sort(omega_candidates.begin(), omega_candidates.end());
  std::vector<double> norms(lambda_grid.size());
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const Matrix R = pseudo_resolvent_right(p, lambda_grid[i]);
    norms[i] = R.rows() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(R).singularValues()(0);
  }
  const double lambda_min = *std::min_element(lambda_grid.begin(), lambda_grid.end());
  for (const double omega : omega_candidates) {
    if (lambda_min <= omega) continue;  // grid must lie strictly right of omega
    double M = 0.0;
    for (std::size_t i = 0; i < lambda_grid.size(); ++i)
      M = std::max(M, (lambda_grid[i] - omega) * norms[i]);
    if (std::isfinite(M)) return {M, omega};
  }
  throw InvalidParams("growth_bound_estimate: no omega candidate lies below the sample grid");
}

ComplexMatrix transfer_function(const DescriptorSystem& sys, Complex z) {
  sys.validate();
  const ComplexMatrix M = z * sys.E.cast<Complex>() - sys.A.cast<Complex>();
  const double smin = min_singular_value(M);
  if (smin <= tol::eps_reg * pencil_scale(sys.E, sys.A, z))
    throw SingularAtLambda("z E - A singular at the requested z");
  return sys.C.cast<Complex>() * M.partialPivLu().solve(sys.B.cast<Complex>());
}

}  // namespace popovdae
