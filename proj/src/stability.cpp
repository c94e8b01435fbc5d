#include "popovdae/stability.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "popovdae/constants.hpp"
#include "popovdae/errors.hpp"
#include "popovdae/kernels.hpp"

namespace popovdae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kKroneckerMaxDim = 50;  // switch-over point between the two routes
constexpr double kConvergedTail = 1e-6;

void check_lyapunov_args(const Matrix& A, const Matrix& W) {
  if (A.rows() != A.cols()) throw DimensionMismatch("solve_lyapunov: A must be square");
  if (W.rows() != A.rows() || W.cols() != A.cols())
    throw DimensionMismatch("solve_lyapunov: W must match A");
}

// The equation A^T Q + Q A = -W is uniquely solvable iff no two eigenvalues
// of A sum to zero; reject near-violations up front, route-independently.
void check_spectrum_separation(const Matrix& A) {
  if (A.rows() == 0) return;
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1e-300, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    for (Eigen::Index j = i; j < ev.size(); ++j)
      if (std::abs(ev(i) + ev(j)) <= 1e-12 * scale)
        throw LyapunovSingular("eigenvalue pair of A sums to zero");
}

double symmetric_lambda_max(const Matrix& S) {
  if (S.rows() == 0) return -kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double symmetric_lambda_min(const Matrix& S) {
  if (S.rows() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool positive_definite(const Matrix& Q) {
  if (Q.rows() == 0) return true;  // vacuous
  return symmetric_lambda_min(Q) > 0.0;
}

}  // namespace

namespace detail {

Matrix lyapunov_kron(const Matrix& A, const Matrix& W) {
  check_lyapunov_args(A, W);
  const Eigen::Index r = A.rows();
  if (r == 0) return Matrix(0, 0);
  const Matrix I = Matrix::Identity(r, r);
  const Matrix K =
      Eigen::kroneckerProduct(I, A.transpose()).eval() + Eigen::kroneckerProduct(A.transpose(), I).eval();
  Eigen::PartialPivLU<Matrix> lu(K);
  Vector w(r * r);
  for (Eigen::Index j = 0; j < r; ++j) w.segment(j * r, r) = -W.col(j);
  const Vector q = lu.solve(w);
  Matrix Q(r, r);
  for (Eigen::Index j = 0; j < r; ++j) Q.col(j) = q.segment(j * r, r);
  Q = 0.5 * (Q + Q.transpose()).eval();
  const double res = (A.transpose() * Q + Q * A + W).norm();
  if (!Q.allFinite() || res > 1e-8 * std::max(1.0, W.norm() + 2.0 * A.norm() * Q.norm()))
    throw LyapunovSingular("Kronecker route produced an inconsistent solution");
  return Q;
}

Matrix lyapunov_schur(const Matrix& A, const Matrix& W) {
  check_lyapunov_args(A, W);
  const Eigen::Index r = A.rows();
  if (r == 0) return Matrix(0, 0);
  Eigen::RealSchur<Matrix> schur(A);
  const Matrix U = schur.matrixU();
  const Matrix T = schur.matrixT();

  // Block partition aligned with the 2x2 bumps of the quasi-triangular T.
  std::vector<Eigen::Index> start;
  for (Eigen::Index i = 0; i < r;) {
    start.push_back(i);
    i += (i + 1 < r && T(i + 1, i) != 0.0) ? 2 : 1;
  }
  start.push_back(r);
  const int nb = static_cast<int>(start.size()) - 1;

  const Matrix C = -(U.transpose() * W * U);
  Matrix Y = Matrix::Zero(r, r);
  for (int J = 0; J < nb; ++J) {
    const Eigen::Index j0 = start[J], jw = start[J + 1] - j0;
    for (int I = 0; I < nb; ++I) {
      const Eigen::Index i0 = start[I], iw = start[I + 1] - i0;
      Matrix rhs = C.block(i0, j0, iw, jw);
      if (i0 > 0)
        rhs.noalias() -= T.block(0, i0, i0, iw).transpose() * Y.block(0, j0, i0, jw);
      if (j0 > 0) rhs.noalias() -= Y.block(i0, 0, iw, j0) * T.block(0, j0, j0, jw);
      // Small Sylvester T_II^T X + X T_JJ = rhs via its Kronecker form.
      const Matrix Tii = T.block(i0, i0, iw, iw);
      const Matrix Tjj = T.block(j0, j0, jw, jw);
      Matrix K = Eigen::kroneckerProduct(Matrix::Identity(jw, jw), Tii.transpose()).eval() +
                 Eigen::kroneckerProduct(Tjj.transpose(), Matrix::Identity(iw, iw)).eval();
      Eigen::FullPivLU<Matrix> lu(K);
      if (!lu.isInvertible()) throw LyapunovSingular("Schur route hit a singular diagonal block");
      Vector vr(iw * jw);
      for (Eigen::Index c = 0; c < jw; ++c) vr.segment(c * iw, iw) = rhs.col(c);
      const Vector vx = lu.solve(vr);
      for (Eigen::Index c = 0; c < jw; ++c) Y.block(i0, j0 + c, iw, 1) = vx.segment(c * iw, iw);
    }
  }
  Matrix Q = U * Y * U.transpose();
  Q = 0.5 * (Q + Q.transpose()).eval();
  const double res = (A.transpose() * Q + Q * A + W).norm();
  if (!Q.allFinite() || res > 1e-8 * std::max(1.0, W.norm() + 2.0 * A.norm() * Q.norm()))
    throw LyapunovSingular("Schur route produced an inconsistent solution");
  return Q;
}

}  // namespace detail

Matrix solve_lyapunov(const Matrix& A, const Matrix& W) {
  check_lyapunov_args(A, W);
  check_spectrum_separation(A);
  return A.rows() <= kKroneckerMaxDim ? detail::lyapunov_kron(A, W)
                                      : detail::lyapunov_schur(A, W);
}

Matrix pseudo_resolvent_lyapunov(const SpectralDecomposition& d) {
  if (d.shift != 0.0)
    throw Inapplicable("pseudo-resolvent Lyapunov test needs 0 in rho(E, A)");
  if (d.r == 0) return Matrix(0, 0);
  const Matrix S = d.A_R.partialPivLu().solve(Matrix::Identity(d.r, d.r));
  return solve_lyapunov(S, Matrix(S.transpose() * S));
}

L2DecayReport l2_decay(const SpectralDecomposition& d, double horizon, int samples) {
  if (!(horizon > 0.0)) throw InvalidParams("l2_decay: horizon must be positive");
  if (samples < 4) throw InvalidParams("l2_decay: need at least 4 samples");
  if (samples % 2 != 0) ++samples;  // so horizon/2 falls on a sample point
  const double h = horizon / samples;
  std::vector<double> times(samples + 1);
  for (int j = 0; j <= samples; ++j) times[j] = j * h;
  const auto tbl = kernels::matexp_table(d.A_R, times);
  const Matrix G = d.V_R.transpose() * d.P;  // r x n

  L2DecayReport rep;
  rep.integrals.assign(d.n, 0.0);
  rep.tail_fraction.assign(d.n, 0.0);
  std::vector<double> half(d.n, 0.0);
  for (int j = 0; j <= samples; ++j) {
    const double w = (j == 0 || j == samples) ? 0.5 : 1.0;
    const Matrix MG = tbl[j] * G;
    for (int i = 0; i < d.n; ++i) {
      const double e = MG.col(i).squaredNorm();
      rep.integrals[i] += w * h * e;
      if (j <= samples / 2) half[i] += ((j == 0 || j == samples / 2) ? 0.5 : 1.0) * h * e;
    }
  }
  rep.converged = true;
  for (int i = 0; i < d.n; ++i) {
    rep.tail_fraction[i] =
        std::abs(rep.integrals[i] - half[i]) / std::max(rep.integrals[i], 1e-300);
    if (rep.integrals[i] > 0 && rep.tail_fraction[i] > kConvergedTail) rep.converged = false;
  }
  return rep;
}

double hinf_bound(const std::function<ComplexMatrix(Complex)>& map,
                  const std::vector<Complex>& grid) {
  if (grid.empty()) throw InvalidParams("hinf_bound: empty sample grid");
  double sup = 0.0;
  for (const Complex z : grid) {
    double s;
    try {
      const ComplexMatrix M = map(z);
      s = M.rows() == 0 ? 0.0 : Eigen::JacobiSVD<ComplexMatrix>(M).singularValues()(0);
    } catch (const SingularAtLambda&) {
      return kInf;
    }
    if (!(s < 1.0 / tol::eps_reg)) return kInf;
    sup = std::max(sup, s);
  }
  return sup;
}

DissipativityFlags check_dissipativity(const Pencil& p, double omega) {
  const Matrix& E = p.E;
  const Matrix& A = p.A;
  const Matrix Gr = 0.5 * (E.transpose() * A + A.transpose() * E) + omega * E.transpose() * E;
  const Matrix Gl = 0.5 * (E * A.transpose() + A * E.transpose()) + omega * E * E.transpose();
  const double scale =
      std::max(1.0, E.norm() * A.norm() + std::abs(omega) * E.norm() * E.norm());
  DissipativityFlags f{};
  f.lambda_max_right = p.n() == 0 ? -kInf : symmetric_lambda_max(Gr);
  f.lambda_max_left = p.n() == 0 ? -kInf : symmetric_lambda_max(Gl);
  f.right = f.lambda_max_right <= tol::eps_psd * scale;
  f.left = f.lambda_max_left <= tol::eps_psd * scale;
  return f;
}

namespace {

double spectral_abscissa_of(const SpectralDecomposition& d) {
  if (d.r == 0) return -kInf;
  Eigen::EigenSolver<Matrix> es(d.A_R, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

std::vector<Complex> verdict_hinf_grid(const SpectralDecomposition& d) {
  std::vector<Complex> grid;
  grid.emplace_back(0.0, 0.0);
  for (int k = -6; k <= 6; ++k) {
    const double nu = std::pow(10.0, 0.5 * k);
    grid.emplace_back(0.0, nu);
    grid.emplace_back(0.0, -nu);
  }
  for (int k = -4; k <= 4; ++k) {
    const double s = std::pow(10.0, 0.5 * k);
    grid.emplace_back(s, 0.0);
    grid.emplace_back(s, s);
  }
  // Guarantee detection of right-half-plane spectrum: sample at the
  // eigenvalues of A_R themselves (they are poles of the pseudo-resolvent).
  if (d.r > 0) {
    Eigen::EigenSolver<Matrix> es(d.A_R, false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const Complex ev = es.eigenvalues()(i);
      if (ev.real() >= -tol::eps_stab) {
        grid.push_back(ev);
        grid.emplace_back(ev.real(), 0.0);
      }
    }
  }
  return grid;
}

// Largest omega >= 0 with both dissipativity inequalities satisfied, by
// bisection (the feasible set is an interval: E^T E, E E^T >= 0).
std::pair<bool, double> dissipativity_witness(const Pencil& p) {
  auto ok = [&](double w) {
    const auto f = check_dissipativity(p, w);
    return f.right && f.left;
  };
  if (!ok(0.0)) return {false, 0.0};
  double lo = 0.0, hi = 1.0;
  while (ok(hi)) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e12) return {lo > 0.0, lo};  // effectively unconstrained (E ~ 0)
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return {lo > 0.0, lo};
}

}  // namespace

StabilityReport stability_verdict(const SpectralDecomposition& d, const Pencil& p) {
  StabilityReport rep;
  rep.spectral_abscissa = spectral_abscissa_of(d);
  const bool stable = rep.spectral_abscissa < -tol::eps_stab;
  rep.marginal = std::isfinite(rep.spectral_abscissa) &&
                 std::abs(rep.spectral_abscissa) <= tol::eps_stab;
  rep.verdict = stable;

  try {
    rep.lyapunov_Q = solve_lyapunov(d.A_R, Matrix::Identity(d.r, d.r));
    rep.lyapunov_pd = positive_definite(*rep.lyapunov_Q);
  } catch (const LyapunovSingular&) {
  }
  if (d.shift == 0.0) {
    try {
      rep.pseudo_lyapunov_Q = pseudo_resolvent_lyapunov(d);
      rep.pseudo_lyapunov_pd = positive_definite(*rep.pseudo_lyapunov_Q);
    } catch (const LyapunovSingular&) {
    }
  }

  const double rate = std::isfinite(rep.spectral_abscissa)
                          ? std::max(std::abs(rep.spectral_abscissa), 1e-3)
                          : 1.0;
  const double horizon = stable ? std::min(40.0 / rate, 1e4) : 10.0;
  const auto l2 = l2_decay(d, horizon, 1200);
  rep.l2_integrals = l2.integrals;
  rep.l2_converged = l2.converged;

  rep.hinf = hinf_bound(
      [&](Complex z) { return pseudo_resolvent_right(p, z); }, verdict_hinf_grid(d));

  const auto [diss, w] = dissipativity_witness(p);
  rep.dissipative = diss;
  rep.omega_witness = w;

  if (!rep.marginal) {
    auto expect = [&](bool value, const char* what) {
      if (value != stable)
        throw InternalInconsistency(std::string("stability criteria disagree: ") + what);
    };
    if (rep.lyapunov_pd) expect(*rep.lyapunov_pd, "Lyapunov definiteness");
    if (rep.pseudo_lyapunov_pd)
      expect(*rep.pseudo_lyapunov_pd, "pseudo-resolvent Lyapunov definiteness");
    expect(rep.l2_converged, "L2 decay convergence");
    expect(std::isfinite(rep.hinf), "H-infinity boundedness");
    // Dissipativity with a positive omega is sufficient (not necessary).
    if (rep.dissipative && rep.omega_witness > tol::eps_stab && !stable)
      throw InternalInconsistency("stability criteria disagree: dissipativity vs abscissa");
  }
  return rep;
}

}  // namespace popovdae
