#include "popovdae/decomposition.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "popovdae/constants.hpp"
#include "popovdae/errors.hpp"

namespace popovdae {

namespace {

bool is_resolvent_point(const Pencil& p, double lambda) {
  const Matrix M = p.A - lambda * p.E;
  Eigen::JacobiSVD<Matrix> svd(M);
  const double smin = p.n() == 0 ? 1.0 : svd.singularValues().tail(1)(0);
  return smin > tol::eps_reg * pencil_scale(p.E, p.A, lambda);
}

}  // namespace

SpectralDecomposition spectral_decomposition(const Pencil& p,
                                             std::optional<double> lambda_override) {
  const int n = p.n();
  double sigma;
  if (lambda_override) {
    sigma = *lambda_override;
    if (!is_resolvent_point(p, sigma))
      throw SingularAtLambda("spectral_decomposition: requested point is in the spectrum");
  } else if (is_resolvent_point(p, 0.0)) {
    sigma = 0.0;
  } else {
    sigma = find_real_resolvent_point(p.E, p.A);
  }

  // Work with the shifted pencil (E, A - sigma E): its pseudo-resolvent at 0
  // is R_r(sigma) of the original, and ran/ker are shift-invariant.
  const Matrix R0 = pseudo_resolvent_right(p, sigma);
  Eigen::JacobiSVD<Matrix> svd(R0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = n == 0 ? 0.0 : sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol::eps_rank * smax) ++r;

  // Index <= 1 means ker R0 and ran R0 split the space, equivalently
  // rank R0 == rank R0^2.
  {
    const Matrix R2 = R0 * R0;
    Eigen::JacobiSVD<Matrix> svd2(R2);
    int r2 = 0;
    for (int i = 0; i < svd2.singularValues().size(); ++i)
      if (svd2.singularValues()(i) > tol::eps_rank * smax * smax) ++r2;
    if (r2 != r)
      throw IndexTooHigh("pencil index exceeds one: rank R_r = " + std::to_string(r) +
                         " but rank R_r^2 = " + std::to_string(r2));
  }

  SpectralDecomposition d;
  d.n = n;
  d.r = r;
  d.lambda_ref = sigma;
  d.shift = sigma;
  d.V_R = svd.matrixU().leftCols(r);
  d.V_K = svd.matrixV().rightCols(n - r);

  // Basis of the whole space; ill-conditioning here means ker and ran nearly
  // intersect, which the rank test should already have caught.
  Matrix W(n, n);
  W.leftCols(r) = d.V_R;
  W.rightCols(n - r) = d.V_K;
  Eigen::PartialPivLU<Matrix> lu(W);
  {
    Eigen::JacobiSVD<Matrix> wsvd(W);
    const double wmin = n == 0 ? 1.0 : wsvd.singularValues().tail(1)(0);
    if (wmin <= tol::eps_rank)
      throw IndexTooHigh("pencil index exceeds one: ran and ker of R_r nearly intersect");
  }
  Matrix Wx(n, n);
  Wx.leftCols(r) = d.V_R;
  Wx.rightCols(n - r).setZero();
  d.P = Wx * lu.inverse();

  // Reduced generator from the graph relation: on X_R the shifted resolvent
  // at 0 is invertible with inverse A_R_shifted; translate back by +sigma.
  const Matrix S = d.V_R.transpose() * R0 * d.V_R;  // r x r, invertible
  if (r > 0) {
    Eigen::JacobiSVD<Matrix> ssvd(S);
    if (ssvd.singularValues().tail(1)(0) <= tol::eps_rank * (smax > 0 ? smax : 1.0))
      throw IndexTooHigh("pencil index exceeds one: R_r not invertible on its range");
    d.A_R = S.partialPivLu().solve(Matrix::Identity(r, r));
    d.A_R += sigma * Matrix::Identity(r, r);
  } else {
    d.A_R.resize(0, 0);
  }
  return d;
}

Matrix degenerate_semigroup(const SpectralDecomposition& d, double t) {
  if (d.r == 0) return Matrix::Zero(d.n, d.n);
  const Matrix Et = (d.A_R * t).exp();
  return d.V_R * Et * (d.V_R.transpose() * d.P);
}

SemigroupLawResiduals verify_semigroup_laws(const SpectralDecomposition& d, const Pencil& p,
                                            double t, double s, Complex lambda) {
  const Matrix Tt = degenerate_semigroup(d, t);
  const Matrix Ts = degenerate_semigroup(d, s);
  const Matrix Tts = degenerate_semigroup(d, t + s);
  const Matrix T0 = degenerate_semigroup(d, 0.0);
  const ComplexMatrix R = pseudo_resolvent_right(p, lambda);
  SemigroupLawResiduals res;
  res.semigroup = (Tts - Tt * Ts).norm();
  res.commutation = (R * Tt.cast<Complex>() - Tt.cast<Complex>() * R).norm();
  res.projector = ((Matrix::Identity(d.n, d.n) - T0) * Tt).norm();
  return res;
}

}  // namespace popovdae
