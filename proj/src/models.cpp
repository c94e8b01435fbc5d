#include "popovdae/models.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <string>

#include "popovdae/errors.hpp"

namespace popovdae {

namespace {

void check_interval(double lo, double hi, double L, const char* what) {
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidParams(std::string("heat: non-finite ") + what + " interval");
  if (!(lo < hi))
    throw InvalidParams(std::string("heat: ") + what + " interval needs lo < hi");
  if (lo < 0.0 || hi > L)
    throw InvalidParams(std::string("heat: ") + what + " interval must lie inside [0, L]");
}

// Indicator of the open interval (lo, hi) sampled at the interior grid
// points xi_i = i h: strict inequalities, so interval endpoints that land
// exactly on a grid point do not select it.
Vector interval_indicator(int N, double h, double lo, double hi) {
  Vector v = Vector::Zero(N);
  for (int i = 1; i <= N; ++i) {
    const double xi = i * h;
    if (xi > lo && xi < hi) v(i - 1) = 1.0;
  }
  return v;
}

}  // namespace

void HeatParams::validate() const {
  if (N < 2) throw InvalidParams("heat: N must be >= 2");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidParams("heat: L must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidParams("heat: alpha must be positive");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidParams("heat: k must be positive");
  check_interval(iu_lo, iu_hi, L, "actuation");
  check_interval(iy_lo, iy_hi, L, "observation");
}

Matrix heat_difference_matrix(const HeatParams& hp) {
  hp.validate();
  const double h = hp.L / (hp.N + 1);
  Matrix D = Matrix::Zero(hp.N, hp.N);
  for (int i = 0; i < hp.N; ++i) {
    D(i, i) = 1.0 / h;
    if (i > 0) D(i, i - 1) = -1.0 / h;
  }
  return D;
}

DescriptorSystem build_heat_dae(const HeatParams& hp) {
  hp.validate();
  const int N = hp.N;
  const double h = hp.L / (N + 1);
  const Matrix D = heat_difference_matrix(hp);

  DescriptorSystem sys;
  sys.E = Matrix::Zero(2 * N, 2 * N);
  sys.E.topLeftCorner(N, N) = (1.0 / hp.alpha) * Matrix::Identity(N, N);

  sys.A = Matrix::Zero(2 * N, 2 * N);
  sys.A.topRightCorner(N, N) = D.transpose();
  sys.A.bottomLeftCorner(N, N) = -D;
  sys.A.bottomRightCorner(N, N) = -Matrix::Identity(N, N);

  sys.B = Matrix::Zero(2 * N, 1);
  sys.B.bottomRows(N) = interval_indicator(N, h, hp.iu_lo, hp.iu_hi);

  sys.C = Matrix::Zero(1, 2 * N);
  sys.C.leftCols(N) = interval_indicator(N, h, hp.iy_lo, hp.iy_hi).transpose();

  sys.labels.reserve(2 * static_cast<std::size_t>(N));
  for (int i = 1; i <= N; ++i) sys.labels.push_back("T" + std::to_string(i));
  for (int i = 1; i <= N; ++i) sys.labels.push_back("j" + std::to_string(i));
  sys.validate();
  return sys;
}

double heat_spectral_abscissa(const HeatParams& hp) {
  const Matrix D = heat_difference_matrix(hp);
  Eigen::SelfAdjointEigenSolver<Matrix> es(D.transpose() * D, Eigen::EigenvaluesOnly);
  return -hp.alpha * es.eigenvalues()(0);
}

double verify_heat_resolvent(const HeatParams& hp, double lambda) {
  const DescriptorSystem sys = build_heat_dae(hp);
  const int N = hp.N;
  const Matrix D = heat_difference_matrix(hp);

  const Matrix S = lambda * Matrix::Identity(N, N) + hp.alpha * D.transpose() * D;
  const Matrix Sinv = S.partialPivLu().inverse();
  Matrix X = Matrix::Zero(2 * N, 2 * N);
  X.topLeftCorner(N, N) = -Sinv;
  X.bottomLeftCorner(N, N) = D * Sinv;

  const Matrix dense = (sys.A - lambda * sys.E).partialPivLu().solve(sys.E);
  return (dense - X).norm();
}

DescriptorSystem canonical_fixture(const std::string& name) {
  DescriptorSystem sys;
  if (name == "FIX-A" || name == "decoupled-stable" ||
      name == "FIX-B" || name == "decoupled-unstable") {
    const bool stable = (name == "FIX-A" || name == "decoupled-stable");
    sys.E = Matrix::Zero(2, 2);
    sys.E(0, 0) = 1.0;
    sys.A = Matrix::Zero(2, 2);
    sys.A(0, 0) = stable ? -1.0 : 1.0;
    sys.A(1, 1) = -1.0;
    sys.B = Matrix::Ones(2, 1);
    sys.C = Matrix::Identity(2, 2);
    sys.labels = {"x_dyn", "x_alg"};
  } else if (name == "FIX-C" || name == "coupled-dae") {
    sys.E = Matrix::Zero(2, 2);
    sys.E(0, 0) = 1.0;
    sys.A.resize(2, 2);
    sys.A << -2.0, 1.0, 1.0, -1.0;
    sys.B = Matrix::Zero(2, 1);
    sys.B(0, 0) = 1.0;
    sys.C = Matrix::Zero(1, 2);
    sys.C(0, 0) = 1.0;
    sys.labels = {"x1", "x2"};
  } else if (name == "FIX-ODE" || name == "scalar-ode") {
    sys.E = Matrix::Ones(1, 1);
    sys.A = -Matrix::Ones(1, 1);
    sys.B = Matrix::Ones(1, 1);
    sys.C = Matrix::Ones(1, 1);
    sys.labels = {"x"};
  } else if (name == "FIX-NILPOTENT" || name == "nilpotent") {
    sys.E = Matrix::Zero(2, 2);
    sys.E(0, 1) = 1.0;
    sys.A = Matrix::Identity(2, 2);
    sys.B = Matrix::Zero(2, 1);
    sys.C = Matrix::Zero(1, 2);
    sys.labels = {"x1", "x2"};
  } else {
    throw UnknownFixture("unknown fixture '" + name + "'");
  }
  sys.validate();
  return sys;
}

}  // namespace popovdae
