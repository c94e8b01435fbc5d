#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "popovdae/decomposition.hpp"
#include "popovdae/errors.hpp"
#include "popovdae/kernels.hpp"
#include "popovdae/models.hpp"
#include "test_support.hpp"

using popovdae::Complex;
using popovdae::Matrix;
using popovdae::Pencil;
using popovdae::SpectralDecomposition;
using popovdae::Vector;
using test_support::fixture_setup;
using test_support::make_setup;

namespace {

std::vector<Complex> sorted_eigenvalues(const Matrix& M) {
  if (M.rows() == 0) return {};
  Eigen::EigenSolver<Matrix> es(M);
  std::vector<Complex> out(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

// Composite Simpson quadrature of a matrix-valued function on [0, t_max].
template <typename F>
Matrix simpson(F&& f, double t_max, int intervals) {
  const double h = t_max / intervals;
  Matrix acc = f(0.0) + f(t_max);
  for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return (h / 3.0) * acc;
}

}  // namespace

TEST_CASE("decoupled stable fixture: exact splitting data") {
  auto s = fixture_setup("decoupled-stable");
  const SpectralDecomposition& d = s.d;

  CHECK(d.n == 2);
  CHECK(d.r == 1);
  CHECK(d.shift == 0.0);
  CHECK(d.lambda_ref == 0.0);

  Matrix P_expected(2, 2);
  P_expected << 1, 0, 0, 0;
  CHECK((d.P - P_expected).cwiseAbs().maxCoeff() <= 1e-14);

  REQUIRE(d.A_R.rows() == 1);
  CHECK(d.A_R(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));

  // T(t) = diag(e^{-t}, 0)
  for (double t : {0.0, 0.3, 1.7}) {
    Matrix T = popovdae::degenerate_semigroup(d, t);
    CHECK(std::abs(T(0, 0) - std::exp(-t)) <= 1e-14);
    CHECK(std::abs(T(0, 1)) <= 1e-14);
    CHECK(std::abs(T(1, 0)) <= 1e-14);
    CHECK(std::abs(T(1, 1)) <= 1e-14);
  }
}

TEST_CASE("coupled dae fixture: exact splitting data") {
  auto s = fixture_setup("coupled-dae");
  const SpectralDecomposition& d = s.d;

  CHECK(d.r == 1);
  Matrix P_expected(2, 2);
  P_expected << 1, 0, 1, 0;
  CHECK((d.P - P_expected).cwiseAbs().maxCoeff() <= 1e-13);

  REQUIRE(d.A_R.rows() == 1);
  CHECK(d.A_R(0, 0) == doctest::Approx(-1.0).epsilon(1e-13));

  // X_R = span{(1,1)}, X_K = span{e_2}; T(t) = e^{-t} [[1,0],[1,0]].
  Matrix T = popovdae::degenerate_semigroup(d, 0.8);
  Matrix T_expected = std::exp(-0.8) * P_expected;
  CHECK((T - T_expected).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("projector does not depend on the resolvent point used") {
  for (const char* name : {"decoupled-stable", "decoupled-unstable", "coupled-dae",
                           "scalar-ode"}) {
    CAPTURE(name);
    auto s = fixture_setup(name);
    for (double lam : {1.5, 7.0}) {
      SpectralDecomposition alt = popovdae::spectral_decomposition(s.p, lam);
      CHECK((alt.P - s.d.P).cwiseAbs().maxCoeff() <= 1e-9);
      CHECK(alt.r == s.d.r);
      // The generator itself is basis-dependent; its spectrum is not.
      auto ev_ref = sorted_eigenvalues(s.d.A_R);
      auto ev_alt = sorted_eigenvalues(alt.A_R);
      REQUIRE(ev_ref.size() == ev_alt.size());
      for (std::size_t i = 0; i < ev_ref.size(); ++i)
        CHECK(std::abs(ev_ref[i] - ev_alt[i]) <= 1e-9);
    }
  }
}

TEST_CASE("nilpotent fixture is rejected with IndexTooHigh") {
  popovdae::DescriptorSystem sys = popovdae::canonical_fixture("nilpotent");
  Pencil p(sys.E, sys.A);
  CHECK_THROWS_AS(popovdae::spectral_decomposition(p), popovdae::IndexTooHigh);
}

TEST_CASE("invertible E reduces to the classical matrix exponential") {
  Matrix E = Matrix::Identity(3, 3);
  Matrix A(3, 3);
  A << -1, 0.5, 0, 0, -2, 0.25, 0, 0, -3;
  Pencil p(E, A);
  SpectralDecomposition d = popovdae::spectral_decomposition(p);
  CHECK(d.r == 3);
  CHECK((d.P - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  const double t = 0.6;
  Matrix T = popovdae::degenerate_semigroup(d, t);
  Matrix ref = popovdae::kernels::matexp_table(A, {t}).front();
  CHECK((T - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero E: purely algebraic pencil has r = 0 and T == 0") {
  Matrix E = Matrix::Zero(2, 2);
  Matrix A = -Matrix::Identity(2, 2);
  Pencil p(E, A);
  SpectralDecomposition d = popovdae::spectral_decomposition(p);
  CHECK(d.r == 0);
  CHECK(d.A_R.rows() == 0);
  CHECK(d.P.cwiseAbs().maxCoeff() == 0.0);
  CHECK(popovdae::degenerate_semigroup(d, 0.0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(popovdae::degenerate_semigroup(d, 2.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pencil with 0 outside the resolvent set is handled via a shift") {
  // E = [1], A = [0]: dx/dt = 0, so T(t) = [1]; A itself is singular.
  Matrix E = Matrix::Identity(1, 1);
  Matrix A = Matrix::Zero(1, 1);
  Pencil p(E, A);
  SpectralDecomposition d = popovdae::spectral_decomposition(p);
  CHECK(d.r == 1);
  CHECK(d.shift != 0.0);
  CHECK(d.A_R(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.P(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix T = popovdae::degenerate_semigroup(d, 1.3);
  CHECK(T(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random index-1 pencils recover the planted normal form") {
  const int n = 7;
  for (int r : {0, 3, 7}) {
    for (std::uint32_t seed : {11u, 57u}) {
      CAPTURE(r);
      CAPTURE(seed);
      auto rp = test_support::random_index1_pencil(n, r, seed);
      Pencil p(rp.E, rp.A);
      SpectralDecomposition d = popovdae::spectral_decomposition(p);
      CHECK(d.r == r);

      // Planted oblique projector: T^{-1} blkdiag(I_r, 0) T.
      Matrix Jr = Matrix::Zero(n, n);
      Jr.topLeftCorner(r, r).setIdentity();
      Matrix P_oracle = rp.T.partialPivLu().solve(Jr * rp.T);
      CHECK((d.P - P_oracle).cwiseAbs().maxCoeff() <= 1e-8);

      // P is an oblique projector: P^2 = P.
      CHECK((d.P * d.P - d.P).cwiseAbs().maxCoeff() <= 1e-10);

      // The reduced generator is similar to the planted block H.
      auto ev_got = sorted_eigenvalues(d.A_R);
      auto ev_want = sorted_eigenvalues(rp.H);
      REQUIRE(ev_got.size() == ev_want.size());
      for (std::size_t i = 0; i < ev_got.size(); ++i)
        CHECK(std::abs(ev_got[i] - ev_want[i]) <= 1e-8);

      // T(t) vanishes on X_K and starts at P.
      Matrix T0 = popovdae::degenerate_semigroup(d, 0.0);
      CHECK((T0 - d.P).cwiseAbs().maxCoeff() <= 1e-12);
      if (r < n) {
        Matrix TK = popovdae::degenerate_semigroup(d, 0.9) * d.V_K;
        CHECK(TK.cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("semigroup, commutation, and projector laws hold on all fixtures") {
  std::mt19937 rng(0xd5c0);
  std::uniform_real_distribution<double> time_dist(0.0, 1.5);
  std::uniform_real_distribution<double> re_dist(2.5, 3.5);
  std::uniform_real_distribution<double> im_dist(-2.0, 2.0);
  for (const char* name : {"decoupled-stable", "decoupled-unstable", "coupled-dae",
                           "scalar-ode"}) {
    CAPTURE(name);
    auto s = fixture_setup(name);
    for (int k = 0; k < 10; ++k) {
      const double t = time_dist(rng);
      const double u = time_dist(rng);
      const Complex lam(re_dist(rng), im_dist(rng));
      auto res = popovdae::verify_semigroup_laws(s.d, s.p, t, u, lam);
      CHECK(res.semigroup <= 1e-10);
      CHECK(res.commutation <= 1e-10);
      CHECK(res.projector <= 1e-10);
    }
  }
}

TEST_CASE("Laplace transform of the semigroup matches -R_r(lambda)") {
  // Int_0^inf e^{-lambda t} T(t) dt = (lambda E - A)^{-1} E for lambda right
  // of the spectral abscissa. Quadrature: composite Simpson, truncated where
  // e^{-(lambda+1) t} is ~1e-27.
  for (const char* name : {"decoupled-stable", "coupled-dae"}) {
    CAPTURE(name);
    auto s = fixture_setup(name);
    const double lambda = 0.7;
    auto integrand = [&](double t) -> Matrix {
      return std::exp(-lambda * t) * popovdae::degenerate_semigroup(s.d, t);
    };
    Matrix lhs = simpson(integrand, 60.0, 6000);
    Matrix rhs = (lambda * s.p.E - s.p.A).partialPivLu().solve(s.p.E);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6);
    Matrix neg_rr = -popovdae::pseudo_resolvent_right(s.p, lambda);
    CHECK((rhs - neg_rr).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
