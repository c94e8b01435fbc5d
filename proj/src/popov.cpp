#include "popovdae/popov.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "popovdae/constants.hpp"
#include "popovdae/errors.hpp"
#include "popovdae/kernels.hpp"
#include "popovdae/stability.hpp"

namespace popovdae {

namespace {

// Relative asymmetry of the assembled Popov matrix beyond which assembly is
// considered buggy rather than rounded.
constexpr double kSymmetryDriftMax = 1e-10;
// Above this size the coercivity margin switches from a full symmetric
// eigensolve to a Cholesky-based inverse iteration.
constexpr Eigen::Index kExactEigenMax = 1024;
constexpr int kInverseIterations = 64;
constexpr int kMaxNeumannIterations = 10000;

std::vector<double> midpoint_times(const TimeGrid& grid) {
  std::vector<double> ts(static_cast<std::size_t>(grid.m));
  for (int k = 0; k < grid.m; ++k) ts[static_cast<std::size_t>(k)] = grid.midpoint(k);
  return ts;
}

void check_system_matches(const SpectralDecomposition& d, const DescriptorSystem& sys) {
  sys.validate();
  if (sys.n() != d.n)
    throw DimensionMismatch("popov: decomposition has n=" + std::to_string(d.n) +
                            " but the system has n=" + std::to_string(sys.n()));
}

// Spectral norm of a symmetric matrix; exact eigensolve for moderate sizes,
// power iteration (deterministic start) beyond that.
double symmetric_spectral_norm(const Matrix& S) {
  const Eigen::Index q = S.rows();
  if (q == 0) return 0.0;
  if (q <= kExactEigenMax) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Vector v = Vector::Ones(q) / std::sqrt(static_cast<double>(q));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector w = S * v;
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw)) return 0.0;
    v = w / nw;
    lambda = nw;
  }
  return lambda;
}

}  // namespace

WeightSchedule WeightSchedule::constant(const TimeGrid& g, const Matrix& Q, const Matrix& N,
                                        const Matrix& R) {
  WeightSchedule w;
  w.grid = g;
  w.Q.assign(static_cast<std::size_t>(g.m), Q);
  w.N.assign(static_cast<std::size_t>(g.m), N);
  w.R.assign(static_cast<std::size_t>(g.m), R);
  w.validate();
  return w;
}

WeightSchedule WeightSchedule::per_step(const TimeGrid& g, std::vector<Matrix> Q,
                                        std::vector<Matrix> N, std::vector<Matrix> R) {
  WeightSchedule w;
  w.grid = g;
  w.Q = std::move(Q);
  w.N = std::move(N);
  w.R = std::move(R);
  w.validate();
  return w;
}

bool WeightSchedule::has_nonzero_N() const {
  for (const Matrix& Nk : N)
    if (Nk.size() > 0 && Nk.norm() != 0.0) return true;
  return false;
}

void WeightSchedule::validate() const {
  const std::size_t m = static_cast<std::size_t>(grid.m);
  if (Q.size() != m || N.size() != m || R.size() != m)
    throw DimensionMismatch("weights: expected one (Q, N, R) block per time step");
  const Eigen::Index ny = Q[0].rows();
  const Eigen::Index nu = R[0].rows();
  if (ny < 1 || nu < 1) throw DimensionMismatch("weights: empty Q or R block");
  for (std::size_t k = 0; k < m; ++k) {
    if (Q[k].rows() != ny || Q[k].cols() != ny)
      throw DimensionMismatch("weights: Q block " + std::to_string(k) + " is not " +
                              std::to_string(ny) + "x" + std::to_string(ny));
    if (R[k].rows() != nu || R[k].cols() != nu)
      throw DimensionMismatch("weights: R block " + std::to_string(k) + " is not " +
                              std::to_string(nu) + "x" + std::to_string(nu));
    if (N[k].rows() != nu || N[k].cols() != ny)
      throw DimensionMismatch("weights: N block " + std::to_string(k) + " is not " +
                              std::to_string(nu) + "x" + std::to_string(ny));
    if (!Q[k].allFinite() || !N[k].allFinite() || !R[k].allFinite())
      throw InvalidInput("weights: non-finite entry in block " + std::to_string(k));
    if ((Q[k] - Q[k].transpose()).norm() > 1e-12 * std::max(1.0, Q[k].norm()))
      throw InvalidInput("weights: Q block " + std::to_string(k) + " is not symmetric");
    if ((R[k] - R[k].transpose()).norm() > 1e-12 * std::max(1.0, R[k].norm()))
      throw InvalidInput("weights: R block " + std::to_string(k) + " is not symmetric");
  }
}

InputMaps input_maps(const SpectralDecomposition& d, const DescriptorSystem& sys) {
  check_system_matches(d, sys);
  Eigen::JacobiSVD<Matrix> svd(sys.A);
  const double scale = std::max(sys.A.norm(), std::numeric_limits<double>::min());
  if (svd.singularValues()(sys.n() - 1) <= tol::eps_reg * scale)
    throw SingularAtLambda(
        "input_maps: A is singular, 0 is not a resolvent point; shift the problem first");
  const Matrix AinvB = sys.A.partialPivLu().solve(sys.B);
  InputMaps maps;
  maps.B1 = d.P * AinvB;
  maps.B0 = AinvB - maps.B1;
  return maps;
}

Matrix assemble_psi(const SpectralDecomposition& d, const DescriptorSystem& sys,
                    const TimeGrid& grid) {
  check_system_matches(d, sys);
  const Matrix CV = sys.C * d.V_R;                   // n_y x r
  const Matrix W = d.V_R.transpose() * d.P;          // r x n
  const auto tbl = kernels::matexp_table(d.A_R, midpoint_times(grid));
  const int ny = sys.n_y();
  Matrix Psi(static_cast<Eigen::Index>(grid.m) * ny, d.n);
  for (int k = 0; k < grid.m; ++k)
    Psi.middleRows(static_cast<Eigen::Index>(k) * ny, ny) =
        CV * tbl[static_cast<std::size_t>(k)] * W;
  return Psi;
}

Matrix assemble_io_operator(const SpectralDecomposition& d, const DescriptorSystem& sys,
                            const TimeGrid& grid) {
  check_system_matches(d, sys);
  const InputMaps maps = input_maps(d, sys);
  const Matrix CV = sys.C * d.V_R;                   // n_y x r
  const Matrix b1 = d.V_R.transpose() * maps.B1;     // r x n_u
  const Matrix CB0 = sys.C * maps.B0;                // n_y x n_u
  const auto tbl = kernels::matexp_table(d.A_R, midpoint_times(grid));
  std::vector<Matrix> blocks(static_cast<std::size_t>(grid.m));
  blocks[0] = CV * ((tbl[0] - Matrix::Identity(d.r, d.r)) * b1) - CB0;
  for (int j = 1; j < grid.m; ++j)
    blocks[static_cast<std::size_t>(j)] =
        CV * ((tbl[static_cast<std::size_t>(j)] - tbl[static_cast<std::size_t>(j) - 1]) * b1);
  return kernels::block_toeplitz_lower(blocks, grid.m);
}

PopovAssembly assemble_popov(const SpectralDecomposition& d, const DescriptorSystem& sys,
                             const WeightSchedule& w) {
  check_system_matches(d, sys);
  w.validate();
  if (w.n_y() != sys.n_y() || w.n_u() != sys.n_u())
    throw DimensionMismatch("popov: weight block sizes do not match the system's I/O sizes");

  PopovAssembly pa;
  pa.grid = w.grid;
  pa.n = d.n;
  pa.n_y = sys.n_y();
  pa.n_u = sys.n_u();
  pa.Psi = assemble_psi(d, sys, w.grid);
  pa.F = assemble_io_operator(d, sys, w.grid);

  const Matrix QF = kernels::apply_block_diag(w.Q, pa.F);       // (m n_y) x (m n_u)
  Matrix S = kernels::gram_lower(pa.F, QF, pa.n_y, pa.n_u);     // F^T Q_bar F
  const Matrix NF = kernels::apply_block_diag(w.N, pa.F);       // (m n_u) x (m n_u)
  S += NF + NF.transpose();
  for (int k = 0; k < w.grid.m; ++k)
    S.block(static_cast<Eigen::Index>(k) * pa.n_u, static_cast<Eigen::Index>(k) * pa.n_u,
            pa.n_u, pa.n_u) += w.R[static_cast<std::size_t>(k)];

  const double smax = std::max(1.0, S.cwiseAbs().maxCoeff());
  pa.symmetry_drift = (S - S.transpose()).cwiseAbs().maxCoeff() / smax;
  if (!(pa.symmetry_drift <= kSymmetryDriftMax))
    throw InternalInconsistency("popov matrix asymmetric beyond roundoff (relative drift " +
                                std::to_string(pa.symmetry_drift) + ")");
  pa.popov = 0.5 * (S + S.transpose());
  return pa;
}

double coercivity_margin(const Matrix& popov) {
  if (popov.rows() != popov.cols()) throw DimensionMismatch("coercivity_margin: square matrix expected");
  const Eigen::Index q = popov.rows();
  if (q == 0) return std::numeric_limits<double>::infinity();
  if (q <= kExactEigenMax) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(popov, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }
  // Large problems: inverse iteration through a Cholesky factor. If the
  // matrix is not positive definite the factorisation fails and the exact
  // solver decides the sign.
  Eigen::LLT<Matrix> llt(popov);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(popov, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }
  Vector v = Vector::Ones(q) / std::sqrt(static_cast<double>(q));
  double lambda = 0.0;
  for (int it = 0; it < kInverseIterations; ++it) {
    Vector w = llt.solve(v);
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw)) break;
    v = w / nw;
    lambda = v.dot(popov * v);
  }
  return lambda;
}

double evaluate_cost(const PopovAssembly& pa, const WeightSchedule& w, const Vector& x0,
                     const Signal& u) {
  if (w.grid != pa.grid) throw GridMismatch("evaluate_cost: weights live on a different grid");
  if (u.grid != pa.grid) throw GridMismatch("evaluate_cost: input lives on a different grid");
  w.validate();
  if (w.n_y() != pa.n_y || w.n_u() != pa.n_u)
    throw DimensionMismatch("evaluate_cost: weight blocks do not match the assembly");
  if (u.dim() != pa.n_u) throw DimensionMismatch("evaluate_cost: input has wrong dimension");
  if (x0.size() != pa.n) throw DimensionMismatch("evaluate_cost: x0 has wrong length");

  const Vector us = u.stacked();
  const Vector y = pa.Psi * x0 + pa.F * us;
  double J = 0.0;
  for (int k = 0; k < pa.grid.m; ++k) {
    const auto yk = y.segment(static_cast<Eigen::Index>(k) * pa.n_y, pa.n_y);
    const auto uk = us.segment(static_cast<Eigen::Index>(k) * pa.n_u, pa.n_u);
    const std::size_t ks = static_cast<std::size_t>(k);
    J += yk.dot(w.Q[ks] * yk) + 2.0 * uk.dot(w.N[ks] * yk) + uk.dot(w.R[ks] * uk);
  }
  return pa.grid.dt() * J;
}

LqrSolution solve_finite_horizon(const SpectralDecomposition& d, const DescriptorSystem& sys,
                                 const WeightSchedule& w, const Vector& x0) {
  if (x0.size() != d.n) throw DimensionMismatch("solve_finite_horizon: x0 has wrong length");
  if (!x0.allFinite()) throw InvalidInput("solve_finite_horizon: non-finite x0");
  PopovAssembly pa = assemble_popov(d, sys, w);

  LqrSolution sol;
  sol.coercivity_margin = coercivity_margin(pa.popov);
  if (!(sol.coercivity_margin > tol::eps_coer))
    throw NotCoercive("popov operator is not coercive (margin " +
                      std::to_string(sol.coercivity_margin) + ")");
  Eigen::LLT<Matrix> llt(pa.popov);
  if (llt.info() != Eigen::Success)
    throw NotCoercive("popov operator admits no Cholesky factorisation despite the margin; "
                      "problem is on the edge of coercivity");

  // L = (F^T Q_bar + N_bar) Psi, the cross operator of the quadratic form.
  const Matrix QPsi = kernels::apply_block_diag(w.Q, pa.Psi);  // (m n_y) x n
  const Matrix NPsi = kernels::apply_block_diag(w.N, pa.Psi);  // (m n_u) x n
  const Matrix L = kernels::matmul_at_b(pa.F, QPsi) + NPsi;    // (m n_u) x n

  const Matrix SinvL = llt.solve(L);
  const Vector ustack = -(SinvL * x0);

  Matrix P = kernels::matmul_at_b(pa.Psi, QPsi) - kernels::matmul_at_b(L, SinvL);
  P = (pa.grid.dt() * 0.5) * (P + P.transpose()).eval();
  sol.riccati_P = P;
  sol.cost = x0.dot(P * x0);
  sol.u_opt = Signal::from_stacked(pa.grid, pa.n_u, ustack);
  sol.y_opt = Signal::from_stacked(pa.grid, pa.n_y, pa.Psi * x0 + pa.F * ustack);

  Signal f = Signal::zero(pa.grid, d.n);
  f.values = sys.B * sol.u_opt.values;
  Pencil p(sys.E, sys.A);
  MildSolution ms = mild_solution(d, p, x0, f);
  sol.x_opt = std::move(ms.x);
  sol.consistency_gap = ms.consistency_gap;
  sol.horizon = pa.grid.t_f;
  sol.tail_bound = 0.0;
  return sol;
}

NeumannFeedback output_feedback_neumann(const PopovAssembly& pa, const WeightSchedule& w,
                                        double tol) {
  if (w.grid != pa.grid) throw GridMismatch("output_feedback_neumann: weights live on a different grid");
  w.validate();
  if (w.n_y() != pa.n_y || w.n_u() != pa.n_u)
    throw DimensionMismatch("output_feedback_neumann: weight blocks do not match the assembly");
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw InvalidParams("output_feedback_neumann: tol must be positive and finite");
  if (w.has_nonzero_N())
    throw HypothesisViolated("output feedback requires a zero cross weight N");

  double eps_R = std::numeric_limits<double>::infinity();
  double q_min = std::numeric_limits<double>::infinity();
  double q_scale = 1.0;
  for (int k = 0; k < pa.grid.m; ++k) {
    const std::size_t ks = static_cast<std::size_t>(k);
    Eigen::SelfAdjointEigenSolver<Matrix> er(w.R[ks], Eigen::EigenvaluesOnly);
    eps_R = std::min(eps_R, er.eigenvalues()(0));
    Eigen::SelfAdjointEigenSolver<Matrix> eq(w.Q[ks], Eigen::EigenvaluesOnly);
    q_min = std::min(q_min, eq.eigenvalues()(0));
    q_scale = std::max(q_scale, w.Q[ks].norm());
  }
  if (!(eps_R > 0.0))
    throw HypothesisViolated("output feedback requires uniformly positive definite R blocks");
  if (q_min < -tol::eps_psd * q_scale)
    throw HypothesisViolated("output feedback requires positive semidefinite Q blocks");

  // With N = 0 the Popov matrix is R_bar + F^T Q_bar F, so the weighted Gram
  // block is recovered exactly by removing R_bar again.
  Matrix T = pa.popov;
  for (int k = 0; k < pa.grid.m; ++k)
    T.block(static_cast<Eigen::Index>(k) * pa.n_u, static_cast<Eigen::Index>(k) * pa.n_u,
            pa.n_u, pa.n_u) -= w.R[static_cast<std::size_t>(k)];
  T = 0.5 * (T + T.transpose()).eval();

  NeumannFeedback nf;
  const double normT = symmetric_spectral_norm(T);
  nf.certified_ratio = normT / (eps_R + normT);
  if (!(nf.certified_ratio < 1.0))
    throw InternalInconsistency("certified contraction ratio is not < 1 despite positive R");

  Eigen::LLT<Matrix> llt(pa.popov);
  if (llt.info() != Eigen::Success)
    throw InternalInconsistency(
        "popov matrix is not positive definite despite R > 0 and Q >= 0");

  const Matrix QF = kernels::apply_block_diag(w.Q, pa.F);  // (m n_y) x (m n_u)
  const Matrix G0 = llt.solve(QF.transpose());             // popov^{-1} F^T Q_bar
  nf.K = G0;
  const double scale0 = std::max(1.0, G0.norm());

  Matrix inc = G0;
  for (int it = 1; it <= kMaxNeumannIterations; ++it) {
    inc = llt.solve(T * inc);
    const double in = inc.norm();
    nf.increment_norms.push_back(in);
    nf.K += inc;
    nf.iterations = it;
    if (!std::isfinite(in) || in > 1e8 * scale0)
      throw NoContraction("Neumann series diverged");
    if (in <= tol * std::max(1.0, nf.K.norm())) return nf;
  }
  throw NoContraction("Neumann series did not meet the tolerance within the iteration cap");
}

LqrSolution solve_infinite_horizon(const SpectralDecomposition& d,
                                   const DescriptorSystem& sys, const Matrix& Q,
                                   const Matrix& N, const Matrix& R, const Vector& x0,
                                   double tail_tol, int steps) {
  check_system_matches(d, sys);
  if (!(tail_tol > 0.0) || !std::isfinite(tail_tol))
    throw InvalidParams("solve_infinite_horizon: tail_tol must be positive and finite");
  if (steps < 1) throw InvalidParams("solve_infinite_horizon: steps must be >= 1");

  Pencil p(sys.E, sys.A);
  const StabilityReport rep = stability_verdict(d, p);
  if (!rep.verdict)
    throw NotExponentiallyStable(
        "infinite-horizon problem requires an exponentially stable pencil (spectral abscissa " +
        std::to_string(rep.spectral_abscissa) + ")");

  double t_f = 1.0;
  double tail = 0.0;
  if (d.r > 0) {
    const double a = std::abs(rep.spectral_abscissa);
    const double omega_t = 0.9 * a;  // certify decay at 90% of the spectral rate
    double M = std::numeric_limits<double>::min();
    const int samples = 64;
    const double t_max = 8.0 / a;
    for (int i = 0; i <= samples; ++i) {
      const double t = t_max * i / samples;
      const Matrix Tt = degenerate_semigroup(d, t);
      Eigen::JacobiSVD<Matrix> svd(Tt);
      M = std::max(M, svd.singularValues()(0) * std::exp(omega_t * t));
    }
    // Tail of the cost under free decay beyond t_f:
    //   int_{t_f}^inf |y|^2-type terms <= num * e^{-2 omega_t t_f} / (2 omega_t).
    const double num = M * M * sys.C.norm() * sys.C.norm() *
                       (Q.norm() + N.norm() + 1.0) * std::max(x0.squaredNorm(), 1.0);
    t_f = std::log(std::max(num / (2.0 * omega_t * tail_tol), 1.0)) / (2.0 * omega_t);
    t_f = std::min(std::max(t_f, 2.0 / a), 1e7);
    tail = num * std::exp(-2.0 * omega_t * t_f) / (2.0 * omega_t);
  }

  const TimeGrid grid(t_f, steps);
  const WeightSchedule w = WeightSchedule::constant(grid, Q, N, R);
  LqrSolution sol = solve_finite_horizon(d, sys, w, x0);
  sol.horizon = t_f;
  sol.tail_bound = tail;
  return sol;
}

std::pair<DescriptorSystem, WeightSchedule> shift_transform(const DescriptorSystem& sys,
                                                            const WeightSchedule& w,
                                                            double omega) {
  sys.validate();
  w.validate();
  if (!std::isfinite(omega)) throw InvalidParams("shift_transform: omega must be finite");
  DescriptorSystem s2 = sys;
  s2.A = sys.A - omega * sys.E;
  WeightSchedule w2 = w;
  for (int k = 0; k < w.grid.m; ++k) {
    const double g = std::exp(2.0 * omega * w.grid.midpoint(k));
    const std::size_t ks = static_cast<std::size_t>(k);
    w2.Q[ks] *= g;
    w2.N[ks] *= g;
    w2.R[ks] *= g;
  }
  return {std::move(s2), std::move(w2)};
}

Signal unshift_input(const Signal& u_shifted, double omega) {
  if (!std::isfinite(omega)) throw InvalidParams("unshift_input: omega must be finite");
  Signal u = u_shifted;
  for (int k = 0; k < u.grid.m; ++k)
    u.values.col(k) *= std::exp(omega * u.grid.midpoint(k));
  return u;
}

std::pair<DescriptorSystem, WeightSchedule> feedback_embedding(const DescriptorSystem& sys,
                                                               const WeightSchedule& w,
                                                               const Matrix& F) {
  sys.validate();
  w.validate();
  if (F.rows() != sys.n_u() || F.cols() != sys.n())
    throw DimensionMismatch("feedback_embedding: F must be n_u x n");
  if (!F.allFinite()) throw InvalidInput("feedback_embedding: non-finite feedback gain");
  if (w.n_y() != sys.n_y() || w.n_u() != sys.n_u())
    throw DimensionMismatch("feedback_embedding: weight blocks do not match the system");

  const int ny = sys.n_y();
  const int nu = sys.n_u();
  DescriptorSystem s2;
  s2.E = sys.E;
  s2.A = sys.A + sys.B * F;
  s2.B = sys.B;
  s2.C.resize(ny + nu, sys.n());
  s2.C.topRows(ny) = sys.C;
  s2.C.bottomRows(nu) = F;
  s2.labels = sys.labels;

  WeightSchedule w2;
  w2.grid = w.grid;
  w2.Q.resize(w.Q.size());
  w2.N.resize(w.N.size());
  w2.R = w.R;
  for (std::size_t k = 0; k < w.Q.size(); ++k) {
    Matrix Q2(ny + nu, ny + nu);
    Q2.topLeftCorner(ny, ny) = w.Q[k];
    Q2.topRightCorner(ny, nu) = w.N[k].transpose();
    Q2.bottomLeftCorner(nu, ny) = w.N[k];
    Q2.bottomRightCorner(nu, nu) = w.R[k];
    w2.Q[k] = std::move(Q2);
    Matrix N2(nu, ny + nu);
    N2.leftCols(ny) = w.N[k];
    N2.rightCols(nu) = w.R[k];
    w2.N[k] = std::move(N2);
  }
  w2.validate();
  return {std::move(s2), std::move(w2)};
}

}  // namespace popovdae
