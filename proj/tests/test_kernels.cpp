#include <cstdlib>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "popovdae/kernels.hpp"
#include "popovdae/threading.hpp"
#include "test_support.hpp"

using popovdae::kernels::Matrix;
namespace k = popovdae::kernels;
namespace ks = popovdae::kernels::serial;
using test_support::random_matrix;

namespace {

// Dense reference for block_toeplitz_lower.
Matrix naive_toeplitz(const std::vector<Matrix>& blocks, int m) {
  const Eigen::Index br = blocks[0].rows(), bc = blocks[0].cols();
  Matrix out = Matrix::Zero(m * br, m * bc);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j)
      out.block(i * br, j * bc, br, bc) = blocks[static_cast<std::size_t>(i - j)];
  return out;
}

std::vector<Matrix> lower_blocks(Eigen::Index br, Eigen::Index bc, int m,
                                 std::uint32_t seed) {
  std::vector<Matrix> blocks;
  for (int i = 0; i < m; ++i)
    blocks.push_back(random_matrix(br, bc, seed + static_cast<std::uint32_t>(i)));
  return blocks;
}

Matrix lower_block_matrix(Eigen::Index br, Eigen::Index bc, int m, std::uint32_t seed) {
  Matrix F = Matrix::Zero(m * br, m * bc);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j)
      F.block(i * br, j * bc, br, bc) = random_matrix(br, bc, seed + 97u * i + j);
  return F;
}

}  // namespace

TEST_CASE("matexp_table matches per-entry exponentials and the serial kernel exactly") {
  for (const int r : {1, 3, 17}) {
    const Matrix A = random_matrix(r, r, 100 + r);
    std::vector<double> ts;
    for (int i = 0; i < 65; ++i) ts.push_back(0.03 * i);
    const auto par = k::matexp_table(A, ts);
    const auto ser = ks::matexp_table(A, ts);
    REQUIRE(par.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      CHECK(par[i] == ser[i]);  // bitwise
      const Matrix ref = (A * ts[i]).exp();
      CHECK((par[i] - ref).norm() <= 1e-13 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("matexp_table handles the empty generator") {
  const Matrix A0(0, 0);
  const auto tbl = k::matexp_table(A0, {0.0, 1.0, 2.0});
  REQUIRE(tbl.size() == 3);
  for (const Matrix& M : tbl) {
    CHECK(M.rows() == 0);
    CHECK(M.cols() == 0);
  }
}

TEST_CASE("block_toeplitz_lower places blocks on the correct diagonals") {
  for (const int m : {1, 2, 7, 130}) {
    const auto blocks = lower_blocks(2, 3, m, 500);
    const Matrix par = k::block_toeplitz_lower(blocks, m);
    CHECK(par == ks::block_toeplitz_lower(blocks, m));
    CHECK((par - naive_toeplitz(blocks, m)).norm() == 0.0);
  }
}

TEST_CASE("apply_block_diag multiplies each row block, rectangular blocks included") {
  const int m = 9;
  std::vector<Matrix> blocks;
  for (int i = 0; i < m; ++i) blocks.push_back(random_matrix(2, 3, 700 + i));
  const Matrix X = random_matrix(3 * m, 5, 900);
  const Matrix par = k::apply_block_diag(blocks, X);
  CHECK(par == ks::apply_block_diag(blocks, X));
  REQUIRE(par.rows() == 2 * m);
  for (int i = 0; i < m; ++i) {
    const Matrix ref = blocks[static_cast<std::size_t>(i)] * X.middleRows(3 * i, 3);
    CHECK((par.middleRows(2 * i, 2) - ref).norm() == 0.0);
  }
}

TEST_CASE("matmul_at_b equals the dense transpose product") {
  const Matrix A = random_matrix(140, 90, 1100);
  const Matrix B = random_matrix(140, 130, 1200);
  const Matrix par = k::matmul_at_b(A, B);
  CHECK(par == ks::matmul_at_b(A, B));
  const Matrix ref = A.transpose() * B;
  CHECK((par - ref).norm() <= 1e-13 * std::max(1.0, ref.norm()));
}

TEST_CASE("gram_lower equals the dense product on block-lower factors") {
  for (const auto& dims : {std::pair<int, int>{1, 1}, {2, 3}}) {
    const int br = dims.first, bc = dims.second;
    const int m = 41;
    const Matrix F = lower_block_matrix(br, bc, m, 2000);
    const Matrix W = lower_block_matrix(br, bc, m, 3000);
    const Matrix par = k::gram_lower(F, W, br, bc);
    CHECK(par == ks::gram_lower(F, W, br, bc));
    const Matrix ref = F.transpose() * W;
    CHECK((par - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("kernel outputs do not depend on the thread cap") {
  const Matrix A = random_matrix(6, 6, 4000);
  std::vector<double> ts;
  for (int i = 0; i < 200; ++i) ts.push_back(0.01 * i);
  const Matrix F = lower_block_matrix(1, 1, 150, 4100);
  const Matrix W = lower_block_matrix(1, 1, 150, 4200);

  setenv("POPOVDAE_THREADS", "1", 1);
  const auto tbl1 = k::matexp_table(A, ts);
  const Matrix g1 = k::gram_lower(F, W, 1, 1);
  setenv("POPOVDAE_THREADS", "4", 1);
  const auto tbl4 = k::matexp_table(A, ts);
  const Matrix g4 = k::gram_lower(F, W, 1, 1);
  unsetenv("POPOVDAE_THREADS");

  REQUIRE(tbl1.size() == tbl4.size());
  for (std::size_t i = 0; i < tbl1.size(); ++i) CHECK(tbl1[i] == tbl4[i]);
  CHECK(g1 == g4);
}

TEST_CASE("thread cap is respected") {
  setenv("POPOVDAE_THREADS", "1", 1);
  CHECK(popovdae::max_threads() == 1);
  setenv("POPOVDAE_THREADS", "not-a-number", 1);
  CHECK(popovdae::max_threads() >= 1);
  unsetenv("POPOVDAE_THREADS");
  CHECK(popovdae::max_threads() >= 1);
}
