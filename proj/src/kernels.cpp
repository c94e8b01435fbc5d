#include "popovdae/kernels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "popovdae/errors.hpp"
#include "popovdae/threading.hpp"

namespace popovdae::kernels {

namespace {

// Outputs are partitioned into panels of whole column blocks so that every
// Eigen expression below has a shape that depends only on the panel index,
// never on the thread assignment.
constexpr int kPanelTarget = 64;

int panel_blocks(int block_cols) {
  const int b = kPanelTarget / block_cols;
  return b < 1 ? 1 : b;
}

void check_block_tiling(const Matrix& F, const Matrix& W, int br, int bc) {
  if (br <= 0 || bc <= 0 || F.rows() % br != 0 || F.cols() % bc != 0)
    throw DimensionMismatch("gram_lower: block sizes do not tile F");
  if (W.rows() != F.rows() || W.cols() != F.cols())
    throw DimensionMismatch("gram_lower: W must have the shape of F");
  if (F.rows() / br != F.cols() / bc)
    throw DimensionMismatch("gram_lower: F must be block-square");
}

std::vector<Eigen::Index> block_row_offsets(const std::vector<Matrix>& blocks,
                                            const Matrix& X, Eigen::Index* out_rows) {
  std::vector<Eigen::Index> in_off(blocks.size() + 1, 0);
  Eigen::Index rows = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    in_off[k + 1] = in_off[k] + blocks[k].cols();
    rows += blocks[k].rows();
  }
  if (in_off.back() != X.rows())
    throw DimensionMismatch("apply_block_diag: blocks do not tile the rows of X");
  *out_rows = rows;
  return in_off;
}

}  // namespace

std::vector<Matrix> matexp_table(const Matrix& A, const std::vector<double>& times) {
  if (A.rows() != A.cols()) throw DimensionMismatch("matexp_table: A must be square");
  std::vector<Matrix> out(times.size());
  const int count = static_cast<int>(times.size());
  if (A.rows() == 0) {
    for (auto& M : out) M.resize(0, 0);
    return out;
  }
#pragma omp parallel for schedule(static) num_threads(popovdae::max_threads())
  for (int i = 0; i < count; ++i) {
    out[i] = (A * times[i]).exp();
  }
  return out;
}

Matrix block_toeplitz_lower(const std::vector<Matrix>& diag_blocks, int m) {
  if (m <= 0 || diag_blocks.size() != static_cast<std::size_t>(m))
    throw DimensionMismatch("block_toeplitz_lower: need exactly m blocks");
  const Eigen::Index br = diag_blocks[0].rows(), bc = diag_blocks[0].cols();
  for (const auto& blk : diag_blocks)
    if (blk.rows() != br || blk.cols() != bc)
      throw DimensionMismatch("block_toeplitz_lower: blocks must share one shape");
  Matrix F = Matrix::Zero(m * br, m * bc);
#pragma omp parallel for schedule(static) num_threads(popovdae::max_threads())
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j <= k; ++j) F.block(k * br, j * bc, br, bc) = diag_blocks[k - j];
  }
  return F;
}

Matrix apply_block_diag(const std::vector<Matrix>& blocks, const Matrix& X) {
  Eigen::Index rows = 0;
  const auto in_off = block_row_offsets(blocks, X, &rows);
  std::vector<Eigen::Index> out_off(blocks.size() + 1, 0);
  for (std::size_t k = 0; k < blocks.size(); ++k)
    out_off[k + 1] = out_off[k] + blocks[k].rows();
  Matrix Y(rows, X.cols());
  const int count = static_cast<int>(blocks.size());
#pragma omp parallel for schedule(static) num_threads(popovdae::max_threads())
  for (int k = 0; k < count; ++k) {
    Y.middleRows(out_off[k], blocks[k].rows()) =
        blocks[k] * X.middleRows(in_off[k], blocks[k].cols());
  }
  return Y;
}

Matrix matmul_at_b(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) throw DimensionMismatch("matmul_at_b: inner dimensions differ");
  Matrix C(A.cols(), B.cols());
  const int w = kPanelTarget;
  const int panels = static_cast<int>((B.cols() + w - 1) / w);
#pragma omp parallel for schedule(static) num_threads(popovdae::max_threads())
  for (int p = 0; p < panels; ++p) {
    const Eigen::Index j0 = static_cast<Eigen::Index>(p) * w;
    const Eigen::Index cols = std::min<Eigen::Index>(w, B.cols() - j0);
    C.middleCols(j0, cols).noalias() = A.transpose() * B.middleCols(j0, cols);
  }
  return C;
}

Matrix gram_lower(const Matrix& F, const Matrix& W, int block_rows, int block_cols) {
  check_block_tiling(F, W, block_rows, block_cols);
  const Eigen::Index m = F.cols() / block_cols;
  Matrix G(F.cols(), W.cols());
  const int pb = panel_blocks(block_cols);
  const int panels = static_cast<int>((m + pb - 1) / pb);
#pragma omp parallel for schedule(static) num_threads(popovdae::max_threads())
  for (int p = 0; p < panels; ++p) {
    const Eigen::Index jb0 = static_cast<Eigen::Index>(p) * pb;
    const Eigen::Index nb = std::min<Eigen::Index>(pb, m - jb0);
    const Eigen::Index j0 = jb0 * block_cols, cols = nb * block_cols;
    // Column block jb of W vanishes above row block jb; trim the contraction.
    const Eigen::Index k0 = jb0 * block_rows, depth = F.rows() - k0;
    G.middleCols(j0, cols).noalias() =
        F.bottomRows(depth).transpose() * W.block(k0, j0, depth, cols);
  }
  return G;
}

namespace serial {

std::vector<Matrix> matexp_table(const Matrix& A, const std::vector<double>& times) {
  if (A.rows() != A.cols()) throw DimensionMismatch("matexp_table: A must be square");
  std::vector<Matrix> out(times.size());
  if (A.rows() == 0) {
    for (auto& M : out) M.resize(0, 0);
    return out;
  }
  for (std::size_t i = 0; i < times.size(); ++i) out[i] = (A * times[i]).exp();
  return out;
}

Matrix block_toeplitz_lower(const std::vector<Matrix>& diag_blocks, int m) {
  if (m <= 0 || diag_blocks.size() != static_cast<std::size_t>(m))
    throw DimensionMismatch("block_toeplitz_lower: need exactly m blocks");
  const Eigen::Index br = diag_blocks[0].rows(), bc = diag_blocks[0].cols();
  for (const auto& blk : diag_blocks)
    if (blk.rows() != br || blk.cols() != bc)
      throw DimensionMismatch("block_toeplitz_lower: blocks must share one shape");
  Matrix F = Matrix::Zero(m * br, m * bc);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j <= k; ++j) F.block(k * br, j * bc, br, bc) = diag_blocks[k - j];
  return F;
}

Matrix apply_block_diag(const std::vector<Matrix>& blocks, const Matrix& X) {
  Eigen::Index rows = 0;
  const auto in_off = block_row_offsets(blocks, X, &rows);
  Matrix Y(rows, X.cols());
  Eigen::Index ro = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    Y.middleRows(ro, blocks[k].rows()) = blocks[k] * X.middleRows(in_off[k], blocks[k].cols());
    ro += blocks[k].rows();
  }
  return Y;
}

Matrix matmul_at_b(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows()) throw DimensionMismatch("matmul_at_b: inner dimensions differ");
  Matrix C(A.cols(), B.cols());
  const int w = kPanelTarget;
  for (Eigen::Index j0 = 0; j0 < B.cols(); j0 += w) {
    const Eigen::Index cols = std::min<Eigen::Index>(w, B.cols() - j0);
    C.middleCols(j0, cols).noalias() = A.transpose() * B.middleCols(j0, cols);
  }
  return C;
}

Matrix gram_lower(const Matrix& F, const Matrix& W, int block_rows, int block_cols) {
  check_block_tiling(F, W, block_rows, block_cols);
  const Eigen::Index m = F.cols() / block_cols;
  Matrix G(F.cols(), W.cols());
  const int pb = panel_blocks(block_cols);
  for (Eigen::Index jb0 = 0; jb0 < m; jb0 += pb) {
    const Eigen::Index nb = std::min<Eigen::Index>(pb, m - jb0);
    const Eigen::Index j0 = jb0 * block_cols, cols = nb * block_cols;
    const Eigen::Index k0 = jb0 * block_rows, depth = F.rows() - k0;
    G.middleCols(j0, cols).noalias() =
        F.bottomRows(depth).transpose() * W.block(k0, j0, depth, cols);
  }
  return G;
}

}  // namespace serial

}  // namespace popovdae::kernels
