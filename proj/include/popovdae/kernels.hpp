#pragma once

#include <Eigen/Dense>
#include <vector>

namespace popovdae::kernels {

using Matrix = Eigen::MatrixXd;

// Data-parallel kernels used by the hot paths (matrix-exponential tables,
// block-Toeplitz assembly of the causal IO operator, block-diagonal weight
// application, and the big Gram products of the Popov assembly).
//
// Every kernel partitions *disjoint* outputs across threads, and each output
// is produced by an Eigen expression whose shape does not depend on the
// partition. Results are therefore bitwise identical for any thread count,
// and bitwise identical to the serial reference implementations in
// kernels::serial (the unit tests assert this with operator==).

// exp(A * t) for each t in times. A must be square (possibly 0x0).
std::vector<Matrix> matexp_table(const Matrix& A, const std::vector<double>& times);

// Block-lower-triangular block-Toeplitz matrix: block (k, j), k >= j, equals
// diag_blocks[k - j]; zero above the block diagonal. diag_blocks must hold m
// equally sized blocks; the result is (m*br) x (m*bc).
Matrix block_toeplitz_lower(const std::vector<Matrix>& diag_blocks, int m);

// Row-blockwise product diag(blocks[0], ..., blocks[m-1]) * X. Block k maps
// blocks[k].cols() rows of X to blocks[k].rows() rows of the result; the row
// sizes must tile X exactly.
Matrix apply_block_diag(const std::vector<Matrix>& blocks, const Matrix& X);

// A^T * B, parallel over fixed-width column panels of the result.
Matrix matmul_at_b(const Matrix& A, const Matrix& B);

// F^T * W for F, W block-lower-triangular with row blocks of height
// block_rows and column blocks of width block_cols (both tile the sizes).
// Exploits the shared sparsity: column block j of either factor vanishes
// above row block j. Result is full (both triangles computed).
Matrix gram_lower(const Matrix& F, const Matrix& W, int block_rows, int block_cols);

namespace serial {
std::vector<Matrix> matexp_table(const Matrix& A, const std::vector<double>& times);
Matrix block_toeplitz_lower(const std::vector<Matrix>& diag_blocks, int m);
Matrix apply_block_diag(const std::vector<Matrix>& blocks, const Matrix& X);
Matrix matmul_at_b(const Matrix& A, const Matrix& B);
Matrix gram_lower(const Matrix& F, const Matrix& W, int block_rows, int block_cols);
}  // namespace serial

}  // namespace popovdae::kernels
