#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "popovdae/kernels.hpp"
#include "popovdae/threading.hpp"

using popovdae::kernels::Matrix;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix M(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) M(r, c) = dist(rng);
  return M;
}

std::vector<double> sample_times(int count) {
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) ts[static_cast<std::size_t>(i)] = 0.01 * i;
  return ts;
}

}  // namespace

static void BM_matexp_table(benchmark::State& state) {
  const Eigen::Index r = state.range(0);
  const Matrix A = -Matrix::Identity(r, r) + 0.1 * random_matrix(r, r, 1);
  const auto ts = sample_times(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(popovdae::kernels::matexp_table(A, ts));
}
BENCHMARK(BM_matexp_table)->Args({8, 256})->Args({32, 256});

static void BM_matexp_table_serial(benchmark::State& state) {
  const Eigen::Index r = state.range(0);
  const Matrix A = -Matrix::Identity(r, r) + 0.1 * random_matrix(r, r, 1);
  const auto ts = sample_times(static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(popovdae::kernels::serial::matexp_table(A, ts));
}
BENCHMARK(BM_matexp_table_serial)->Args({8, 256})->Args({32, 256});

static void BM_gram_lower(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Matrix F = random_matrix(m, m, 2).triangularView<Eigen::Lower>();
  const Matrix W = random_matrix(m, m, 3).triangularView<Eigen::Lower>();
  for (auto _ : state)
    benchmark::DoNotOptimize(popovdae::kernels::gram_lower(F, W, 1, 1));
}
BENCHMARK(BM_gram_lower)->Arg(256)->Arg(768);

static void BM_gram_lower_serial(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const Matrix F = random_matrix(m, m, 2).triangularView<Eigen::Lower>();
  const Matrix W = random_matrix(m, m, 3).triangularView<Eigen::Lower>();
  for (auto _ : state)
    benchmark::DoNotOptimize(popovdae::kernels::serial::gram_lower(F, W, 1, 1));
}
BENCHMARK(BM_gram_lower_serial)->Arg(256)->Arg(768);

static void BM_matmul_at_b(benchmark::State& state) {
  const Eigen::Index q = state.range(0);
  const Matrix A = random_matrix(q, q, 4);
  const Matrix B = random_matrix(q, q, 5);
  for (auto _ : state) benchmark::DoNotOptimize(popovdae::kernels::matmul_at_b(A, B));
}
BENCHMARK(BM_matmul_at_b)->Arg(256)->Arg(768);

static void BM_matmul_at_b_serial(benchmark::State& state) {
  const Eigen::Index q = state.range(0);
  const Matrix A = random_matrix(q, q, 4);
  const Matrix B = random_matrix(q, q, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(popovdae::kernels::serial::matmul_at_b(A, B));
}
BENCHMARK(BM_matmul_at_b_serial)->Arg(256)->Arg(768);

static void BM_block_toeplitz_lower(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::vector<Matrix> blocks(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) blocks[static_cast<std::size_t>(i)] = random_matrix(2, 2, 10 + i);
  for (auto _ : state)
    benchmark::DoNotOptimize(popovdae::kernels::block_toeplitz_lower(blocks, m));
}
BENCHMARK(BM_block_toeplitz_lower)->Arg(256)->Arg(512);

static void BM_block_toeplitz_lower_serial(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  std::vector<Matrix> blocks(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) blocks[static_cast<std::size_t>(i)] = random_matrix(2, 2, 10 + i);
  for (auto _ : state)
    benchmark::DoNotOptimize(popovdae::kernels::serial::block_toeplitz_lower(blocks, m));
}
BENCHMARK(BM_block_toeplitz_lower_serial)->Arg(256)->Arg(512);

BENCHMARK_MAIN();
