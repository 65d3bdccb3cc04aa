#include "udn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace udn::kernels::omp {
namespace {

constexpr std::size_t kTileRows = 8;
constexpr std::size_t kTileCols = 16;
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 16;

// C(i, j) (+)= sum_l A(i, l) * B(l, j)
// A(i, l) = a[i * a_row + l * a_col]; B is row-major with leading dim ldb;
// C(i, j) = c[i * c_row + j * c_col].
struct Gemm {
  std::size_t m, n, k;
  const double* a;
  std::size_t a_row, a_col;
  const double* b;
  std::size_t ldb;
  double* c;
  std::size_t c_row, c_col;
  bool accumulate;
};

inline void store_tile(const Gemm& g, std::size_t i0, std::size_t j0, std::size_t rm,
                       std::size_t rn, const double (&acc)[kTileRows][kTileCols]) {
  for (std::size_t r = 0; r < rm; ++r) {
    double* row = g.c + (i0 + r) * g.c_row + j0 * g.c_col;
    if (g.accumulate) {
      for (std::size_t t = 0; t < rn; ++t) row[t * g.c_col] += acc[r][t];
    } else {
      for (std::size_t t = 0; t < rn; ++t) row[t * g.c_col] = acc[r][t];
    }
  }
}

// Full 8x16 register tile; the accumulator block stays in vector registers.
inline void full_tile(const Gemm& g, std::size_t i0, std::size_t j0) {
  double acc[kTileRows][kTileCols] = {};
  const double* a = g.a + i0 * g.a_row;
  const double* b = g.b + j0;
  for (std::size_t l = 0; l < g.k; ++l) {
    const double* brow = b + l * g.ldb;
    const double* acol = a + l * g.a_col;
#pragma GCC unroll 8
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const double s = acol[r * g.a_row];
#pragma omp simd
      for (std::size_t t = 0; t < kTileCols; ++t) acc[r][t] += s * brow[t];
    }
  }
  store_tile(g, i0, j0, kTileRows, kTileCols, acc);
}

inline void edge_tile(const Gemm& g, std::size_t i0, std::size_t j0, std::size_t rm,
                      std::size_t rn) {
  double acc[kTileRows][kTileCols] = {};
  const double* a = g.a + i0 * g.a_row;
  const double* b = g.b + j0;
  for (std::size_t l = 0; l < g.k; ++l) {
    const double* brow = b + l * g.ldb;
    const double* acol = a + l * g.a_col;
    for (std::size_t r = 0; r < rm; ++r) {
      const double s = acol[r * g.a_row];
#pragma omp simd
      for (std::size_t t = 0; t < rn; ++t) acc[r][t] += s * brow[t];
    }
  }
  store_tile(g, i0, j0, rm, rn, acc);
}

void run(const Gemm& g) {
  if (g.m == 0 || g.n == 0) return;
  const std::size_t row_tiles = (g.m + kTileRows - 1) / kTileRows;
  const std::size_t col_tiles = (g.n + kTileCols - 1) / kTileCols;
  const std::size_t tiles = row_tiles * col_tiles;
  const bool parallel = g.m * g.n * g.k >= kParallelWork;
  (void)parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t t = 0; t < tiles; ++t) {
    const std::size_t i0 = (t / col_tiles) * kTileRows;
    const std::size_t j0 = (t % col_tiles) * kTileCols;
    const std::size_t rm = std::min(kTileRows, g.m - i0);
    const std::size_t rn = std::min(kTileCols, g.n - j0);
    if (rm == kTileRows && rn == kTileCols) {
      full_tile(g, i0, j0);
    } else {
      edge_tile(g, i0, j0, rm, rn);
    }
  }
}

std::vector<double>& scratch() {
  thread_local std::vector<double> buf;
  return buf;
}

}  // namespace

void dense_forward(DenseDims d, std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y) {
  run(Gemm{d.batch, d.out, d.in, x.data(), d.in, 1, w.data(), d.out, y.data(), d.out, 1, false});
  for (std::size_t b = 0; b < d.batch; ++b) {
    double* row = y.data() + b * d.out;
#pragma omp simd
    for (std::size_t o = 0; o < d.out; ++o) row[o] += bias[o];
  }
}

void dense_backward_input(DenseDims d, std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx) {
  // dx^T = W * dy^T, so dy is transposed once into [out x batch].
  auto& dyt = scratch();
  dyt.resize(d.out * d.batch);
  for (std::size_t b = 0; b < d.batch; ++b)
    for (std::size_t o = 0; o < d.out; ++o) dyt[o * d.batch + b] = dy[b * d.out + o];
  run(Gemm{d.in, d.batch, d.out, w.data(), d.out, 1, dyt.data(), d.batch, dx.data(), 1, d.in,
           false});
}

void dense_backward_params(DenseDims d, std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> dbias) {
  run(Gemm{d.in, d.out, d.batch, x.data(), 1, d.in, dy.data(), d.out, dw.data(), d.out, 1, true});
  for (std::size_t b = 0; b < d.batch; ++b) {
    const double* row = dy.data() + b * d.out;
#pragma omp simd
    for (std::size_t o = 0; o < d.out; ++o) dbias[o] += row[o];
  }
}

void received_power(ChannelDims d, const ChannelInputs& in, std::span<double> rsrp_dbm) {
  const bool parallel = d.users * d.cells >= 4096;
  (void)parallel;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t u = 0; u < d.users; ++u) {
    const double ux = in.user_xy[2 * u];
    const double uy = in.user_xy[2 * u + 1];
    for (std::size_t c = 0; c < d.cells; ++c) {
      const double dx = ux - in.cell_xy[2 * c];
      const double dy = uy - in.cell_xy[2 * c + 1];
      const double km = std::sqrt(dx * dx + dy * dy) / 1000.0;
      const double pl = in.pl_intercept + in.pl_slope * std::log10(std::max(km, in.pl_min_km));
      rsrp_dbm[u * d.cells + c] = in.tx_dbm[c] - pl + in.shadow_db[u * d.cells + c];
    }
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace udn::kernels::omp
