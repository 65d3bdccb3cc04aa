#pragma once

// Data-parallel inner loops shared by the simulator and the network engine.
//
// Every kernel exists twice: `serial::` is the plain reference kept for
// testing, `omp::` is the tiled, OpenMP-parallel version used at runtime.
// Both namespaces expose identical signatures so tests and the benchmark can
// swap them freely.
//
// Matrices are dense row-major. Dense-layer weights are stored [in x out] so
// that a batched forward pass is y = x * W + b.

#include <cstddef>
#include <span>

namespace udn::kernels {

struct DenseDims {
  std::size_t batch;
  std::size_t in;
  std::size_t out;
};

// Geometry of one channel evaluation: users x cells.
struct ChannelDims {
  std::size_t users;
  std::size_t cells;
};

struct ChannelInputs {
  std::span<const double> user_xy;    // users x 2, meters
  std::span<const double> cell_xy;    // cells x 2, meters
  std::span<const double> tx_dbm;     // cells
  std::span<const double> shadow_db;  // users x cells
  double pl_intercept;                // dB
  double pl_slope;                    // dB per decade of km
  double pl_min_km;
};

namespace serial {

// y[b, o] = bias[o] + sum_i x[b, i] * w[i, o]
void dense_forward(DenseDims d, std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y);

// dx[b, i] = sum_o dy[b, o] * w[i, o]
void dense_backward_input(DenseDims d, std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx);

// dw[i, o] += sum_b x[b, i] * dy[b, o];  dbias[o] += sum_b dy[b, o]
void dense_backward_params(DenseDims d, std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> dbias);

// rsrp[u, c] = tx[c] - path_loss(dist(u, c)) + shadow[u, c]
void received_power(ChannelDims d, const ChannelInputs& in, std::span<double> rsrp_dbm);

}  // namespace serial

namespace omp {

void dense_forward(DenseDims d, std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y);
void dense_backward_input(DenseDims d, std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx);
void dense_backward_params(DenseDims d, std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> dbias);
void received_power(ChannelDims d, const ChannelInputs& in, std::span<double> rsrp_dbm);

// Number of threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace omp

}  // namespace udn::kernels
