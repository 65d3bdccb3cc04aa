#include "udn/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace udn::kernels::serial {

void dense_forward(DenseDims d, std::span<const double> x, std::span<const double> w,
                   std::span<const double> bias, std::span<double> y) {
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t o = 0; o < d.out; ++o) {
      double acc = bias[o];
      for (std::size_t i = 0; i < d.in; ++i) acc += x[b * d.in + i] * w[i * d.out + o];
      y[b * d.out + o] = acc;
    }
  }
}

void dense_backward_input(DenseDims d, std::span<const double> dy, std::span<const double> w,
                          std::span<double> dx) {
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t i = 0; i < d.in; ++i) {
      double acc = 0.0;
      for (std::size_t o = 0; o < d.out; ++o) acc += dy[b * d.out + o] * w[i * d.out + o];
      dx[b * d.in + i] = acc;
    }
  }
}

void dense_backward_params(DenseDims d, std::span<const double> x, std::span<const double> dy,
                           std::span<double> dw, std::span<double> dbias) {
  for (std::size_t i = 0; i < d.in; ++i) {
    for (std::size_t o = 0; o < d.out; ++o) {
      double acc = 0.0;
      for (std::size_t b = 0; b < d.batch; ++b) acc += x[b * d.in + i] * dy[b * d.out + o];
      dw[i * d.out + o] += acc;
    }
  }
  for (std::size_t o = 0; o < d.out; ++o) {
    double acc = 0.0;
    for (std::size_t b = 0; b < d.batch; ++b) acc += dy[b * d.out + o];
    dbias[o] += acc;
  }
}

void received_power(ChannelDims d, const ChannelInputs& in, std::span<double> rsrp_dbm) {
  for (std::size_t u = 0; u < d.users; ++u) {
    for (std::size_t c = 0; c < d.cells; ++c) {
      const double dx = in.user_xy[2 * u] - in.cell_xy[2 * c];
      const double dy = in.user_xy[2 * u + 1] - in.cell_xy[2 * c + 1];
      const double km = std::sqrt(dx * dx + dy * dy) / 1000.0;
      const double pl = in.pl_intercept + in.pl_slope * std::log10(std::max(km, in.pl_min_km));
      rsrp_dbm[u * d.cells + c] = in.tx_dbm[c] - pl + in.shadow_db[u * d.cells + c];
    }
  }
}

}  // namespace udn::kernels::serial
