#pragma once

// Small fully connected network engine for the actor and critic: batched
// forward passes, reverse-mode parameter and input gradients, soft tracking
// updates for guiding copies, and Adam / plain-gradient optimizers.
//
// All parameters of a network live in one flat vector. Layer l contributes a
// weight block [in x out] followed by its bias [out]; the same layout is used
// for gradients and optimizer moments so updates are single loops.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace udn::nn {

// Raised when a gradient or parameter stops being finite.
class DivergenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class OutputActivation {
  kIdentity,
  kScaledTanh,  // lo + (hi - lo) * (tanh(z) + 1) / 2, saturates exactly at the bounds
};

struct LayerView {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight_offset = 0;  // into the flat parameter vector
  std::size_t bias_offset = 0;

  friend bool operator==(const LayerView&, const LayerView&) = default;
};

// Ascent direction with the same layout as the network parameters.
struct GradientSet {
  std::vector<double> values;
  std::uint64_t timestamp = 0;  // server iteration the source parameters came from

  void assign_zero(std::size_t n) { values.assign(n, 0.0); }
  bool finite() const;
};

// Activations of one batched forward pass, kept for the backward pass.
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<double> input;                    // batch x in, after input scaling
  std::vector<std::vector<double>> pre;         // per layer, batch x out
  std::vector<std::vector<double>> post;        // per layer, batch x out
  std::span<const double> output() const { return post.back(); }
};

class DenseNetwork {
 public:
  DenseNetwork() = default;
  // sizes = {in, hidden..., out}; parameters start at zero.
  DenseNetwork(std::vector<std::size_t> sizes, OutputActivation output, double out_lo = -1.0,
               double out_hi = 1.0);

  // Hidden layers uniform in +-1/sqrt(fan_in); last layer in +-final_scale
  // when final_scale > 0, otherwise also +-1/sqrt(fan_in).
  void initialize(std::mt19937_64& rng, double final_scale = 0.0);

  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t layer_count() const { return layers_.size(); }
  const LayerView& layer(std::size_t l) const { return layers_[l]; }
  OutputActivation output_activation() const { return output_; }
  double out_lo() const { return out_lo_; }
  double out_hi() const { return out_hi_; }

  // Fixed per-feature factors applied to every input before the first layer.
  // Empty means unscaled. Not trained, not touched by optimizers or updates.
  void set_input_scale(std::vector<double> scale);
  const std::vector<double>& input_scale() const { return input_scale_; }

  std::size_t param_count() const { return params_.size(); }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  bool same_shape(const DenseNetwork& other) const;

  std::vector<double> forward(std::span<const double> input) const;
  // Row-major batch of inputs; fills `cache`, whose output() holds the results.
  void forward_batch(std::size_t batch, std::span<const double> inputs, ForwardCache& cache) const;

  // Reverse pass of sum_b upstream[b] . output[b] through a cached forward pass.
  // Parameter derivatives are added into `param_grad` when non-null; input
  // derivatives are written to `input_grad` (batch x in) when non-null.
  void backward_batch(const ForwardCache& cache, std::span<const double> upstream,
                      std::vector<double>* param_grad, std::vector<double>* input_grad) const;

  // d(upstream . output)/d(params) for a single input.
  GradientSet param_gradient(std::span<const double> input, std::span<const double> upstream) const;
  // d(output)/d(input) for a network with one output.
  std::vector<double> input_gradient(std::span<const double> input) const;

  friend bool operator==(const DenseNetwork&, const DenseNetwork&) = default;

 private:
  void check_input(std::size_t got, std::size_t batch) const;

  std::vector<std::size_t> sizes_;
  std::vector<LayerView> layers_;
  OutputActivation output_ = OutputActivation::kIdentity;
  double out_lo_ = -1.0;
  double out_hi_ = 1.0;
  std::vector<double> input_scale_;
  std::vector<double> params_;
};

// guide <- tau * source + (1 - tau) * guide
void soft_update(DenseNetwork& guide, const DenseNetwork& source, double tau);
// Bitwise parameter copy between identically shaped networks.
void copy_params(DenseNetwork& dst, const DenseNetwork& src);

enum class OptimizerKind { kAdam, kPlain };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Applies ascent directions: params += step(direction).
class Optimizer {
 public:
  Optimizer() = default;
  explicit Optimizer(OptimizerConfig config);

  const OptimizerConfig& config() const { return config_; }
  std::uint64_t steps() const { return t_; }
  void step(DenseNetwork& net, std::span<const double> direction);

 private:
  OptimizerConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::uint64_t t_ = 0;
};

// Sums every gradient set and takes one optimizer step along the sum.
// Throws DivergenceError on non-finite input and leaves `net` untouched.
void apply_gradients(DenseNetwork& net, std::span<const GradientSet> grads, Optimizer& opt);

// Text checkpoint: shape header then every parameter as a hex float, so a
// save/load round trip is bit-exact.
void save_network(std::ostream& os, const DenseNetwork& net);
DenseNetwork load_network(std::istream& is);

}  // namespace udn::nn
