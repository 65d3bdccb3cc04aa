#include "udn/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "udn/kernels.hpp"

namespace udn::nn {
namespace {

namespace kern = kernels::omp;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw std::runtime_error("network checkpoint: bad number '" + token + "'");
  return v;
}

}  // namespace

bool GradientSet::finite() const { return all_finite(values); }

DenseNetwork::DenseNetwork(std::vector<std::size_t> sizes, OutputActivation output, double out_lo,
                           double out_hi)
    : sizes_(std::move(sizes)), output_(output), out_lo_(out_lo), out_hi_(out_hi) {
  require(sizes_.size() >= 2, "network: needs at least an input and an output size");
  for (std::size_t s : sizes_) require(s > 0, "network: layer sizes must be positive");
  require(out_lo_ < out_hi_, "network: output bounds must satisfy lo < hi");
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    LayerView v{sizes_[l], sizes_[l + 1], offset, offset + sizes_[l] * sizes_[l + 1]};
    offset = v.bias_offset + v.out;
    layers_.push_back(v);
  }
  params_.assign(offset, 0.0);
}

void DenseNetwork::initialize(std::mt19937_64& rng, double final_scale) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& v = layers_[l];
    const bool last = l + 1 == layers_.size();
    const double bound =
        last && final_scale > 0.0 ? final_scale : 1.0 / std::sqrt(static_cast<double>(v.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = v.weight_offset; i < v.bias_offset + v.out; ++i) params_[i] = dist(rng);
  }
}

bool DenseNetwork::same_shape(const DenseNetwork& other) const {
  return sizes_ == other.sizes_ && output_ == other.output_ && out_lo_ == other.out_lo_ &&
         out_hi_ == other.out_hi_;
}

void DenseNetwork::check_input(std::size_t got, std::size_t batch) const {
  if (got != batch * input_dim())
    throw std::invalid_argument("network: input has " + std::to_string(got) + " values, expected " +
                                std::to_string(batch * input_dim()));
}

void DenseNetwork::set_input_scale(std::vector<double> scale) {
  require(scale.empty() || scale.size() == input_dim(), "network: input scale size mismatch");
  for (double f : scale)
    require(std::isfinite(f) && f != 0.0, "network: input scale must be finite and non-zero");
  input_scale_ = std::move(scale);
}

std::vector<double> DenseNetwork::forward(std::span<const double> input) const {
  ForwardCache cache;
  forward_batch(1, input, cache);
  return cache.post.back();
}

void DenseNetwork::forward_batch(std::size_t batch, std::span<const double> inputs,
                                 ForwardCache& cache) const {
  check_input(inputs.size(), batch);
  cache.batch = batch;
  cache.input.assign(inputs.begin(), inputs.end());
  if (!input_scale_.empty()) {
    const std::size_t in = input_dim();
    for (std::size_t i = 0; i < cache.input.size(); ++i) cache.input[i] *= input_scale_[i % in];
  }
  cache.pre.resize(layers_.size());
  cache.post.resize(layers_.size());
  const std::span<const double> p = params_;
  std::span<const double> x = cache.input;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& v = layers_[l];
    auto& pre = cache.pre[l];
    auto& post = cache.post[l];
    pre.resize(batch * v.out);
    post.resize(batch * v.out);
    kern::dense_forward({batch, v.in, v.out}, x, p.subspan(v.weight_offset, v.in * v.out),
                        p.subspan(v.bias_offset, v.out), pre);
    if (l + 1 < layers_.size()) {
      for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    } else if (output_ == OutputActivation::kScaledTanh) {
      const double span = out_hi_ - out_lo_;
      for (std::size_t i = 0; i < pre.size(); ++i)
        post[i] = out_lo_ + span * ((std::tanh(pre[i]) + 1.0) * 0.5);
    } else {
      post = pre;
    }
    x = post;
  }
}

void DenseNetwork::backward_batch(const ForwardCache& cache, std::span<const double> upstream,
                                  std::vector<double>* param_grad,
                                  std::vector<double>* input_grad) const {
  const std::size_t batch = cache.batch;
  require(upstream.size() == batch * output_dim(), "network: upstream dimension mismatch");
  if (param_grad) {
    if (param_grad->empty()) param_grad->assign(params_.size(), 0.0);
    require(param_grad->size() == params_.size(), "network: gradient buffer shape mismatch");
  }

  std::vector<double> delta(upstream.begin(), upstream.end());
  if (output_ == OutputActivation::kScaledTanh) {
    const double half = 0.5 * (out_hi_ - out_lo_);
    const auto& pre = cache.pre.back();
    for (std::size_t i = 0; i < delta.size(); ++i) {
      const double t = std::tanh(pre[i]);
      delta[i] *= half * (1.0 - t * t);
    }
  }

  const std::span<const double> p = params_;
  std::vector<double> dx;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& v = layers_[l];
    const std::span<const double> x = l == 0 ? std::span<const double>(cache.input)
                                             : std::span<const double>(cache.post[l - 1]);
    if (param_grad) {
      std::span<double> g = *param_grad;
      kern::dense_backward_params({batch, v.in, v.out}, x, delta,
                                  g.subspan(v.weight_offset, v.in * v.out),
                                  g.subspan(v.bias_offset, v.out));
    }
    if (l == 0 && !input_grad) break;
    dx.resize(batch * v.in);
    kern::dense_backward_input({batch, v.in, v.out}, delta,
                               p.subspan(v.weight_offset, v.in * v.out), dx);
    if (l == 0) {
      if (!input_scale_.empty())
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= input_scale_[i % v.in];
      *input_grad = std::move(dx);
      break;
    }
    const auto& pre = cache.pre[l - 1];
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (!(pre[i] > 0.0)) dx[i] = 0.0;
    delta.swap(dx);
  }
}

GradientSet DenseNetwork::param_gradient(std::span<const double> input,
                                         std::span<const double> upstream) const {
  ForwardCache cache;
  forward_batch(1, input, cache);
  GradientSet g;
  g.assign_zero(params_.size());
  backward_batch(cache, upstream, &g.values, nullptr);
  return g;
}

std::vector<double> DenseNetwork::input_gradient(std::span<const double> input) const {
  require(output_dim() == 1, "network: input_gradient needs a scalar output");
  ForwardCache cache;
  forward_batch(1, input, cache);
  const double one = 1.0;
  std::vector<double> dx;
  backward_batch(cache, std::span<const double>(&one, 1), nullptr, &dx);
  return dx;
}

void soft_update(DenseNetwork& guide, const DenseNetwork& source, double tau) {
  require(guide.same_shape(source), "soft_update: shape mismatch");
  require(tau > 0.0 && tau <= 1.0, "soft_update: tau must be in (0, 1]");
  auto g = guide.params();
  const auto s = source.params();
  if (tau == 1.0) {
    std::copy(s.begin(), s.end(), g.begin());
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = tau * s[i] + (1.0 - tau) * g[i];
}

void copy_params(DenseNetwork& dst, const DenseNetwork& src) {
  require(dst.same_shape(src), "copy_params: shape mismatch");
  const auto s = src.params();
  std::copy(s.begin(), s.end(), dst.params().begin());
}

void OptimizerConfig::validate() const {
  require(learning_rate > 0.0, "optimizer: learning rate must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0, "optimizer: beta1 must be in [0, 1)");
  require(beta2 >= 0.0 && beta2 < 1.0, "optimizer: beta2 must be in [0, 1)");
  require(epsilon > 0.0, "optimizer: epsilon must be positive");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::step(DenseNetwork& net, std::span<const double> direction) {
  auto p = net.params();
  require(direction.size() == p.size(), "optimizer: direction shape mismatch");
  if (!all_finite(direction)) throw DivergenceError("optimizer: non-finite gradient");
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kPlain) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += lr * direction[i];
    return;
  }
  if (m_.size() != p.size()) {
    m_.assign(p.size(), 0.0);
    v_.assign(p.size(), 0.0);
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step = lr * std::sqrt(c2) / c1;
  const double eps = config_.epsilon * std::sqrt(c2);
  // Moments of parameters whose gradient stays zero (dead ReLU units) decay
  // into the subnormal range, where arithmetic is two orders of magnitude
  // slower. Such values contribute nothing measurable, so they are flushed.
  constexpr double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double g = direction[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    if (std::fabs(m_[i]) < tiny) m_[i] = 0.0;
    if (v_[i] < tiny) v_[i] = 0.0;
    p[i] += step * m_[i] / (std::sqrt(v_[i]) + eps);
  }
}

void apply_gradients(DenseNetwork& net, std::span<const GradientSet> grads, Optimizer& opt) {
  std::vector<double> sum(net.param_count(), 0.0);
  for (const auto& g : grads) {
    require(g.values.size() == sum.size(), "apply_gradients: gradient shape mismatch");
    if (!g.finite()) throw DivergenceError("apply_gradients: non-finite gradient");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g.values[i];
  }
  if (grads.empty()) return;
  opt.step(net, sum);
}

void save_network(std::ostream& os, const DenseNetwork& net) {
  os << "udn-net 1\nsizes";
  for (std::size_t s : net.sizes()) os << ' ' << s;
  os << "\noutput "
     << (net.output_activation() == OutputActivation::kScaledTanh ? "scaled-tanh" : "identity");
  char buf[64];
  std::snprintf(buf, sizeof buf, " %a %a", net.out_lo(), net.out_hi());
  os << buf << "\ninput_scale " << net.input_scale().size();
  for (double v : net.input_scale()) {
    std::snprintf(buf, sizeof buf, " %a", v);
    os << buf;
  }
  os << "\nparams " << net.param_count() << '\n';
  for (double v : net.params()) {
    std::snprintf(buf, sizeof buf, "%a\n", v);
    os << buf;
  }
}

DenseNetwork load_network(std::istream& is) {
  auto fail = [](const std::string& what) {
    throw std::runtime_error("network checkpoint: " + what);
  };
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "udn-net" || version != 1) fail("bad header");
  std::string line;
  std::getline(is, line);
  if (!std::getline(is, line) || line.rfind("sizes", 0) != 0) fail("missing sizes");
  std::vector<std::size_t> sizes;
  {
    std::size_t pos = 5;
    while (pos < line.size()) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(line.c_str() + pos, &end, 10);
      if (end == line.c_str() + pos) break;
      sizes.push_back(static_cast<std::size_t>(v));
      pos = static_cast<std::size_t>(end - line.c_str());
    }
  }
  std::string kw, kind, lo, hi;
  if (!(is >> kw >> kind >> lo >> hi) || kw != "output") fail("missing output line");
  OutputActivation act = OutputActivation::kIdentity;
  if (kind == "identity") {
    act = OutputActivation::kIdentity;
  } else if (kind == "scaled-tanh") {
    act = OutputActivation::kScaledTanh;
  } else {
    fail("unknown output activation '" + kind + "'");
  }
  DenseNetwork net(sizes, act, parse_double(lo), parse_double(hi));
  std::size_t count = 0;
  if (!(is >> kw >> count) || kw != "input_scale") fail("missing input_scale line");
  std::vector<double> scale(count);
  for (auto& v : scale) {
    std::string token;
    if (!(is >> token)) fail("truncated input scale");
    v = parse_double(token);
  }
  try {
    net.set_input_scale(std::move(scale));
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (!(is >> kw >> count) || kw != "params") fail("missing params line");
  if (count != net.param_count()) fail("parameter count does not match the shape");
  auto p = net.params();
  std::string token;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(is >> token)) fail("truncated parameter list");
    p[i] = parse_double(token);
  }
  return net;
}

}  // namespace udn::nn
