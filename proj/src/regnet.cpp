#include "msa/regnet.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "msa/activation.hpp"
#include "msa/conv.hpp"
#include "msa/rng.hpp"

namespace msa {

namespace {

void require_layer_shape(const Tensor& w, int layer, int cout, int cin) {
  const std::vector<int> want{cout, cin, 3, 3};
  if (w.shape() == want) return;
  std::string got = "[";
  for (int ax = 0; ax < w.rank(); ++ax) {
    if (ax) got += ",";
    got += std::to_string(w.extent(ax));
  }
  got += "]";
  throw ShapeError("regularizer params: layer " + std::to_string(layer + 1) + " must be [" +
                   std::to_string(cout) + "," + std::to_string(cin) + ",3,3], got " + got);
}

double psi_term(std::int64_t i, const void* ctx) {
  return log_cosh(static_cast<const double*>(ctx)[i]);
}

}  // namespace

int RegularizerParams::channel_count() const {
  return weights.empty() ? 0 : weights.front().extent(0);
}

std::int64_t RegularizerParams::flat_size() const {
  std::int64_t n = 0;
  for (const Tensor& w : weights) n += w.size();
  return n;
}

void RegularizerParams::validate() const {
  const int l = layer_count();
  if (l < 2) throw ShapeError("regularizer params: need at least 2 layers, got " + std::to_string(l));
  const int d = channel_count();
  if (d < 1) throw ShapeError("regularizer params: channel count must be >= 1");
  require_layer_shape(weights.front(), 0, d, 1);
  for (int k = 1; k + 1 < l; ++k) require_layer_shape(weights[static_cast<std::size_t>(k)], k, d, d);
  require_layer_shape(weights.back(), l - 1, 1, d);
}

RegularizerParams RegularizerParams::zeros(int layers, int channels) {
  RegularizerParams p;
  p.weights.emplace_back(std::vector<int>{channels, 1, 3, 3});
  for (int k = 1; k + 1 < layers; ++k) p.weights.emplace_back(std::vector<int>{channels, channels, 3, 3});
  p.weights.emplace_back(std::vector<int>{1, channels, 3, 3});
  p.validate();
  return p;
}

RegularizerParams RegularizerParams::random_init(int layers, int channels, std::uint64_t seed) {
  RegularizerParams p = zeros(layers, channels);
  Rng rng(seed);
  for (Tensor& w : p.weights) {
    // variance-preserving scale: with anything much smaller the feature
    // extractor's output (and every theta-gradient) vanishes to high order in
    // the layer count and plain gradient ascent stalls at the start
    const double fan_in = static_cast<double>(w.extent(1)) * w.extent(2) * w.extent(3);
    const double stddev = 1.0 / std::sqrt(fan_in);
    for (std::int64_t i = 0; i < w.size(); ++i) w[i] = stddev * rng.next_normal();
  }
  return p;
}

RegularizerParams params_add(const RegularizerParams& a, const RegularizerParams& b) {
  RegularizerParams out = a;
  params_add_scaled_inplace(out, 1.0, b);
  return out;
}

RegularizerParams params_sub(const RegularizerParams& a, const RegularizerParams& b) {
  RegularizerParams out = a;
  params_add_scaled_inplace(out, -1.0, b);
  return out;
}

RegularizerParams params_scale(const RegularizerParams& a, double c) {
  RegularizerParams out;
  out.weights.reserve(a.weights.size());
  for (const Tensor& w : a.weights) out.weights.push_back(scale(w, c));
  return out;
}

void params_add_scaled_inplace(RegularizerParams& y, double alpha, const RegularizerParams& x) {
  if (y.weights.size() != x.weights.size()) {
    throw ShapeError("params: layer count mismatch " + std::to_string(y.weights.size()) + " vs " +
                     std::to_string(x.weights.size()));
  }
  for (std::size_t k = 0; k < y.weights.size(); ++k)
    add_scaled_inplace(y.weights[k], alpha, x.weights[k]);
}

double params_dot(const RegularizerParams& a, const RegularizerParams& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.weights.size(); ++k) s += dot(a.weights[k], b.weights[k]);
  return s;
}

double params_norm(const RegularizerParams& a) { return std::sqrt(params_dot(a, a)); }

double params_max_abs_diff(const RegularizerParams& a, const RegularizerParams& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.weights.size(); ++k) m = std::max(m, max_abs(sub(a.weights[k], b.weights[k])));
  return m;
}

bool params_all_finite(const RegularizerParams& a) {
  for (const Tensor& w : a.weights)
    if (!all_finite(w)) return false;
  return true;
}

namespace {

// Cached forward pass: input[k] feeds layer k+1, pre[k] is its convolution
// output. input[0] = x, G = pre[l-1].
struct Trace {
  std::vector<Tensor> input;
  std::vector<Tensor> pre;
};

Trace forward_trace(const Tensor& x, const RegularizerParams& theta) {
  const int l = theta.layer_count();
  const Activation act = silu();
  Trace tr;
  tr.input.reserve(static_cast<std::size_t>(l));
  tr.pre.reserve(static_cast<std::size_t>(l));
  tr.input.push_back(x);
  for (int k = 0; k < l; ++k) {
    tr.pre.push_back(conv2d(tr.input.back(), theta.weights[static_cast<std::size_t>(k)]));
    if (k + 1 < l) tr.input.push_back(elementwise_map(tr.pre.back(), act));
  }
  return tr;
}

struct ReverseOut {
  Tensor grad_x;
  RegularizerParams grad_theta;
};

ReverseOut reverse_from_trace(const Trace& tr, const RegularizerParams& theta, bool want_x,
                              bool want_theta) {
  const int l = theta.layer_count();
  const Activation act = silu();
  const Activation lc = log_cosh_map();
  ReverseOut out;
  if (want_theta) out.grad_theta.weights.resize(static_cast<std::size_t>(l));
  Tensor s = elementwise_map(tr.pre[static_cast<std::size_t>(l - 1)], derivative_of(lc));
  for (int k = l - 1; k >= 0; --k) {
    const Tensor& w = theta.weights[static_cast<std::size_t>(k)];
    if (want_theta) {
      out.grad_theta.weights[static_cast<std::size_t>(k)] =
          conv2d_adjoint_weights(tr.input[static_cast<std::size_t>(k)], s, w.shape());
    }
    if (k > 0 || want_x) {
      Tensor g = conv2d_adjoint_input(s, w);
      if (k > 0) {
        s = hadamard(elementwise_map(tr.pre[static_cast<std::size_t>(k - 1)], derivative_of(act)), g);
      } else {
        out.grad_x = std::move(g);
      }
    }
  }
  return out;
}

// Same passes in dual arithmetic; weights stay primal and the seed enters as
// the tangent of x, so output tangents are second-order products.
struct DualTrace {
  std::vector<DualTensor> input;
  std::vector<DualTensor> pre;
};

DualTrace dual_forward_trace(const DualTensor& x, const RegularizerParams& theta) {
  const int l = theta.layer_count();
  const Activation act = silu();
  DualTrace tr;
  tr.input.reserve(static_cast<std::size_t>(l));
  tr.pre.reserve(static_cast<std::size_t>(l));
  tr.input.push_back(x);
  for (int k = 0; k < l; ++k) {
    tr.pre.push_back(dual_conv2d(tr.input.back(), theta.weights[static_cast<std::size_t>(k)]));
    if (k + 1 < l) tr.input.push_back(dual_elementwise_map(tr.pre.back(), act));
  }
  return tr;
}

struct DualReverseOut {
  DualTensor grad_x;
  std::vector<DualTensor> grad_theta;
};

DualReverseOut dual_reverse_from_trace(const DualTrace& tr, const RegularizerParams& theta,
                                       bool want_x, bool want_theta) {
  const int l = theta.layer_count();
  const Activation act = silu();
  const Activation lc = log_cosh_map();
  DualReverseOut out;
  if (want_theta) out.grad_theta.resize(static_cast<std::size_t>(l));
  DualTensor s =
      dual_elementwise_map(tr.pre[static_cast<std::size_t>(l - 1)], derivative_of(lc));
  for (int k = l - 1; k >= 0; --k) {
    const Tensor& w = theta.weights[static_cast<std::size_t>(k)];
    if (want_theta) {
      out.grad_theta[static_cast<std::size_t>(k)] =
          dual_conv2d_adjoint_weights(tr.input[static_cast<std::size_t>(k)], s, w.shape());
    }
    if (k > 0 || want_x) {
      DualTensor g = dual_conv2d_adjoint_input(s, w);
      if (k > 0) {
        s = dual_hadamard(
            dual_elementwise_map(tr.pre[static_cast<std::size_t>(k - 1)], derivative_of(act)), g);
      } else {
        out.grad_x = std::move(g);
      }
    }
  }
  return out;
}

void require_single_channel(const Tensor& x, const char* op) {
  if (x.rank() != 3 || x.extent(0) != 1) {
    throw ShapeError(std::string(op) + ": x must be [1,H,W], got rank " +
                     std::to_string(x.rank()) +
                     (x.rank() == 3 ? " with axis 0 extent " + std::to_string(x.extent(0)) : ""));
  }
}

}  // namespace

Tensor g_forward(const Tensor& x, const RegularizerParams& theta) {
  require_single_channel(x, "g_forward");
  theta.validate();
  Trace tr = forward_trace(x, theta);
  return std::move(tr.pre.back());
}

double psi(const Tensor& z) { return blocked_sum(z.size(), &psi_term, z.data()); }

double regularizer_value(const Tensor& x, const RegularizerParams& theta) {
  return psi(g_forward(x, theta));
}

Tensor grad_x_R(const Tensor& x, const RegularizerParams& theta) {
  require_single_channel(x, "grad_x_R");
  theta.validate();
  Trace tr = forward_trace(x, theta);
  return std::move(reverse_from_trace(tr, theta, true, false).grad_x);
}

RegularizerParams grad_theta_R(const Tensor& x, const RegularizerParams& theta) {
  require_single_channel(x, "grad_theta_R");
  theta.validate();
  Trace tr = forward_trace(x, theta);
  return std::move(reverse_from_trace(tr, theta, false, true).grad_theta);
}

Tensor hvp_x_R(const Tensor& x, const Tensor& v, const RegularizerParams& theta) {
  require_single_channel(x, "hvp_x_R");
  require_same_shape(x, v, "hvp_x_R");
  theta.validate();
  DualTrace tr = dual_forward_trace(make_dual(x, v), theta);
  return std::move(dual_reverse_from_trace(tr, theta, true, false).grad_x.tangent);
}

RegularizerParams mixed_grad_theta(const Tensor& x, const Tensor& p,
                                   const RegularizerParams& theta) {
  require_single_channel(x, "mixed_grad_theta");
  require_same_shape(x, p, "mixed_grad_theta");
  theta.validate();
  DualTrace tr = dual_forward_trace(make_dual(x, p), theta);
  DualReverseOut rev = dual_reverse_from_trace(tr, theta, false, true);
  RegularizerParams out;
  out.weights.reserve(rev.grad_theta.size());
  for (DualTensor& g : rev.grad_theta) out.weights.push_back(std::move(g.tangent));
  return out;
}

SecondOrderProducts second_order_products(const Tensor& x, const Tensor& seed,
                                          const RegularizerParams& theta) {
  require_single_channel(x, "second_order_products");
  require_same_shape(x, seed, "second_order_products");
  theta.validate();
  DualTrace tr = dual_forward_trace(make_dual(x, seed), theta);
  DualReverseOut rev = dual_reverse_from_trace(tr, theta, true, true);
  SecondOrderProducts out;
  out.hvp = std::move(rev.grad_x.tangent);
  out.mixed.weights.reserve(rev.grad_theta.size());
  for (DualTensor& g : rev.grad_theta) out.mixed.weights.push_back(std::move(g.tangent));
  return out;
}

}  // namespace msa
