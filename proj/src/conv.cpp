#include "msa/conv.hpp"

#include <algorithm>
#include <string>

namespace msa {

namespace {

struct ConvDims {
  int cin, h, w, cout, k, r;
  std::int64_t work;
};

void require_rank(const Tensor& t, int rank, const char* op, const char* arg) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + arg + " must have rank " + std::to_string(rank) +
                     ", got rank " + std::to_string(t.rank()));
  }
}

ConvDims check_conv_dims(const Tensor& image, int image_channel_axis_expected,
                         const Tensor& weights, int weight_image_axis, const char* op) {
  require_rank(image, 3, op, image_channel_axis_expected == 0 ? "input" : "grad_out");
  require_rank(weights, 4, op, "weights");
  const int k = weights.extent(2);
  if (weights.extent(3) != k) {
    throw ShapeError(std::string(op) + ": weights axes 2 and 3 must be square, got " +
                     std::to_string(k) + "x" + std::to_string(weights.extent(3)));
  }
  if (k % 2 == 0) {
    throw ShapeError(std::string(op) + ": kernel extent on axis 2 must be odd, got " +
                     std::to_string(k));
  }
  if (weights.extent(weight_image_axis) != image.extent(0)) {
    throw ShapeError(std::string(op) + ": weights axis " + std::to_string(weight_image_axis) +
                     " (" + std::to_string(weights.extent(weight_image_axis)) +
                     ") does not match image axis 0 (" + std::to_string(image.extent(0)) + ")");
  }
  ConvDims d;
  d.cout = weights.extent(0);
  d.cin = weights.extent(1);
  d.h = image.extent(1);
  d.w = image.extent(2);
  d.k = k;
  d.r = k / 2;
  d.work = static_cast<std::int64_t>(d.cout) * d.cin * d.h * d.w * k * k;
  return d;
}

constexpr std::int64_t kParallelWork = 65536;

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights) {
  const ConvDims d = check_conv_dims(input, 0, weights, 1, "conv2d");
  Tensor out({d.cout, d.h, d.w});
  const double* in = input.data();
  const double* wt = weights.data();
  double* o = out.data();
  const int H = d.h, W = d.w, K = d.k, R = d.r, CI = d.cin, CO = d.cout;
  // Taps accumulate into each output row in fixed (ci,ky,kx) order, so the
  // result is identical for any thread count.
#pragma omp parallel for collapse(2) schedule(static) if (d.work >= kParallelWork)
  for (int co = 0; co < CO; ++co) {
    for (int y = 0; y < H; ++y) {
      double* orow = o + (static_cast<std::int64_t>(co) * H + y) * W;
      for (int ci = 0; ci < CI; ++ci) {
        for (int ky = 0; ky < K; ++ky) {
          const int iy = y + ky - R;
          if (iy < 0 || iy >= H) continue;
          const double* irow = in + (static_cast<std::int64_t>(ci) * H + iy) * W;
          const double* wrow = wt + ((static_cast<std::int64_t>(co) * CI + ci) * K + ky) * K;
          for (int kx = 0; kx < K; ++kx) {
            const double wv = wrow[kx];
            const int off = kx - R;
            const int x0 = off < 0 ? -off : 0;
            const int x1 = off > 0 ? W - off : W;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x + off];
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_adjoint_input(const Tensor& grad_out, const Tensor& weights) {
  const ConvDims d = check_conv_dims(grad_out, 1, weights, 0, "conv2d_adjoint_input");
  Tensor out({d.cin, d.h, d.w});
  const double* g = grad_out.data();
  const double* wt = weights.data();
  double* o = out.data();
  const int H = d.h, W = d.w, K = d.k, R = d.r, CI = d.cin, CO = d.cout;
#pragma omp parallel for collapse(2) schedule(static) if (d.work >= kParallelWork)
  for (int ci = 0; ci < CI; ++ci) {
    for (int y = 0; y < H; ++y) {
      double* orow = o + (static_cast<std::int64_t>(ci) * H + y) * W;
      for (int co = 0; co < CO; ++co) {
        for (int ky = 0; ky < K; ++ky) {
          const int gy = y - ky + R;
          if (gy < 0 || gy >= H) continue;
          const double* grow = g + (static_cast<std::int64_t>(co) * H + gy) * W;
          const double* wrow = wt + ((static_cast<std::int64_t>(co) * CI + ci) * K + ky) * K;
          for (int kx = 0; kx < K; ++kx) {
            const double wv = wrow[kx];
            const int off = R - kx;
            const int x0 = off < 0 ? -off : 0;
            const int x1 = off > 0 ? W - off : W;
            for (int x = x0; x < x1; ++x) orow[x] += wv * grow[x + off];
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_adjoint_weights(const Tensor& input, const Tensor& grad_out,
                              const std::vector<int>& kernel_shape) {
  const char* op = "conv2d_adjoint_weights";
  require_rank(input, 3, op, "input");
  require_rank(grad_out, 3, op, "grad_out");
  if (kernel_shape.size() != 4) {
    throw ShapeError(std::string(op) + ": kernel_shape must have rank 4, got rank " +
                     std::to_string(kernel_shape.size()));
  }
  Tensor out(kernel_shape);
  const ConvDims d = check_conv_dims(input, 0, out, 1, op);
  if (out.extent(0) != grad_out.extent(0)) {
    throw ShapeError(std::string(op) + ": kernel_shape axis 0 (" + std::to_string(out.extent(0)) +
                     ") does not match grad_out axis 0 (" + std::to_string(grad_out.extent(0)) +
                     ")");
  }
  if (grad_out.extent(1) != d.h || grad_out.extent(2) != d.w) {
    const int ax = grad_out.extent(1) != d.h ? 1 : 2;
    throw ShapeError(std::string(op) + ": grad_out axis " + std::to_string(ax) + " (" +
                     std::to_string(grad_out.extent(ax)) + ") does not match input axis " +
                     std::to_string(ax) + " (" + std::to_string(ax == 1 ? d.h : d.w) + ")");
  }
  const double* in = input.data();
  const double* g = grad_out.data();
  double* o = out.data();
  const int H = d.h, W = d.w, K = d.k, R = d.r, CI = d.cin, CO = d.cout;
#pragma omp parallel for collapse(2) schedule(static) if (d.work >= kParallelWork)
  for (int co = 0; co < CO; ++co) {
    for (int ci = 0; ci < CI; ++ci) {
      double* oblock = o + (static_cast<std::int64_t>(co) * CI + ci) * K * K;
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const int offy = ky - R;
          const int offx = kx - R;
          const int y0 = offy < 0 ? -offy : 0;
          const int y1 = offy > 0 ? H - offy : H;
          const int x0 = offx < 0 ? -offx : 0;
          const int x1 = offx > 0 ? W - offx : W;
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* grow = g + (static_cast<std::int64_t>(co) * H + y) * W;
            const double* irow = in + (static_cast<std::int64_t>(ci) * H + y + offy) * W;
            for (int x = x0; x < x1; ++x) acc += grow[x] * irow[x + offx];
          }
          oblock[ky * K + kx] = acc;
        }
      }
    }
  }
  return out;
}

DualTensor dual_conv2d(const DualTensor& input, const DualTensor& weights) {
  Tensor primal = conv2d(input.primal, weights.primal);
  Tensor tangent = conv2d(input.tangent, weights.primal);
  add_scaled_inplace(tangent, 1.0, conv2d(input.primal, weights.tangent));
  return DualTensor{std::move(primal), std::move(tangent)};
}

DualTensor dual_conv2d(const DualTensor& input, const Tensor& weights) {
  return DualTensor{conv2d(input.primal, weights), conv2d(input.tangent, weights)};
}

DualTensor dual_conv2d_adjoint_input(const DualTensor& grad_out, const Tensor& weights) {
  return DualTensor{conv2d_adjoint_input(grad_out.primal, weights),
                    conv2d_adjoint_input(grad_out.tangent, weights)};
}

DualTensor dual_conv2d_adjoint_weights(const DualTensor& input, const DualTensor& grad_out,
                                       const std::vector<int>& kernel_shape) {
  Tensor primal = conv2d_adjoint_weights(input.primal, grad_out.primal, kernel_shape);
  Tensor tangent = conv2d_adjoint_weights(input.tangent, grad_out.primal, kernel_shape);
  add_scaled_inplace(tangent, 1.0,
                     conv2d_adjoint_weights(input.primal, grad_out.tangent, kernel_shape));
  return DualTensor{std::move(primal), std::move(tangent)};
}

Tensor elementwise_map(const Tensor& x, const Activation& fn) {
  return map(x, [f = fn.value](double v) { return f(v); });
}

DualTensor dual_elementwise_map(const DualTensor& x, const Activation& fn) {
  return dual_map(
      x, [f = fn.value](double v) { return f(v); }, [d = fn.deriv](double v) { return d(v); });
}

}  // namespace msa
