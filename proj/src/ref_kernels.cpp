#include "msa/ref_kernels.hpp"

#include "msa/errors.hpp"

namespace msa::ref {

// Direct summation; shape handling mirrors the production kernels but every
// output element is an independent quadruple loop with bounds checks.

Tensor conv2d(const Tensor& input, const Tensor& weights) {
  const int CI = input.extent(0), H = input.extent(1), W = input.extent(2);
  const int CO = weights.extent(0), K = weights.extent(2), R = K / 2;
  if (weights.extent(1) != CI) throw ShapeError("ref::conv2d: channel mismatch on weights axis 1");
  Tensor out({CO, H, W});
  for (int co = 0; co < CO; ++co)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int ci = 0; ci < CI; ++ci)
          for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx) {
              const int iy = y + ky - R;
              const int ix = x + kx - R;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              s += input[(static_cast<std::int64_t>(ci) * H + iy) * W + ix] *
                   weights[((static_cast<std::int64_t>(co) * CI + ci) * K + ky) * K + kx];
            }
        out[(static_cast<std::int64_t>(co) * H + y) * W + x] = s;
      }
  return out;
}

Tensor conv2d_adjoint_input(const Tensor& grad_out, const Tensor& weights) {
  const int CO = grad_out.extent(0), H = grad_out.extent(1), W = grad_out.extent(2);
  const int CI = weights.extent(1), K = weights.extent(2), R = K / 2;
  if (weights.extent(0) != CO)
    throw ShapeError("ref::conv2d_adjoint_input: channel mismatch on weights axis 0");
  Tensor out({CI, H, W});
  for (int ci = 0; ci < CI; ++ci)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int co = 0; co < CO; ++co)
          for (int ky = 0; ky < K; ++ky)
            for (int kx = 0; kx < K; ++kx) {
              const int gy = y - ky + R;
              const int gx = x - kx + R;
              if (gy < 0 || gy >= H || gx < 0 || gx >= W) continue;
              s += grad_out[(static_cast<std::int64_t>(co) * H + gy) * W + gx] *
                   weights[((static_cast<std::int64_t>(co) * CI + ci) * K + ky) * K + kx];
            }
        out[(static_cast<std::int64_t>(ci) * H + y) * W + x] = s;
      }
  return out;
}

Tensor conv2d_adjoint_weights(const Tensor& input, const Tensor& grad_out,
                              const std::vector<int>& kernel_shape) {
  const int CI = input.extent(0), H = input.extent(1), W = input.extent(2);
  const int CO = grad_out.extent(0);
  const int K = kernel_shape[2], R = K / 2;
  Tensor out(kernel_shape);
  for (int co = 0; co < CO; ++co)
    for (int ci = 0; ci < CI; ++ci)
      for (int ky = 0; ky < K; ++ky)
        for (int kx = 0; kx < K; ++kx) {
          double s = 0.0;
          for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
              const int iy = y + ky - R;
              const int ix = x + kx - R;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              s += grad_out[(static_cast<std::int64_t>(co) * H + y) * W + x] *
                   input[(static_cast<std::int64_t>(ci) * H + iy) * W + ix];
            }
          out[((static_cast<std::int64_t>(co) * CI + ci) * K + ky) * K + kx] = s;
        }
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const Tensor& a) {
  double s = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return s;
}

}  // namespace msa::ref
