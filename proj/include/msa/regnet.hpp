#pragma once

#include <cstdint>
#include <vector>

#include "msa/tensor.hpp"

namespace msa {

// Weights of the l-layer convolutional feature extractor G. Layout:
//   w_1 [d,1,3,3], w_2..w_{l-1} [d,d,3,3], w_l [1,d,3,3],  l >= 2, d >= 1.
// Treated as one flat vector by the control updates and the running cost.
struct RegularizerParams {
  std::vector<Tensor> weights;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int channel_count() const;
  std::int64_t flat_size() const;
  void validate() const;

  static RegularizerParams zeros(int layers, int channels);
  // Entries i.i.d. normal with standard deviation 0.1/sqrt(fan_in), drawn in
  // layer order from the seeded splitmix64 stream.
  static RegularizerParams random_init(int layers, int channels, std::uint64_t seed);
};

// Flat-vector operations.
RegularizerParams params_add(const RegularizerParams& a, const RegularizerParams& b);
RegularizerParams params_sub(const RegularizerParams& a, const RegularizerParams& b);
RegularizerParams params_scale(const RegularizerParams& a, double c);
void params_add_scaled_inplace(RegularizerParams& y, double alpha, const RegularizerParams& x);
double params_dot(const RegularizerParams& a, const RegularizerParams& b);
double params_norm(const RegularizerParams& a);
double params_max_abs_diff(const RegularizerParams& a, const RegularizerParams& b);
bool params_all_finite(const RegularizerParams& a);

// G(x) = w_l * silu( ... silu(w_1 * x)), final convolution with no trailing
// activation. x is single-channel [1,H,W].
Tensor g_forward(const Tensor& x, const RegularizerParams& theta);

// psi(z) = sum_i log cosh(z_i), overflow-safe.
double psi(const Tensor& z);

// R(x;theta) = psi(G(x)) >= 0.
double regularizer_value(const Tensor& x, const RegularizerParams& theta);

// Exact reverse-mode gradients of R.
Tensor grad_x_R(const Tensor& x, const RegularizerParams& theta);
RegularizerParams grad_theta_R(const Tensor& x, const RegularizerParams& theta);

// Hessian-vector product (grad^2_x R) v, computed forward-over-reverse: the
// whole reverse pass runs in dual arithmetic with x seeded by tangent v.
Tensor hvp_x_R(const Tensor& x, const Tensor& v, const RegularizerParams& theta);

// Gradient with respect to theta of s(theta) = <p, grad_x_R(x,theta)>. Same
// dual reverse pass with tangent seed p; the tangent of the theta-gradient is
// the mixed second-order product.
RegularizerParams mixed_grad_theta(const Tensor& x, const Tensor& p,
                                   const RegularizerParams& theta);

// Both second-order products for one seed direction from a single pass; the
// Hamiltonian gradients consume both with the same costate seed.
struct SecondOrderProducts {
  Tensor hvp;
  RegularizerParams mixed;
};
SecondOrderProducts second_order_products(const Tensor& x, const Tensor& seed,
                                          const RegularizerParams& theta);

}  // namespace msa
