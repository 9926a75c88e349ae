#pragma once

#include <vector>

#include "msa/activation.hpp"
#include "msa/tensor.hpp"

namespace msa {

// 2-D cross-correlation, zero padding, stride 1, "same" output size.
// input [C_in,H,W] x weights [C_out,C_in,k,k] -> [C_out,H,W], k odd.
Tensor conv2d(const Tensor& input, const Tensor& weights);

// Transpose of conv2d in its input argument:
// <conv2d(u,w), v> == <u, conv2d_adjoint_input(v,w)>.
Tensor conv2d_adjoint_input(const Tensor& grad_out, const Tensor& weights);

// Transpose of conv2d in its weight argument:
// <conv2d(u,w), v> == <w, conv2d_adjoint_weights(u,v,shape(w))>.
Tensor conv2d_adjoint_weights(const Tensor& input, const Tensor& grad_out,
                              const std::vector<int>& kernel_shape);

// Forward-mode rules. conv2d is bilinear, so tangents follow the product rule;
// with primal-only weights the weight term drops out.
DualTensor dual_conv2d(const DualTensor& input, const DualTensor& weights);
DualTensor dual_conv2d(const DualTensor& input, const Tensor& weights);
DualTensor dual_conv2d_adjoint_input(const DualTensor& grad_out, const Tensor& weights);
DualTensor dual_conv2d_adjoint_weights(const DualTensor& input, const DualTensor& grad_out,
                                       const std::vector<int>& kernel_shape);

// Entrywise application of a twice differentiable scalar map.
Tensor elementwise_map(const Tensor& x, const Activation& fn);
// Primal fn.value, tangent fn.deriv(primal) * tangent. Lifting `fn` with
// derivative_of() exercises the second-derivative hook.
DualTensor dual_elementwise_map(const DualTensor& x, const Activation& fn);

}  // namespace msa
