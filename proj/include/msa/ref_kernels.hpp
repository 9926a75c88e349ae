#pragma once

#include <vector>

#include "msa/tensor.hpp"

namespace msa::ref {

// Serial reference kernels: direct nested-loop summation, one accumulator per
// output element, no padding tricks and no threading. Kept as the oracle for
// the OpenMP kernels and as the baseline in the kernel benchmark.
Tensor conv2d(const Tensor& input, const Tensor& weights);
Tensor conv2d_adjoint_input(const Tensor& grad_out, const Tensor& weights);
Tensor conv2d_adjoint_weights(const Tensor& input, const Tensor& grad_out,
                              const std::vector<int>& kernel_shape);

double dot(const Tensor& a, const Tensor& b);
double sum_squares(const Tensor& a);

}  // namespace msa::ref
