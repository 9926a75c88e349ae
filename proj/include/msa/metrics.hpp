#pragma once

#include "msa/tensor.hpp"

namespace msa {

// PSNR = 10 log10(peak^2 / MSE) in dB, capped at 200 when MSE vanishes.
double metric_psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// Mean SSIM over 8x8 windows, stride 1, k1 = 0.01, k2 = 0.03, unit dynamic
// range, biased window moments. Requires extents >= 8. Result in [-1, 1].
double metric_ssim(const Tensor& a, const Tensor& b);

}  // namespace msa
