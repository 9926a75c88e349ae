#pragma once

#include <cmath>
#include <vector>

#include "msa/regnet.hpp"
#include "msa/rng.hpp"
#include "msa/tensor.hpp"

namespace test_support {

inline msa::Tensor random_tensor(const std::vector<int>& shape, msa::Rng& rng,
                                 double scale = 1.0) {
  msa::Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = scale * rng.next_normal();
  return t;
}

inline msa::RegularizerParams random_params(int layers, int channels, msa::Rng& rng,
                                            double scale = 0.3) {
  msa::RegularizerParams p = msa::RegularizerParams::zeros(layers, channels);
  for (msa::Tensor& w : p.weights) {
    for (std::int64_t i = 0; i < w.size(); ++i) w[i] = scale * rng.next_normal();
  }
  return p;
}

inline double rel_diff(const msa::Tensor& a, const msa::Tensor& b) {
  const double denom = std::max({msa::max_abs(a), msa::max_abs(b), 1e-300});
  return msa::max_abs(msa::sub(a, b)) / denom;
}

inline double rel_diff(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-300});
  return std::fabs(a - b) / denom;
}

inline double params_rel_diff(const msa::RegularizerParams& a, const msa::RegularizerParams& b) {
  double num = 0.0;
  double denom = 1e-300;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    num = std::max(num, msa::max_abs(msa::sub(a.weights[k], b.weights[k])));
    denom = std::max({denom, msa::max_abs(a.weights[k]), msa::max_abs(b.weights[k])});
  }
  return num / denom;
}

inline bool bit_equal(const msa::Tensor& a, const msa::Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace test_support
