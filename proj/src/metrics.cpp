#include "msa/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace msa {

double metric_psnr(const Tensor& a, const Tensor& b, double peak) {
  require_same_shape(a, b, "metric_psnr");
  const double mse = sum_squares(sub(a, b)) / static_cast<double>(a.size());
  if (mse == 0.0) return 200.0;
  return std::min(200.0, 10.0 * std::log10(peak * peak / mse));
}

double metric_ssim(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "metric_ssim");
  if (a.rank() != 3 || a.extent(0) != 1) throw ShapeError("metric_ssim: image must be [1,H,W]");
  const int H = a.extent(1), W = a.extent(2);
  constexpr int win = 8;
  if (H < win || W < win) {
    throw ShapeError("metric_ssim: extents must be >= 8, got " + std::to_string(H) + "x" +
                     std::to_string(W));
  }
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  const double* pa = a.data();
  const double* pb = b.data();
  double total = 0.0;
  long count = 0;
  for (int y = 0; y + win <= H; ++y) {
    for (int x = 0; x + win <= W; ++x) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = 0; dy < win; ++dy) {
        for (int dx = 0; dx < win; ++dx) {
          const double va = pa[(y + dy) * W + (x + dx)];
          const double vb = pb[(y + dy) * W + (x + dx)];
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      constexpr double n = win * win;
      const double mu_a = sa / n;
      const double mu_b = sb / n;
      const double var_a = saa / n - mu_a * mu_a;
      const double var_b = sbb / n - mu_b * mu_b;
      const double cov = sab / n - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace msa
