// Compares the OpenMP kernels against the serial reference on training-sized
// workloads and checks they agree.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "msa/conv.hpp"
#include "msa/ref_kernels.hpp"
#include "msa/rng.hpp"
#include "msa/tensor.hpp"

namespace {

msa::Tensor random_tensor(const std::vector<int>& shape, msa::Rng& rng) {
  msa::Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.next_normal();
  return t;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto tic = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto toc = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(toc - tic).count() / reps;
}

struct Row {
  const char* name;
  double serial_ms;
  double parallel_ms;
  double max_diff;
};

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  msa::Rng rng(7);
  const int C = 8, H = 64, W = 64, K = 3;
  const msa::Tensor input = random_tensor({C, H, W}, rng);
  const msa::Tensor weights = random_tensor({C, C, K, K}, rng);
  const msa::Tensor gout = random_tensor({C, H, W}, rng);
  const msa::Tensor big_a = random_tensor({1, 1024, 1024}, rng);
  const msa::Tensor big_b = random_tensor({1, 1024, 1024}, rng);
  const int reps = 20;

  std::vector<Row> rows;

  {
    msa::Tensor ref_out = msa::ref::conv2d(input, weights);
    msa::Tensor par_out = msa::conv2d(input, weights);
    rows.push_back({"conv2d            ",
                    time_ms([&] { msa::ref::conv2d(input, weights); }, reps),
                    time_ms([&] { msa::conv2d(input, weights); }, reps),
                    msa::max_abs(msa::sub(ref_out, par_out))});
  }
  {
    msa::Tensor ref_out = msa::ref::conv2d_adjoint_input(gout, weights);
    msa::Tensor par_out = msa::conv2d_adjoint_input(gout, weights);
    rows.push_back({"conv2d_adj_input  ",
                    time_ms([&] { msa::ref::conv2d_adjoint_input(gout, weights); }, reps),
                    time_ms([&] { msa::conv2d_adjoint_input(gout, weights); }, reps),
                    msa::max_abs(msa::sub(ref_out, par_out))});
  }
  {
    const std::vector<int> kshape{C, C, K, K};
    msa::Tensor ref_out = msa::ref::conv2d_adjoint_weights(input, gout, kshape);
    msa::Tensor par_out = msa::conv2d_adjoint_weights(input, gout, kshape);
    rows.push_back({"conv2d_adj_weights",
                    time_ms([&] { msa::ref::conv2d_adjoint_weights(input, gout, kshape); }, reps),
                    time_ms([&] { msa::conv2d_adjoint_weights(input, gout, kshape); }, reps),
                    msa::max_abs(msa::sub(ref_out, par_out))});
  }
  {
    const double ref_v = msa::ref::dot(big_a, big_b);
    const double par_v = msa::dot(big_a, big_b);
    rows.push_back({"dot (1M)          ",
                    time_ms([&] { msa::ref::dot(big_a, big_b); }, reps),
                    time_ms([&] { msa::dot(big_a, big_b); }, reps),
                    std::abs(ref_v - par_v) / std::abs(ref_v)});
  }

  std::printf("%-18s %12s %12s %10s %12s\n", "kernel", "serial ms", "openmp ms", "speedup",
              "max |diff|");
  bool ok = true;
  for (const Row& r : rows) {
    std::printf("%-18s %12.3f %12.3f %9.2fx %12.3e\n", r.name, r.serial_ms, r.parallel_ms,
                r.serial_ms / r.parallel_ms, r.max_diff);
    ok = ok && r.max_diff < 1e-10;
  }
  if (!ok) {
    std::printf("FAIL: kernels disagree with the serial reference\n");
    return 1;
  }
  return 0;
}
