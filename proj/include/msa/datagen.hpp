#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msa/dynamics.hpp"

namespace msa {

// Synthetic ground-truth image with values in [0,1], deterministic from its
// descriptor.
struct Phantom {
  Tensor image;  // [1,H,W]
  int n_shapes = 0;
  std::uint64_t seed = 0;
};

// Superposition of random axis-aligned rectangles and ellipses with constant
// intensities, clipped to [0,1]. H, W >= 8.
Phantom make_phantom(int height, int width, int n_shapes, std::uint64_t seed);

// b = A x_gt + sigma * eps, eps i.i.d. standard normal from `noise_seed`.
ProblemInstance simulate_measurement(const Phantom& phantom, const MeasurementOp& op,
                                     double sigma, std::uint64_t noise_seed, double lambda,
                                     double rho);

// Operator builders: truncated Gaussian blur kernel normalized to sum 1, and
// a Bernoulli keep-mask.
Tensor make_blur_kernel(int size, double sigma_blur);
Tensor make_keep_mask(int height, int width, double keep_fraction, std::uint64_t seed);

struct DatasetSpec {
  int train_count = 8;
  int test_count = 8;
  int height = 32;
  int width = 32;
  int n_shapes = 6;
  double sigma = 0.1;
  double lambda = 0.05;
  double rho = 0.0;
  std::uint64_t seed = 1;
};

// Disjoint train/test splits; per-instance phantom and noise seeds are drawn
// from one splitmix64 stream over `seed` (train first, then test).
struct Dataset {
  std::vector<ProblemInstance> train;
  std::vector<ProblemInstance> test;
};
Dataset make_dataset(const DatasetSpec& spec, const MeasurementOp& op);

// Image file I/O. P5 is the binary portable graymap (maxval 255, values
// scaled to [0,1] on read). MSAF is a raw lossless float format:
// magic "MSAF", u32 H, u32 W, u32 reserved, then H*W little-endian f64.
Tensor read_image(const std::string& path);  // sniffs the magic
Tensor read_p5(const std::string& path);
Tensor read_msaf(const std::string& path);
void write_p5(const std::string& path, const Tensor& image);
void write_msaf(const std::string& path, const Tensor& image);
// Dispatches on extension: .pgm -> P5, anything else -> MSAF.
void write_image(const std::string& path, const Tensor& image);

}  // namespace msa
