#pragma once

#include <cstdint>
#include <string>

#include "msa/solvers.hpp"

namespace msa {

// Plain-text `key = value` run configuration. Every key has a default;
// unknown keys are rejected. '#' starts a comment.
struct RunConfig {
  // problem
  std::string operator_kind = "identity";  // identity | blur | mask
  double sigma = 0.1;
  double lambda = 0.05;
  double rho = 0.0;
  double mask_keep = 0.4;
  double blur_sigma = 1.0;
  int blur_size = 5;

  // regularizer
  int layers = 4;
  int channels = 8;

  // solver
  int T = 15;
  double tau = 0.1;
  double eta = 2.0;
  int K = 50;
  std::string variant = "control_flow";
  bool paper_literal_signs = false;
  bool drift_probe = true;  // memfree: measure reconstruction drift

  // dataset
  int train_count = 8;
  int test_count = 8;
  int height = 32;
  int width = 32;
  int shapes = 6;
  std::uint64_t seed = 1;

  // output
  std::string output_dir = "out";

  static RunConfig parse_text(const std::string& text);
  static RunConfig parse_file(const std::string& path);

  // Canonical serialized form (fixed key order); digest is FNV-1a 64 over it.
  std::string canonical_text() const;
  std::uint64_t digest() const;

  SolverConfig solver() const;
  void validate() const;
};

}  // namespace msa
