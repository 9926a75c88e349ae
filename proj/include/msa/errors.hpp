#pragma once

#include <stdexcept>
#include <string>

namespace msa {

// Tensor/operator contract violation; the message names the offending axis.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

// Bad or inconsistent run configuration (unknown key, out-of-range value).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite state produced during integration; carries the step index.
struct DivergenceError : std::runtime_error {
  int step;
  DivergenceError(const std::string& what, int step_index)
      : std::runtime_error(what), step(step_index) {}
};

// File format or I/O failure; messages carry the byte offset where parsing stopped.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msa
