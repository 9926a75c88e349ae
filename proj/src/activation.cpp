#include "msa/activation.hpp"

#include <cmath>

namespace msa {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double silu_value(double z) { return z * logistic(z); }

double silu_deriv(double z) {
  const double s = logistic(z);
  return s * (1.0 + z * (1.0 - s));
}

double silu_second(double z) {
  const double s = logistic(z);
  return s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s));
}

Activation silu() { return Activation{&silu_value, &silu_deriv, &silu_second}; }

double log_cosh(double z) {
  const double a = std::fabs(z);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.693147180559945309417232121458;
}

double log_cosh_deriv(double z) { return std::tanh(z); }

double log_cosh_second(double z) {
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

Activation log_cosh_map() { return Activation{&log_cosh, &log_cosh_deriv, &log_cosh_second}; }

}  // namespace msa
