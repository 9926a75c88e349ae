#pragma once

namespace msa {

// Twice differentiable scalar map, given by plain function pointers so the
// elementwise kernels stay inlinable. `second` may be null for maps that are
// only ever evaluated in primal mode.
struct Activation {
  double (*value)(double);
  double (*deriv)(double);
  double (*second)(double);
};

// Shift down one derivative order: the map's value is a.deriv, its derivative
// is a.second. Used when the reverse pass itself is run in dual arithmetic.
inline Activation derivative_of(const Activation& a) {
  return Activation{a.deriv, a.second, nullptr};
}

double logistic(double z);

// SiLU z * logistic(z) and its closed-form derivatives.
double silu_value(double z);
double silu_deriv(double z);
double silu_second(double z);
Activation silu();

// log cosh and its derivatives, overflow-safe for |z| up to 1e8:
// log cosh z = |z| + log1p(exp(-2|z|)) - log 2.
double log_cosh(double z);
double log_cosh_deriv(double z);   // tanh
double log_cosh_second(double z);  // 1 - tanh^2
Activation log_cosh_map();

}  // namespace msa
