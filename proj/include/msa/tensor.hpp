#pragma once

#include <cstdint>
#include <vector>

#include "msa/errors.hpp"

namespace msa {

// Dense row-major tensor of 64-bit floats. The universal numeric carrier for
// states, costates, measurements and convolution weights. Values are treated
// as immutable once constructed by the higher-level modules; every kernel
// below is a pure function of its inputs.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);  // zero-filled
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor zeros(const std::vector<int>& shape) { return Tensor(shape); }
  static Tensor full(const std::vector<int>& shape, double value);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int extent(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  const std::vector<double>& values() const { return data_; }

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

bool same_shape(const Tensor& a, const Tensor& b);
void require_same_shape(const Tensor& a, const Tensor& b, const char* op);

// Vector-space operations. Results are deterministic and independent of the
// OpenMP thread count: reductions run over fixed-size blocks combined in
// index order, and elementwise kernels write each output exactly once.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor hadamard(const Tensor& a, const Tensor& b);
void add_scaled_inplace(Tensor& y, double alpha, const Tensor& x);  // y += alpha*x

double dot(const Tensor& a, const Tensor& b);
double sum_squares(const Tensor& a);
double norm2(const Tensor& a);
double max_abs(const Tensor& a);
bool all_finite(const Tensor& a);

// Deterministic blocked sum of f(i) for i in [0,n): per-block partials may be
// computed in parallel but are combined serially in block order, so the result
// does not depend on scheduling or thread count.
double blocked_sum(std::int64_t n, double (*term)(std::int64_t, const void*), const void* ctx);

// Forward-mode pair: `tangent` carries a directional derivative alongside the
// primal value. Propagating a zero tangent through any operation yields a
// zero tangent.
struct DualTensor {
  Tensor primal;
  Tensor tangent;
};

DualTensor make_dual(Tensor primal, Tensor tangent);
DualTensor constant_dual(const Tensor& primal);  // zero tangent
DualTensor dual_add(const DualTensor& a, const DualTensor& b);
DualTensor dual_hadamard(const DualTensor& a, const DualTensor& b);

// Elementwise maps. Templates so the scalar callable inlines into the loop.
template <class F>
Tensor map(const Tensor& x, F&& f) {
  Tensor out(x.shape());
  const double* in = x.data();
  double* o = out.data();
  const std::int64_t n = x.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) o[i] = f(in[i]);
  return out;
}

// Primal: f(x). Tangent: f'(x) * tangent(x).
template <class F, class DF>
DualTensor dual_map(const DualTensor& x, F&& f, DF&& df) {
  require_same_shape(x.primal, x.tangent, "dual_map");
  DualTensor out;
  out.primal = Tensor(x.primal.shape());
  out.tangent = Tensor(x.primal.shape());
  const double* p = x.primal.data();
  const double* t = x.tangent.data();
  double* op = out.primal.data();
  double* ot = out.tangent.data();
  const std::int64_t n = x.primal.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) {
    op[i] = f(p[i]);
    ot[i] = df(p[i]) * t[i];
  }
  return out;
}

}  // namespace msa
