#include "msa/tensor.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace msa {

namespace {

std::int64_t checked_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] <= 0) {
      throw ShapeError("tensor: axis " + std::to_string(i) + " has non-positive extent " +
                       std::to_string(shape[i]));
    }
    n *= shape[i];
  }
  return n;
}

std::string shape_string(const std::vector<int>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

constexpr std::int64_t kReduceBlock = 4096;

// Fixed-size blocks reduced serially in block order; only per-block work is
// parallel, so results are independent of the thread count.
template <class Term>
double blocked_reduce(std::int64_t n, Term&& term) {
  if (n <= 0) return 0.0;
  const std::int64_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  if (nblocks == 1) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += term(i);
    return s;
  }
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t lo = b * kReduceBlock;
    const std::int64_t hi = std::min(n, lo + kReduceBlock);
    double s = 0.0;
    for (std::int64_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (std::int64_t b = 0; b < nblocks; ++b) s += partial[static_cast<std::size_t>(b)];
  return s;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(checked_numel(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  const std::int64_t n = checked_numel(shape_);
  if (n != static_cast<std::int64_t>(data_.size())) {
    throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::full(const std::vector<int>& shape, double value) {
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = value;
  return t;
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (same_shape(a, b)) return;
  const int ra = a.rank(), rb = b.rank();
  if (ra != rb) {
    throw ShapeError(std::string(op) + ": rank mismatch " + std::to_string(ra) + " vs " +
                     std::to_string(rb));
  }
  for (int ax = 0; ax < ra; ++ax) {
    if (a.extent(ax) != b.extent(ax)) {
      throw ShapeError(std::string(op) + ": axis " + std::to_string(ax) + " mismatch, " +
                       std::to_string(a.extent(ax)) + " vs " + std::to_string(b.extent(ax)));
    }
  }
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  const std::int64_t n = a.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  const std::int64_t n = a.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  const std::int64_t n = a.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) po[i] = c * pa[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  const std::int64_t n = a.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
  return out;
}

void add_scaled_inplace(Tensor& y, double alpha, const Tensor& x) {
  require_same_shape(y, x, "add_scaled_inplace");
  double* py = y.data();
  const double* px = x.data();
  const std::int64_t n = y.size();
#pragma omp parallel for schedule(static) if (n >= 32768)
  for (std::int64_t i = 0; i < n; ++i) py[i] += alpha * px[i];
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  const double* pa = a.data();
  const double* pb = b.data();
  return blocked_reduce(a.size(), [&](std::int64_t i) { return pa[i] * pb[i]; });
}

double sum_squares(const Tensor& a) {
  const double* pa = a.data();
  return blocked_reduce(a.size(), [&](std::int64_t i) { return pa[i] * pa[i]; });
}

double norm2(const Tensor& a) { return std::sqrt(sum_squares(a)); }

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (std::int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

bool all_finite(const Tensor& a) {
  const double* pa = a.data();
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(pa[i])) return false;
  }
  return true;
}

double blocked_sum(std::int64_t n, double (*term)(std::int64_t, const void*), const void* ctx) {
  return blocked_reduce(n, [&](std::int64_t i) { return term(i, ctx); });
}

DualTensor make_dual(Tensor primal, Tensor tangent) {
  require_same_shape(primal, tangent, "make_dual");
  return DualTensor{std::move(primal), std::move(tangent)};
}

DualTensor constant_dual(const Tensor& primal) {
  return DualTensor{primal, Tensor(primal.shape())};
}

DualTensor dual_add(const DualTensor& a, const DualTensor& b) {
  return DualTensor{add(a.primal, b.primal), add(a.tangent, b.tangent)};
}

DualTensor dual_hadamard(const DualTensor& a, const DualTensor& b) {
  // product rule: (ab)' = a'b + ab'
  return DualTensor{hadamard(a.primal, b.primal),
                    add(hadamard(a.tangent, b.primal), hadamard(a.primal, b.tangent))};
}

}  // namespace msa
