#include "msa/dynamics.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "msa/conv.hpp"

namespace msa {

Tensor MeasurementOp::apply(const Tensor& x) const {
  switch (kind) {
    case Kind::identity:
      return x;
    case Kind::blur:
      return conv2d(x, blur_kernel);
    case Kind::mask:
      return hadamard(mask, x);
  }
  throw ShapeError("measurement op: unknown kind");
}

Tensor MeasurementOp::apply_adjoint(const Tensor& y) const {
  switch (kind) {
    case Kind::identity:
      return y;
    case Kind::blur:
      return conv2d_adjoint_input(y, blur_kernel);
    case Kind::mask:
      return hadamard(mask, y);  // self-adjoint
  }
  throw ShapeError("measurement op: unknown kind");
}

MeasurementOp MeasurementOp::identity() { return MeasurementOp{}; }

MeasurementOp MeasurementOp::blur(Tensor kernel) {
  if (kernel.rank() != 4 || kernel.extent(0) != 1 || kernel.extent(1) != 1) {
    throw ShapeError("blur op: kernel must be [1,1,k,k]");
  }
  if (kernel.extent(2) != kernel.extent(3) || kernel.extent(2) % 2 == 0) {
    throw ShapeError("blur op: kernel must be square with odd extent on axis 2");
  }
  MeasurementOp op;
  op.kind = Kind::blur;
  op.blur_kernel = std::move(kernel);
  return op;
}

MeasurementOp MeasurementOp::masking(Tensor mask) {
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0 && mask[i] != 1.0) {
      throw ShapeError("mask op: entry " + std::to_string(i) + " is not in {0,1}");
    }
  }
  MeasurementOp op;
  op.kind = Kind::mask;
  op.mask = std::move(mask);
  return op;
}

double energy(const Tensor& x, const ProblemInstance& prob, const RegularizerParams& theta) {
  const double fidelity = 0.5 * sum_squares(sub(prob.op.apply(x), prob.b));
  if (prob.lambda == 0.0) return fidelity;
  return fidelity + prob.lambda * regularizer_value(x, theta);
}

Tensor flow_field(const Tensor& x, const ProblemInstance& prob, const RegularizerParams& theta) {
  Tensor g = prob.op.apply_adjoint(sub(prob.op.apply(x), prob.b));
  if (prob.lambda != 0.0) add_scaled_inplace(g, prob.lambda, grad_x_R(x, theta));
  return scale(g, -1.0);
}

double running_cost(const RegularizerParams& theta, const ProblemInstance& prob) {
  if (prob.rho == 0.0) return 0.0;
  return 0.5 * prob.rho * params_dot(theta, theta);
}

double terminal_cost(const Tensor& x_T, const Tensor& x_gt) {
  return 0.5 * sum_squares(sub(x_T, x_gt));
}

double hamiltonian(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                   const ProblemInstance& prob) {
  return dot(p, flow_field(x, prob, theta)) - running_cost(theta, prob);
}

Tensor grad_p_H(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                const ProblemInstance& prob) {
  (void)p;  // H is linear in p
  return flow_field(x, prob, theta);
}

Tensor grad_x_H(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                const ProblemInstance& prob) {
  Tensor g = prob.op.apply_adjoint(prob.op.apply(p));
  if (prob.lambda != 0.0) add_scaled_inplace(g, prob.lambda, hvp_x_R(x, p, theta));
  return scale(g, -1.0);
}

RegularizerParams grad_theta_H(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                               const ProblemInstance& prob) {
  RegularizerParams g;
  if (prob.lambda != 0.0) {
    g = params_scale(mixed_grad_theta(x, p, theta), -prob.lambda);
  } else {
    g = params_scale(theta, 0.0);
  }
  if (prob.rho != 0.0) params_add_scaled_inplace(g, -prob.rho, theta);
  return g;
}

HamiltonianGradients hamiltonian_gradients(const Tensor& x, const Tensor& p,
                                           const RegularizerParams& theta,
                                           const ProblemInstance& prob) {
  HamiltonianGradients out;
  Tensor gx = prob.op.apply_adjoint(prob.op.apply(p));
  if (prob.lambda != 0.0) {
    SecondOrderProducts so = second_order_products(x, p, theta);
    add_scaled_inplace(gx, prob.lambda, so.hvp);
    out.theta = params_scale(so.mixed, -prob.lambda);
  } else {
    out.theta = params_scale(theta, 0.0);
  }
  if (prob.rho != 0.0) params_add_scaled_inplace(out.theta, -prob.rho, theta);
  out.x = scale(gx, -1.0);
  return out;
}

}  // namespace msa
