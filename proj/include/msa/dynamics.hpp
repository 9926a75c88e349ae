#pragma once

#include "msa/regnet.hpp"
#include "msa/tensor.hpp"

namespace msa {

// Linear measurement operator A. apply/apply_adjoint satisfy
// <A u, v> == <u, A^T v>; the mask variant is idempotent and self-adjoint.
struct MeasurementOp {
  enum class Kind { identity, blur, mask };

  Kind kind = Kind::identity;
  Tensor blur_kernel;  // [1,1,k,k], k odd
  Tensor mask;         // [1,H,W], entries in {0,1}

  Tensor apply(const Tensor& x) const;
  Tensor apply_adjoint(const Tensor& y) const;

  static MeasurementOp identity();
  static MeasurementOp blur(Tensor kernel);
  static MeasurementOp masking(Tensor mask);
};

// One inverse problem: operator A, measurement b, ground truth (training
// only), fidelity weight lambda > 0 and running-cost weight rho >= 0.
struct ProblemInstance {
  MeasurementOp op;
  Tensor b;
  Tensor x_gt;
  double lambda = 0.05;
  double rho = 0.0;
};

// E(x;theta) = 1/2 ||A x - b||^2 + lambda R(x;theta)
double energy(const Tensor& x, const ProblemInstance& prob, const RegularizerParams& theta);

// f(x,theta) = -grad_x E = -(A^T(Ax - b) + lambda grad_x_R)
Tensor flow_field(const Tensor& x, const ProblemInstance& prob, const RegularizerParams& theta);

// Running cost r = (rho/2) ||theta||^2 (independent of x) and terminal cost
// Phi = 1/2 ||x_T - x_gt||^2.
double running_cost(const RegularizerParams& theta, const ProblemInstance& prob);
double terminal_cost(const Tensor& x_T, const Tensor& x_gt);

// H(x,p,theta) = <p, f(x,theta)> - r(theta)
double hamiltonian(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                   const ProblemInstance& prob);

// H is linear in p, so grad_p H is exactly the flow field.
Tensor grad_p_H(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                const ProblemInstance& prob);

// grad_x H = (df/dx)^T p = -(A^T A p + lambda (grad^2_x R) p); grad_x r = 0.
Tensor grad_x_H(const Tensor& x, const Tensor& p, const RegularizerParams& theta,
                const ProblemInstance& prob);

// grad_theta H = -lambda * mixed_grad_theta(x,p,theta) - rho theta.
RegularizerParams grad_theta_H(const Tensor& x, const Tensor& p,
                               const RegularizerParams& theta, const ProblemInstance& prob);

// Both Hamiltonian gradients from one dual reverse pass (the costate seed is
// shared). Identical values to the two single-output calls above.
struct HamiltonianGradients {
  Tensor x;
  RegularizerParams theta;
};
HamiltonianGradients hamiltonian_gradients(const Tensor& x, const Tensor& p,
                                           const RegularizerParams& theta,
                                           const ProblemInstance& prob);

}  // namespace msa
