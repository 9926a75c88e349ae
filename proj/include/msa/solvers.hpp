#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "msa/dynamics.hpp"

namespace msa {

enum class MsaVariant { basic, augmented, memfree, control_flow, backprop_oracle };

MsaVariant parse_variant(const std::string& name);
const char* variant_name(MsaVariant v);

struct SolverConfig {
  int T = 15;           // forward step count
  double tau = 0.1;     // forward step size; also the backward quadrature weight
  double eta = 2.0;    // control ascent step size
  int K = 50;           // outer iterations
  MsaVariant variant = MsaVariant::control_flow;
  // The discretized costate line in the source algorithm carries a minus sign
  // that contradicts backward integration of the adjoint equation. Default is
  // the adjoint-consistent plus sign, validated against the backprop oracle;
  // this flag reproduces the literal minus sign for comparison.
  bool paper_literal_signs = false;
  std::uint64_t seed = 1;

  void validate() const;  // T >= 1, tau > 0, eta >= 0, K >= 1
};

enum class StorageMode { full, streaming };

// Time-indexed forward states x_0..x_T. stored_count is the memory-claim
// probe: the number of state tensors actually retained.
struct Trajectory {
  std::vector<Tensor> states;
  int stored_count = 0;

  const Tensor& terminal() const { return states.back(); }
};

struct TrainReport {
  std::vector<double> objective;             // J at the iterate entering iteration k
  std::vector<double> grad_norm;             // ||mean_s tau*sum_t grad_theta H||
  std::vector<double> hamiltonian_integral;  // tau*sum_t H, averaged over samples
  std::vector<double> seconds;               // wall time per iteration
  std::vector<double> drift;                 // memfree only: per-iteration max drift
  int peak_state_stored = 0;    // forward-state tensors retained at once
  int peak_reverse_stored = 0;  // backward-sweep objects retained at once
};

struct TrainResult {
  RegularizerParams theta;
  TrainReport report;
  double drift = std::numeric_limits<double>::quiet_NaN();  // memfree: max over run
};

// x^0 = A^T b.
Tensor initial_state(const ProblemInstance& prob);

// T explicit Euler steps of the gradient flow. Streaming mode retains only
// x_T (stored_count = 1). Throws DivergenceError naming the step on any
// non-finite state. T = 0 returns the initial state unchanged.
Trajectory forward_euler(const Tensor& x0, const RegularizerParams& theta,
                         const ProblemInstance& prob, const SolverConfig& cfg,
                         StorageMode mode);

// p_T = -(x_T - x_gt) under the quadratic terminal cost.
Tensor adjoint_terminal(const Tensor& x_T, const Tensor& x_gt);

// Full backward costate solve over a stored trajectory at frozen control:
// p_T from adjoint_terminal, then p_t = p_{t+1} + tau * grad_x_H (the
// adjoint-consistent backward Euler step; literal signs flip it). Returns all
// T+1 costates, index-aligned with the trajectory.
std::vector<Tensor> costate_sweep(const Trajectory& traj, const RegularizerParams& theta,
                                  const ProblemInstance& prob, const SolverConfig& cfg);

// The MSA family. Each returns theta_K plus a per-iteration report; all
// average per-sample Hamiltonian gradients over the dataset.
TrainResult msa_basic(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                      const SolverConfig& cfg);
TrainResult msa_augmented(const RegularizerParams& theta0,
                          const std::vector<ProblemInstance>& data, const SolverConfig& cfg);
// drift_probe recomputes a stored verification trajectory per sample to
// measure reconstruction drift; the probe is outside the solver's memory
// accounting. Without it drift is NaN.
TrainResult msa_memfree(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                        const SolverConfig& cfg, bool drift_probe = true);
TrainResult msa_control_flow(const RegularizerParams& theta0,
                             const std::vector<ProblemInstance>& data, const SolverConfig& cfg);

// Dispatch on cfg.variant (backprop_oracle trains by plain gradient descent
// with the oracle gradient).
TrainResult run_msa(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                    const SolverConfig& cfg);

// Exact discrete gradient of J(theta) = Phi(x_T) + tau*sum_t r through the
// unrolled Euler recursion, via the discrete adjoint. Mean over the dataset.
RegularizerParams backprop_oracle(const RegularizerParams& theta0,
                                  const std::vector<ProblemInstance>& data,
                                  const SolverConfig& cfg);

// Mean of Phi(x_T) + tau*T*r over the dataset at fixed theta.
double evaluate_objective(const RegularizerParams& theta,
                          const std::vector<ProblemInstance>& data, const SolverConfig& cfg);

}  // namespace msa
