#include "msa/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <utility>

namespace msa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double costate_sign(const SolverConfig& cfg) { return cfg.paper_literal_signs ? -1.0 : 1.0; }

// Live retained-object probe for the backward sweeps (costates, reconstructed
// states, the reverse-integrated control). Incremented exactly where the
// algorithm retains an object.
struct RetainCounter {
  int current = 0;
  int peak = 0;
  void add(int n = 1) {
    current += n;
    peak = std::max(peak, current);
  }
  void drop(int n = 1) { current -= n; }
};

struct SweepResult {
  RegularizerParams dtheta;  // per-sample control increment, eta folded in
  RegularizerParams quad;    // tau * sum_t grad_theta_H (norm is reported)
  double objective = 0.0;    // Phi(x_T) + tau*T*r
  double h_integral = 0.0;   // tau * sum_t H(x_t, p_{t+1}, theta)
  int state_stored = 0;
  int reverse_stored = 0;
  double drift = kNaN;
};

void check_costate_finite(const Tensor& p, int step) {
  if (!all_finite(p)) {
    throw DivergenceError("costate sweep diverged at step " + std::to_string(step), step);
  }
}

// Alg. 1 shape: forward solve, full backward costate solve, then the
// Hamiltonian quadrature over the stored (x, p) pair.
SweepResult sweep_basic(const RegularizerParams& theta, const ProblemInstance& prob,
                        const SolverConfig& cfg) {
  const int T = cfg.T;
  const double tau = cfg.tau;
  SweepResult res;
  RetainCounter rc;

  Trajectory traj = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::full);
  const double r = running_cost(theta, prob);
  res.objective = terminal_cost(traj.terminal(), prob.x_gt) + tau * T * r;

  std::vector<Tensor> p = costate_sweep(traj, theta, prob, cfg);
  rc.add(T + 1);  // the full costate path is retained

  res.quad = params_scale(theta, 0.0);
  rc.add();  // quadrature accumulator
  for (int t = 0; t < T; ++t) {
    params_add_scaled_inplace(
        res.quad, tau,
        grad_theta_H(traj.states[static_cast<std::size_t>(t)], p[static_cast<std::size_t>(t + 1)],
                     theta, prob));
    // f(x_t) recovered from the stored step: tau*f = x_{t+1} - x_t
    res.h_integral += dot(p[static_cast<std::size_t>(t + 1)],
                          sub(traj.states[static_cast<std::size_t>(t + 1)],
                              traj.states[static_cast<std::size_t>(t)])) -
                      tau * r;
  }
  res.dtheta = params_scale(res.quad, cfg.eta);
  res.state_stored = traj.stored_count;
  res.reverse_stored = rc.peak;
  return res;
}

// Joint backward integration of (p, theta_bar) with gradients frozen at the
// incoming control. Numerically identical to sweep_basic.
SweepResult sweep_augmented(const RegularizerParams& theta, const ProblemInstance& prob,
                            const SolverConfig& cfg) {
  const int T = cfg.T;
  const double tau = cfg.tau;
  const double sgn = costate_sign(cfg);
  SweepResult res;
  RetainCounter rc;

  Trajectory traj = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::full);
  const double r = running_cost(theta, prob);
  res.objective = terminal_cost(traj.terminal(), prob.x_gt) + tau * T * r;

  Tensor p = adjoint_terminal(traj.terminal(), prob.x_gt);
  rc.add();  // costate
  res.quad = params_scale(theta, 0.0);
  res.dtheta = params_scale(theta, 0.0);  // theta_bar - theta
  rc.add();                               // reverse-integrated control
  for (int t = T - 1; t >= 0; --t) {
    const Tensor& x_t = traj.states[static_cast<std::size_t>(t)];
    HamiltonianGradients hg = hamiltonian_gradients(x_t, p, theta, prob);
    params_add_scaled_inplace(res.quad, tau, hg.theta);
    params_add_scaled_inplace(res.dtheta, cfg.eta * tau, hg.theta);
    res.h_integral +=
        dot(p, sub(traj.states[static_cast<std::size_t>(t + 1)], x_t)) - tau * r;
    add_scaled_inplace(p, sgn * tau, hg.x);
    check_costate_finite(p, t);
  }
  res.state_stored = traj.stored_count;
  res.reverse_stored = rc.peak;
  return res;
}

// Backward sweep with the control evolving along the way: grad_theta H is
// taken at theta_bar_{t+1}, then the costate step uses the fresh theta_bar_t
// (staggered, Verlet style).
SweepResult sweep_control_flow(const RegularizerParams& theta, const ProblemInstance& prob,
                               const SolverConfig& cfg) {
  const int T = cfg.T;
  const double tau = cfg.tau;
  const double sgn = costate_sign(cfg);
  SweepResult res;
  RetainCounter rc;

  Trajectory traj = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::full);
  const double r = running_cost(theta, prob);
  res.objective = terminal_cost(traj.terminal(), prob.x_gt) + tau * T * r;

  Tensor p = adjoint_terminal(traj.terminal(), prob.x_gt);
  rc.add();
  RegularizerParams theta_bar = theta;
  rc.add();
  res.quad = params_scale(theta, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    const Tensor& x_t = traj.states[static_cast<std::size_t>(t)];
    RegularizerParams gt = grad_theta_H(x_t, p, theta_bar, prob);
    params_add_scaled_inplace(res.quad, tau, gt);
    params_add_scaled_inplace(theta_bar, cfg.eta * tau, gt);
    if (!params_all_finite(theta_bar)) {
      throw DivergenceError("control sweep diverged at step " + std::to_string(t), t);
    }
    Tensor gx = grad_x_H(x_t, p, theta_bar, prob);
    res.h_integral +=
        dot(p, sub(traj.states[static_cast<std::size_t>(t + 1)], x_t)) - tau * r;
    add_scaled_inplace(p, sgn * tau, gx);
    check_costate_finite(p, t);
  }
  res.dtheta = params_sub(theta_bar, theta);
  res.state_stored = traj.stored_count;
  res.reverse_stored = rc.peak;
  return res;
}

// Streaming forward pass, then a backward sweep that reconstructs the state
// by reverse Euler while integrating (p, theta_bar) at the frozen control.
// The optional probe recomputes a stored trajectory purely to measure
// reconstruction drift; it is not part of the solver's memory accounting.
SweepResult sweep_memfree(const RegularizerParams& theta, const ProblemInstance& prob,
                          const SolverConfig& cfg, bool drift_probe) {
  const int T = cfg.T;
  const double tau = cfg.tau;
  const double sgn = costate_sign(cfg);
  SweepResult res;
  RetainCounter rc;

  Trajectory traj = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::streaming);
  const double r = running_cost(theta, prob);
  res.objective = terminal_cost(traj.terminal(), prob.x_gt) + tau * T * r;

  std::vector<Tensor> probe;
  if (drift_probe) {
    probe = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::full).states;
    res.drift = 0.0;
  }

  Tensor x_next = traj.terminal();
  rc.add();  // reconstructed state slot
  Tensor p = adjoint_terminal(x_next, prob.x_gt);
  rc.add();  // costate
  res.quad = params_scale(theta, 0.0);
  res.dtheta = params_scale(theta, 0.0);
  rc.add();  // reverse-integrated control
  for (int t = T - 1; t >= 0; --t) {
    Tensor f_next = flow_field(x_next, prob, theta);
    Tensor x_cur = x_next;
    rc.add();
    add_scaled_inplace(x_cur, -tau, f_next);
    if (!all_finite(x_cur)) {
      throw DivergenceError("reconstructed trajectory diverged at step " + std::to_string(t), t);
    }
    if (drift_probe) {
      const Tensor& stored = probe[static_cast<std::size_t>(t)];
      const double denom = std::max(norm2(stored), 1e-300);
      res.drift = std::max(res.drift, norm2(sub(x_cur, stored)) / denom);
    }
    HamiltonianGradients hg = hamiltonian_gradients(x_cur, p, theta, prob);
    params_add_scaled_inplace(res.quad, tau, hg.theta);
    params_add_scaled_inplace(res.dtheta, cfg.eta * tau, hg.theta);
    res.h_integral += tau * (dot(p, f_next) - r);
    add_scaled_inplace(p, sgn * tau, hg.x);
    check_costate_finite(p, t);
    x_next = std::move(x_cur);
    rc.drop();
  }
  res.state_stored = traj.stored_count;
  res.reverse_stored = rc.peak;
  return res;
}

// Exact discrete adjoint of J through the unrolled Euler recursion. Returns
// the per-sample dJ/dtheta in `quad` negated (the ascent direction), so the
// outer loop can drive plain gradient descent with it.
SweepResult sweep_backprop(const RegularizerParams& theta, const ProblemInstance& prob,
                           const SolverConfig& cfg) {
  const int T = cfg.T;
  const double tau = cfg.tau;
  SweepResult res;
  RetainCounter rc;

  Trajectory traj = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::full);
  const double r = running_cost(theta, prob);
  res.objective = terminal_cost(traj.terminal(), prob.x_gt) + tau * T * r;

  Tensor a = sub(traj.terminal(), prob.x_gt);  // grad Phi
  rc.add();
  RegularizerParams grad = params_scale(theta, 0.0);  // dJ/dtheta
  rc.add();
  for (int t = T - 1; t >= 0; --t) {
    const Tensor& x_t = traj.states[static_cast<std::size_t>(t)];
    // (df/dx)^T a and (df/dtheta)^T a, both against the incoming a_{t+1}
    Tensor dfx_a = prob.op.apply_adjoint(prob.op.apply(a));
    if (prob.lambda != 0.0) {
      SecondOrderProducts so = second_order_products(x_t, a, theta);
      add_scaled_inplace(dfx_a, prob.lambda, so.hvp);
      params_add_scaled_inplace(grad, -tau * prob.lambda, so.mixed);
    }
    res.h_integral += -dot(a, sub(traj.states[static_cast<std::size_t>(t + 1)], x_t)) - tau * r;
    add_scaled_inplace(a, -tau, dfx_a);
    check_costate_finite(a, t);
  }
  if (prob.rho != 0.0) params_add_scaled_inplace(grad, tau * T * prob.rho, theta);
  res.quad = params_scale(grad, -1.0);
  res.dtheta = params_scale(res.quad, cfg.eta);
  res.state_stored = traj.stored_count;
  res.reverse_stored = rc.peak;
  return res;
}

template <class SweepFn>
TrainResult msa_outer(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                      const SolverConfig& cfg, SweepFn&& sweep, bool track_drift) {
  cfg.validate();
  theta0.validate();
  if (data.empty()) throw ConfigError("training requires at least one problem instance");

  TrainResult result;
  result.theta = theta0;
  TrainReport& rep = result.report;
  const int n = static_cast<int>(data.size());

  for (int k = 1; k <= cfg.K; ++k) {
    const auto tic = std::chrono::steady_clock::now();
    std::vector<SweepResult> rs(static_cast<std::size_t>(n));
    std::exception_ptr first_error;
    bool failed = false;
    // Per-sample sweeps are independent; results are combined in sample order
    // below, so the reduction is deterministic for any thread count.
#pragma omp parallel for schedule(dynamic) if (n > 1)
    for (int i = 0; i < n; ++i) {
      bool skip;
#pragma omp atomic read
      skip = failed;
      if (skip) continue;
      try {
        rs[static_cast<std::size_t>(i)] = sweep(result.theta, data[static_cast<std::size_t>(i)], cfg);
      } catch (...) {
#pragma omp critical(msa_sweep_error)
        {
          if (!first_error) first_error = std::current_exception();
        }
#pragma omp atomic write
        failed = true;
      }
    }
    if (first_error) std::rethrow_exception(first_error);

    RegularizerParams mean_dtheta = params_scale(result.theta, 0.0);
    RegularizerParams mean_quad = params_scale(result.theta, 0.0);
    double j_mean = 0.0;
    double h_mean = 0.0;
    double drift_iter = track_drift ? 0.0 : kNaN;
    for (int i = 0; i < n; ++i) {
      const SweepResult& s = rs[static_cast<std::size_t>(i)];
      params_add_scaled_inplace(mean_dtheta, 1.0, s.dtheta);
      params_add_scaled_inplace(mean_quad, 1.0, s.quad);
      j_mean += s.objective;
      h_mean += s.h_integral;
      rep.peak_state_stored = std::max(rep.peak_state_stored, s.state_stored);
      rep.peak_reverse_stored = std::max(rep.peak_reverse_stored, s.reverse_stored);
      if (track_drift && std::isfinite(s.drift)) drift_iter = std::max(drift_iter, s.drift);
    }
    const double inv_n = 1.0 / n;
    params_add_scaled_inplace(result.theta, inv_n, mean_dtheta);
    if (!params_all_finite(result.theta)) {
      throw DivergenceError("control update diverged at iteration " + std::to_string(k), k);
    }

    rep.objective.push_back(j_mean * inv_n);
    rep.grad_norm.push_back(params_norm(mean_quad) * inv_n);
    rep.hamiltonian_integral.push_back(h_mean * inv_n);
    if (track_drift) {
      rep.drift.push_back(drift_iter);
      result.drift = std::isfinite(result.drift) ? std::max(result.drift, drift_iter) : drift_iter;
    }
    const auto toc = std::chrono::steady_clock::now();
    rep.seconds.push_back(std::chrono::duration<double>(toc - tic).count());
  }
  return result;
}

}  // namespace

MsaVariant parse_variant(const std::string& name) {
  if (name == "basic") return MsaVariant::basic;
  if (name == "augmented") return MsaVariant::augmented;
  if (name == "memfree") return MsaVariant::memfree;
  if (name == "control_flow") return MsaVariant::control_flow;
  if (name == "backprop_oracle") return MsaVariant::backprop_oracle;
  throw ConfigError("unknown MSA variant '" + name + "'");
}

const char* variant_name(MsaVariant v) {
  switch (v) {
    case MsaVariant::basic: return "basic";
    case MsaVariant::augmented: return "augmented";
    case MsaVariant::memfree: return "memfree";
    case MsaVariant::control_flow: return "control_flow";
    case MsaVariant::backprop_oracle: return "backprop_oracle";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (T < 1) throw ConfigError("solver: T must be >= 1, got " + std::to_string(T));
  if (!(tau > 0.0)) throw ConfigError("solver: tau must be > 0");
  if (!(eta >= 0.0)) throw ConfigError("solver: eta must be >= 0");
  if (K < 1) throw ConfigError("solver: K must be >= 1, got " + std::to_string(K));
}

Tensor initial_state(const ProblemInstance& prob) { return prob.op.apply_adjoint(prob.b); }

Trajectory forward_euler(const Tensor& x0, const RegularizerParams& theta,
                         const ProblemInstance& prob, const SolverConfig& cfg, StorageMode mode) {
  if (cfg.T < 0) throw ConfigError("forward_euler: T must be >= 0");
  if (!(cfg.tau > 0.0)) throw ConfigError("forward_euler: tau must be > 0");
  Trajectory traj;
  Tensor cur = x0;
  if (mode == StorageMode::full) {
    traj.states.reserve(static_cast<std::size_t>(cfg.T) + 1);
    traj.states.push_back(cur);
    traj.stored_count = 1;
  }
  for (int t = 1; t <= cfg.T; ++t) {
    Tensor f = flow_field(cur, prob, theta);
    add_scaled_inplace(cur, cfg.tau, f);
    if (!all_finite(cur)) {
      throw DivergenceError("forward Euler diverged at step " + std::to_string(t) + " of " +
                                std::to_string(cfg.T),
                            t);
    }
    if (mode == StorageMode::full) {
      traj.states.push_back(cur);
      ++traj.stored_count;
    }
  }
  if (mode == StorageMode::streaming) {
    traj.states.push_back(std::move(cur));
    traj.stored_count = 1;
  }
  return traj;
}

Tensor adjoint_terminal(const Tensor& x_T, const Tensor& x_gt) {
  return scale(sub(x_T, x_gt), -1.0);
}

std::vector<Tensor> costate_sweep(const Trajectory& traj, const RegularizerParams& theta,
                                  const ProblemInstance& prob, const SolverConfig& cfg) {
  if (static_cast<int>(traj.states.size()) != cfg.T + 1) {
    throw ConfigError("costate_sweep: trajectory must hold T+1 states");
  }
  const double sgn = costate_sign(cfg);
  std::vector<Tensor> p(static_cast<std::size_t>(cfg.T) + 1);
  p[static_cast<std::size_t>(cfg.T)] = adjoint_terminal(traj.terminal(), prob.x_gt);
  for (int t = cfg.T - 1; t >= 0; --t) {
    Tensor next = p[static_cast<std::size_t>(t + 1)];
    add_scaled_inplace(
        next, sgn * cfg.tau,
        grad_x_H(traj.states[static_cast<std::size_t>(t)], p[static_cast<std::size_t>(t + 1)],
                 theta, prob));
    check_costate_finite(next, t);
    p[static_cast<std::size_t>(t)] = std::move(next);
  }
  return p;
}

TrainResult msa_basic(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                      const SolverConfig& cfg) {
  return msa_outer(theta0, data, cfg, sweep_basic, false);
}

TrainResult msa_augmented(const RegularizerParams& theta0,
                          const std::vector<ProblemInstance>& data, const SolverConfig& cfg) {
  return msa_outer(theta0, data, cfg, sweep_augmented, false);
}

TrainResult msa_memfree(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                        const SolverConfig& cfg, bool drift_probe) {
  return msa_outer(
      theta0, data, cfg,
      [drift_probe](const RegularizerParams& th, const ProblemInstance& prob,
                    const SolverConfig& c) { return sweep_memfree(th, prob, c, drift_probe); },
      drift_probe);
}

TrainResult msa_control_flow(const RegularizerParams& theta0,
                             const std::vector<ProblemInstance>& data, const SolverConfig& cfg) {
  return msa_outer(theta0, data, cfg, sweep_control_flow, false);
}

TrainResult run_msa(const RegularizerParams& theta0, const std::vector<ProblemInstance>& data,
                    const SolverConfig& cfg) {
  switch (cfg.variant) {
    case MsaVariant::basic: return msa_basic(theta0, data, cfg);
    case MsaVariant::augmented: return msa_augmented(theta0, data, cfg);
    case MsaVariant::memfree: return msa_memfree(theta0, data, cfg);
    case MsaVariant::control_flow: return msa_control_flow(theta0, data, cfg);
    case MsaVariant::backprop_oracle:
      return msa_outer(theta0, data, cfg, sweep_backprop, false);
  }
  throw ConfigError("run_msa: unknown variant");
}

RegularizerParams backprop_oracle(const RegularizerParams& theta0,
                                  const std::vector<ProblemInstance>& data,
                                  const SolverConfig& cfg) {
  theta0.validate();
  if (data.empty()) throw ConfigError("backprop_oracle requires at least one problem instance");
  RegularizerParams grad = params_scale(theta0, 0.0);
  for (const ProblemInstance& prob : data) {
    SweepResult s = sweep_backprop(theta0, prob, cfg);
    params_add_scaled_inplace(grad, -1.0 / static_cast<double>(data.size()), s.quad);
  }
  return grad;
}

double evaluate_objective(const RegularizerParams& theta,
                          const std::vector<ProblemInstance>& data, const SolverConfig& cfg) {
  if (data.empty()) throw ConfigError("evaluate_objective requires at least one problem instance");
  double j = 0.0;
  for (const ProblemInstance& prob : data) {
    Trajectory traj = forward_euler(initial_state(prob), theta, prob, cfg, StorageMode::streaming);
    j += terminal_cost(traj.terminal(), prob.x_gt) + cfg.tau * cfg.T * running_cost(theta, prob);
  }
  return j / static_cast<double>(data.size());
}

}  // namespace msa
