// Acceptance suite: runs every checkable claim end to end and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "msa/checkpoint.hpp"
#include "msa/cli_commands.hpp"
#include "msa/datagen.hpp"
#include "msa/metrics.hpp"
#include "msa/rng.hpp"
#include "msa/solvers.hpp"

using namespace msa;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point tic = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - tic).count();
  }
};

Tensor random_tensor(const std::vector<int>& shape, Rng& rng, double scale = 1.0) {
  Tensor t(shape);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = scale * rng.next_normal();
  return t;
}

RegularizerParams random_params(int layers, int channels, Rng& rng, double scale = 0.3) {
  RegularizerParams p = RegularizerParams::zeros(layers, channels);
  for (Tensor& w : p.weights) {
    for (std::int64_t i = 0; i < w.size(); ++i) w[i] = scale * rng.next_normal();
  }
  return p;
}

double tensor_rel_err(const Tensor& got, const Tensor& want) {
  const double denom = std::max({max_abs(got), max_abs(want), 1e-300});
  return max_abs(sub(got, want)) / denom;
}

double params_rel_err(const RegularizerParams& got, const RegularizerParams& want) {
  double num = 0.0, denom = 1e-300;
  for (std::size_t k = 0; k < got.weights.size(); ++k) {
    num = std::max(num, max_abs(sub(got.weights[k], want.weights[k])));
    denom = std::max({denom, max_abs(got.weights[k]), max_abs(want.weights[k])});
  }
  return num / denom;
}

double params_l2_rel_err(const RegularizerParams& got, const RegularizerParams& want) {
  double num = 0.0;
  for (std::size_t k = 0; k < got.weights.size(); ++k) {
    num += sum_squares(sub(got.weights[k], want.weights[k]));
  }
  return std::sqrt(num) / std::max(params_norm(want), 1e-300);
}

ProblemInstance random_identity_problem(Rng& rng, int side, double lambda, double rho) {
  ProblemInstance prob;
  prob.op = MeasurementOp::identity();
  prob.x_gt = random_tensor({1, side, side}, rng, 0.5);
  prob.b = add(prob.x_gt, random_tensor({1, side, side}, rng, 0.1));
  prob.lambda = lambda;
  prob.rho = rho;
  return prob;
}

// ---------------------------------------------------------------------------
// 1. Derivative correctness: 20 randomized central finite-difference checks
//    per operation at 1e-4 relative tolerance, under 30 s.
bool criterion_derivatives(std::string& detail) {
  Timer timer;
  Rng rng(101);
  const double tol = 1e-4;
  double worst = 0.0;
  const char* worst_op = "none";
  auto track = [&](const char* op, double err) {
    if (err > worst) {
      worst = err;
      worst_op = op;
    }
  };

  for (int check = 0; check < 20; ++check) {
    const int side = 3 + static_cast<int>(rng.next_u64() % 6);  // <= 8
    const int layers = 2 + static_cast<int>(rng.next_u64() % 2);  // <= 3
    const int channels = 1 + static_cast<int>(rng.next_u64() % 4);  // <= 4
    RegularizerParams th = random_params(layers, channels, rng);
    Tensor x = random_tensor({1, side, side}, rng);
    Tensor p = random_tensor({1, side, side}, rng);
    ProblemInstance prob = random_identity_problem(rng, side, 0.4 + rng.next_uniform(), 0.1);
    const double eps = 1e-5;

    {  // grad_x_R
      Tensor g = grad_x_R(x, th);
      Tensor fd(x.shape());
      Tensor probe = x;
      for (std::int64_t i = 0; i < x.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + eps;
        const double plus = regularizer_value(probe, th);
        probe[i] = saved - eps;
        const double minus = regularizer_value(probe, th);
        probe[i] = saved;
        fd[i] = (plus - minus) / (2 * eps);
      }
      track("grad_x_R", tensor_rel_err(g, fd));
    }
    {  // hvp_x_R
      Tensor hv = hvp_x_R(x, p, th);
      Tensor fd = scale(
          sub(grad_x_R(add(x, scale(p, eps)), th), grad_x_R(add(x, scale(p, -eps)), th)),
          1.0 / (2 * eps));
      track("hvp_x_R", tensor_rel_err(hv, fd));
    }
    {  // grad_x_H
      Tensor g = grad_x_H(x, p, th, prob);
      Tensor fd(x.shape());
      Tensor probe = x;
      for (std::int64_t i = 0; i < x.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + eps;
        const double plus = hamiltonian(probe, p, th, prob);
        probe[i] = saved - eps;
        const double minus = hamiltonian(probe, p, th, prob);
        probe[i] = saved;
        fd[i] = (plus - minus) / (2 * eps);
      }
      track("grad_x_H", tensor_rel_err(g, fd));
    }
    {  // theta-side gradients, coordinate-wise
      RegularizerParams g_r = grad_theta_R(x, th);
      RegularizerParams g_m = mixed_grad_theta(x, p, th);
      RegularizerParams g_h = grad_theta_H(x, p, th, prob);
      RegularizerParams fd_r = params_scale(th, 0.0);
      RegularizerParams fd_m = params_scale(th, 0.0);
      RegularizerParams fd_h = params_scale(th, 0.0);
      RegularizerParams probe = th;
      for (std::size_t k = 0; k < th.weights.size(); ++k) {
        for (std::int64_t i = 0; i < th.weights[k].size(); ++i) {
          const double saved = probe.weights[k][i];
          probe.weights[k][i] = saved + eps;
          const double rp = regularizer_value(x, probe);
          const double mp = dot(p, grad_x_R(x, probe));
          const double hp = hamiltonian(x, p, probe, prob);
          probe.weights[k][i] = saved - eps;
          const double rm = regularizer_value(x, probe);
          const double mm = dot(p, grad_x_R(x, probe));
          const double hm = hamiltonian(x, p, probe, prob);
          probe.weights[k][i] = saved;
          fd_r.weights[k][i] = (rp - rm) / (2 * eps);
          fd_m.weights[k][i] = (mp - mm) / (2 * eps);
          fd_h.weights[k][i] = (hp - hm) / (2 * eps);
        }
      }
      track("grad_theta_R", params_rel_err(g_r, fd_r));
      track("mixed_grad_theta", params_rel_err(g_m, fd_m));
      track("grad_theta_H", params_rel_err(g_h, fd_h));
    }
  }

  const double secs = timer.seconds();
  char buf[160];
  std::snprintf(buf, sizeof buf, "worst rel err %.3e (%s), tol %.0e, 20 checks/op in %.1f s",
                worst, worst_op, tol, secs);
  detail = buf;
  return worst < tol && secs < 30.0;
}

// ---------------------------------------------------------------------------
// 2. One msa_basic update equals eta times the backprop-oracle ascent
//    direction to 1e-10 relative, rho = 0, T <= 8.
bool criterion_msa_equals_backprop(std::string& detail) {
  Rng rng(202);
  double worst = 0.0;
  for (int check = 0; check < 20; ++check) {
    const int side = 4 + static_cast<int>(rng.next_u64() % 5);  // <= 8
    const int T = 1 + static_cast<int>(rng.next_u64() % 8);     // <= 8
    std::vector<ProblemInstance> data;
    const int n = 1 + static_cast<int>(rng.next_u64() % 2);
    for (int i = 0; i < n; ++i) data.push_back(random_identity_problem(rng, side, 0.5, 0.0));
    RegularizerParams th0 = random_params(2 + static_cast<int>(rng.next_u64() % 2), 2, rng);
    SolverConfig cfg;
    cfg.T = T;
    cfg.tau = 0.1;
    cfg.eta = 1.5;
    cfg.K = 1;
    RegularizerParams update = params_sub(msa_basic(th0, data, cfg).theta, th0);
    RegularizerParams want = params_scale(backprop_oracle(th0, data, cfg), -cfg.eta);
    worst = std::max(worst, params_l2_rel_err(update, want));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "worst rel err %.3e over 20 instances, tol 1e-10", worst);
  detail = buf;
  return worst < 1e-10;
}

// ---------------------------------------------------------------------------
// 3. msa_augmented matches msa_basic per iteration to 1e-12 over K = 5.
bool criterion_variant_identity(std::string& detail) {
  Rng rng(303);
  std::vector<ProblemInstance> data;
  for (int i = 0; i < 3; ++i) data.push_back(random_identity_problem(rng, 8, 0.4, 0.05));
  RegularizerParams th_basic = random_params(3, 3, rng);
  RegularizerParams th_aug = th_basic;
  SolverConfig cfg;
  cfg.T = 6;
  cfg.tau = 0.1;
  cfg.eta = 2.0;
  cfg.K = 1;
  double worst = 0.0;
  for (int k = 1; k <= 5; ++k) {
    th_basic = msa_basic(th_basic, data, cfg).theta;
    th_aug = msa_augmented(th_aug, data, cfg).theta;
    worst = std::max(worst, params_rel_err(th_aug, th_basic));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "worst per-iteration rel diff %.3e over K=5, tol 1e-12", worst);
  detail = buf;
  return worst < 1e-12;
}

// ---------------------------------------------------------------------------
// 4. Memory claims via instrumented counters over T in {4, 16, 64}.
bool criterion_memory(std::string& detail) {
  Rng rng(404);
  std::vector<ProblemInstance> data{random_identity_problem(rng, 12, 0.3, 0.0)};
  RegularizerParams th0 = random_params(2, 2, rng, 0.2);
  bool ok = true;
  int memfree_state = -1, memfree_reverse = -1;
  std::string parts;
  for (const int T : {4, 16, 64}) {
    SolverConfig cfg;
    cfg.T = T;
    cfg.tau = 0.02;
    cfg.eta = 1.0;
    cfg.K = 1;
    const TrainReport basic = msa_basic(th0, data, cfg).report;
    const TrainReport aug = msa_augmented(th0, data, cfg).report;
    const TrainReport ctrl = msa_control_flow(th0, data, cfg).report;
    const TrainReport mf = msa_memfree(th0, data, cfg, false).report;
    ok = ok && basic.peak_state_stored == T + 1 && aug.peak_state_stored == T + 1 &&
         ctrl.peak_state_stored == T + 1;
    if (memfree_state < 0) {
      memfree_state = mf.peak_state_stored;
      memfree_reverse = mf.peak_reverse_stored;
    }
    ok = ok && mf.peak_state_stored == memfree_state &&
         mf.peak_reverse_stored == memfree_reverse;
    parts += " T=" + std::to_string(T) + ":[basic " + std::to_string(basic.peak_state_stored) +
             ", memfree " + std::to_string(mf.peak_state_stored) + "+" +
             std::to_string(mf.peak_reverse_stored) + "]";
  }
  detail = "stored counts" + parts + ", memfree constant";
  return ok;
}

// ---------------------------------------------------------------------------
// 5. Costate sweep vs the closed form of the adjoint ODE on the lambda = 0
//    linear problem: O(tau) global error, ratio ~2 under tau halving.
bool criterion_adjoint_fidelity(std::string& detail) {
  Rng rng(505);
  ProblemInstance prob = random_identity_problem(rng, 8, 0.0, 0.0);
  RegularizerParams th = RegularizerParams::zeros(2, 1);
  const double horizon = 1.6;

  auto sweep_error = [&](int T) {
    SolverConfig cfg;
    cfg.T = T;
    cfg.tau = horizon / T;
    cfg.eta = 1.0;
    cfg.K = 1;
    Trajectory traj = forward_euler(initial_state(prob), th, prob, cfg, StorageMode::full);
    std::vector<Tensor> p = costate_sweep(traj, th, prob, cfg);
    // continuous adjoint: p' = p backward from p(T_phys) = p_T
    double err = 0.0;
    for (int t = 0; t <= T; ++t) {
      Tensor exact = scale(p.back(), std::exp(-cfg.tau * (T - t)));
      err = std::max(err, max_abs(sub(p[static_cast<std::size_t>(t)], exact)));
    }
    return err;
  };

  const double e1 = sweep_error(16);
  const double e2 = sweep_error(32);
  const double e3 = sweep_error(64);
  const double r1 = e1 / e2;
  const double r2 = e2 / e3;
  char buf[160];
  std::snprintf(buf, sizeof buf, "errors %.3e/%.3e/%.3e, halving ratios %.2f, %.2f (want 2 +/- 30%%)",
                e1, e2, e3, r1, r2);
  detail = buf;
  const auto in_band = [](double r) { return r > 1.4 && r < 2.6; };
  return in_band(r1) && in_band(r2) && e1 > 0.0;
}

// ---------------------------------------------------------------------------
// 6. End-to-end learning on the toy denoising task.
bool criterion_end_to_end(std::string& detail) {
  Timer timer;
  RunConfig cfg;  // project defaults: the toy denoising task
  cfg.operator_kind = "identity";
  cfg.sigma = 0.1;
  cfg.lambda = 0.05;
  cfg.layers = 4;
  cfg.channels = 8;
  cfg.T = 15;
  cfg.K = 50;
  cfg.train_count = 8;
  cfg.test_count = 8;
  cfg.height = 32;
  cfg.width = 32;
  cfg.seed = 1;
  cfg.variant = "control_flow";

  ExperimentSetup setup = make_experiment(cfg);
  const SolverConfig scfg = cfg.solver();
  TrainResult result = msa_control_flow(setup.theta0, setup.data.train, scfg);
  const double j0 = result.report.objective.front();
  const double jk = evaluate_objective(result.theta, setup.data.train, scfg);

  double psnr_rec = 0.0, psnr_meas = 0.0;
  for (const ProblemInstance& prob : setup.data.test) {
    Trajectory traj =
        forward_euler(initial_state(prob), result.theta, prob, scfg, StorageMode::streaming);
    psnr_rec += metric_psnr(traj.terminal(), prob.x_gt) / static_cast<double>(cfg.test_count);
    psnr_meas += metric_psnr(prob.b, prob.x_gt) / static_cast<double>(cfg.test_count);
  }
  const double secs = timer.seconds();
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "J %.4f -> %.4f, test PSNR %.2f dB vs measurement %.2f dB (gain %.2f, want >= 1), %.0f s",
                j0, jk, psnr_rec, psnr_meas, psnr_rec - psnr_meas, secs);
  detail = buf;
  return jk < j0 && psnr_rec >= psnr_meas + 1.0 && secs < 600.0;
}

// ---------------------------------------------------------------------------
// 7. memfree emits a finite drift and approaches the msa_basic update as tau
//    shrinks (fixed horizon tau*T).
bool criterion_memfree_drift(std::string& detail) {
  Rng rng(707);
  std::vector<ProblemInstance> data;
  for (int i = 0; i < 2; ++i) data.push_back(random_identity_problem(rng, 16, 0.5, 0.0));
  RegularizerParams th0 = random_params(3, 4, rng);

  std::string parts;
  double prev_err = 0.0;
  bool ok = true;
  bool first = true;
  for (const auto& [tau, T] :
       std::vector<std::pair<double, int>>{{0.1, 15}, {0.05, 30}, {0.025, 60}}) {
    SolverConfig cfg;
    cfg.T = T;
    cfg.tau = tau;
    cfg.eta = 2.0;
    cfg.K = 1;
    TrainResult basic = msa_basic(th0, data, cfg);
    TrainResult mf = msa_memfree(th0, data, cfg, true);
    ok = ok && std::isfinite(mf.drift);
    const double err = params_l2_rel_err(params_sub(mf.theta, th0), params_sub(basic.theta, th0));
    char buf[80];
    std::snprintf(buf, sizeof buf, " tau=%.3f: drift %.2e, update err %.2e;", tau, mf.drift, err);
    parts += buf;
    if (!first) ok = ok && err < prev_err;
    prev_err = err;
    first = false;
  }
  detail = parts;
  return ok;
}

// ---------------------------------------------------------------------------
// 8. Determinism: repeated runs produce byte-identical CSVs and checkpoints.
bool criterion_determinism(std::string& detail) {
  namespace fs = std::filesystem;
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  const fs::path d1 = fs::temp_directory_path() / "msa_acc_det_a";
  const fs::path d2 = fs::temp_directory_path() / "msa_acc_det_b";
  fs::remove_all(d1);
  fs::remove_all(d2);

  RunConfig cfg;
  cfg.height = cfg.width = 16;
  cfg.layers = 3;
  cfg.channels = 4;
  cfg.T = 6;
  cfg.K = 3;
  cfg.train_count = 3;
  cfg.test_count = 1;
  cfg.seed = 11;
  cfg.variant = "memfree";  // exercises the drift column as well
  cfg.output_dir = d1.string();
  run_train(cfg);
  cfg.output_dir = d2.string();
  run_train(cfg);

  const bool log_same = bytes(d1 / "log.csv") == bytes(d2 / "log.csv");
  const bool ck_same = bytes(d1 / "checkpoint.msac") == bytes(d2 / "checkpoint.msac");
  fs::remove_all(d1);
  fs::remove_all(d2);
  detail = std::string("log.csv ") + (log_same ? "identical" : "DIFFERS") + ", checkpoint.msac " +
           (ck_same ? "identical" : "DIFFERS");
  return log_same && ck_same;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int number;
    const char* title;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "derivative correctness (finite differences)", criterion_derivatives},
      {2, "msa_basic update equals the backprop ascent direction", criterion_msa_equals_backprop},
      {3, "msa_augmented identical to msa_basic", criterion_variant_identity},
      {4, "memory claims via stored-tensor counters", criterion_memory},
      {5, "costate sweep matches the adjoint ODE closed form", criterion_adjoint_fidelity},
      {6, "end-to-end learning on the toy denoising task", criterion_end_to_end},
      {7, "memfree drift report and tau-convergence to msa_basic", criterion_memfree_drift},
      {8, "byte-identical training runs", criterion_determinism},
  };

  bool only_some = argc > 1;
  bool all_ok = true;
  for (const Criterion& c : criteria) {
    if (only_some) {
      bool wanted = false;
      for (int i = 1; i < argc; ++i) {
        if (std::stoi(argv[i]) == c.number) wanted = true;
      }
      if (!wanted) continue;
    }
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %d: %s — %s\n", ok ? "PASS" : "FAIL", c.number, c.title,
                detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
