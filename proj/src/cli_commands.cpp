#include "msa/cli_commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "msa/checkpoint.hpp"
#include "msa/metrics.hpp"
#include "msa/rng.hpp"
#include "msa/solvers.hpp"

namespace msa {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("short write on '" + path + "'");
}

MeasurementOp build_operator(const RunConfig& cfg, std::uint64_t op_seed) {
  if (cfg.operator_kind == "identity") return MeasurementOp::identity();
  if (cfg.operator_kind == "blur") {
    return MeasurementOp::blur(make_blur_kernel(cfg.blur_size, cfg.blur_sigma));
  }
  return MeasurementOp::masking(
      make_keep_mask(cfg.height, cfg.width, cfg.mask_keep, op_seed));
}

}  // namespace

ExperimentSetup make_experiment(const RunConfig& cfg) {
  cfg.validate();
  // Fixed draw order: theta seed, operator seed, dataset seed.
  Rng master(cfg.seed);
  const std::uint64_t theta_seed = master.next_u64();
  const std::uint64_t op_seed = master.next_u64();
  const std::uint64_t data_seed = master.next_u64();

  ExperimentSetup setup;
  setup.op = build_operator(cfg, op_seed);
  DatasetSpec spec;
  spec.train_count = cfg.train_count;
  spec.test_count = cfg.test_count;
  spec.height = cfg.height;
  spec.width = cfg.width;
  spec.n_shapes = cfg.shapes;
  spec.sigma = cfg.sigma;
  spec.lambda = cfg.lambda;
  spec.rho = cfg.rho;
  spec.seed = data_seed;
  setup.data = make_dataset(spec, setup.op);
  setup.theta0 = RegularizerParams::random_init(cfg.layers, cfg.channels, theta_seed);
  return setup;
}

void run_train(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.T < 1) throw ConfigError("train: T must be >= 1");
  ExperimentSetup setup = make_experiment(cfg);
  const SolverConfig scfg = cfg.solver();

  TrainResult result = [&] {
    if (scfg.variant == MsaVariant::memfree) {
      return msa_memfree(setup.theta0, setup.data.train, scfg, cfg.drift_probe);
    }
    return run_msa(setup.theta0, setup.data.train, scfg);
  }();

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const TrainReport& rep = result.report;

  // Deterministic training log; wall times go to a separate file so repeated
  // runs produce byte-identical logs.
  std::string log = "k,objective,grad_norm,hamiltonian_integral,peak_state_stored,peak_reverse_stored,drift\n";
  std::string timings = "k,seconds\n";
  for (int k = 0; k < cfg.K; ++k) {
    const std::string drift =
        k < static_cast<int>(rep.drift.size()) ? fmt(rep.drift[static_cast<std::size_t>(k)]) : "";
    log += std::to_string(k + 1) + "," + fmt(rep.objective[static_cast<std::size_t>(k)]) + "," +
           fmt(rep.grad_norm[static_cast<std::size_t>(k)]) + "," +
           fmt(rep.hamiltonian_integral[static_cast<std::size_t>(k)]) + "," +
           std::to_string(rep.peak_state_stored) + "," + std::to_string(rep.peak_reverse_stored) +
           "," + drift + "\n";
    timings += std::to_string(k + 1) + "," + fmt(rep.seconds[static_cast<std::size_t>(k)]) + "\n";
  }
  write_text_file((fs::path(cfg.output_dir) / "log.csv").string(), log);
  write_text_file((fs::path(cfg.output_dir) / "timings.csv").string(), timings);

  Checkpoint ck;
  ck.version = 1;
  ck.layers = static_cast<std::uint32_t>(cfg.layers);
  ck.channels = static_cast<std::uint32_t>(cfg.channels);
  ck.iteration = static_cast<std::uint32_t>(cfg.K);
  ck.config_digest = cfg.digest();
  ck.params = result.theta;
  save_checkpoint((fs::path(cfg.output_dir) / "checkpoint.msac").string(), ck);

  const double j_final = evaluate_objective(result.theta, setup.data.train, scfg);
  std::cout << "train: variant=" << cfg.variant << " K=" << cfg.K
            << " J_start=" << rep.objective.front() << " J_final=" << j_final
            << " outputs=" << cfg.output_dir << "\n";
}

void run_reconstruct(const RunConfig& cfg, const std::string& checkpoint_path,
                     const std::string& input_path, const std::string& output_path,
                     const std::string& ground_truth_path) {
  cfg.validate();
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (static_cast<int>(ck.layers) != cfg.layers || static_cast<int>(ck.channels) != cfg.channels) {
    throw ConfigError("reconstruct: checkpoint has (l,d) = (" + std::to_string(ck.layers) + "," +
                      std::to_string(ck.channels) + ") but config expects (" +
                      std::to_string(cfg.layers) + "," + std::to_string(cfg.channels) + ")");
  }
  if (ck.config_digest != cfg.digest()) {
    std::cerr << "reconstruct: note: checkpoint was trained under a different config (digest "
              << ck.config_digest << " vs " << cfg.digest() << ")\n";
  }

  Tensor b = read_image(input_path);
  Rng master(cfg.seed);
  (void)master.next_u64();  // theta seed (unused here)
  const std::uint64_t op_seed = master.next_u64();
  RunConfig op_cfg = cfg;
  op_cfg.height = b.extent(1);
  op_cfg.width = b.extent(2);
  ProblemInstance prob;
  prob.op = build_operator(op_cfg, op_seed);
  prob.b = b;
  prob.lambda = cfg.lambda;
  prob.rho = cfg.rho;

  SolverConfig scfg = cfg.solver();
  Trajectory traj =
      forward_euler(initial_state(prob), ck.params, prob, scfg, StorageMode::streaming);
  write_image(output_path, traj.terminal());

  std::cout << "reconstruct: T=" << cfg.T << " wrote " << output_path;
  if (!ground_truth_path.empty()) {
    const Tensor gt = read_image(ground_truth_path);
    std::cout << " psnr_db=" << metric_psnr(traj.terminal(), gt)
              << " ssim=" << metric_ssim(traj.terminal(), gt);
  }
  std::cout << "\n";
}

void run_benchmark(const RunConfig& cfg) {
  cfg.validate();
  ExperimentSetup setup = make_experiment(cfg);

  std::string csv = "variant,T,peak_state_stored,peak_reverse_stored,seconds,drift\n";
  const int horizons[] = {4, 16, 64};
  const MsaVariant variants[] = {MsaVariant::basic, MsaVariant::augmented, MsaVariant::memfree,
                                 MsaVariant::control_flow};
  for (const int T : horizons) {
    for (const MsaVariant v : variants) {
      SolverConfig scfg = cfg.solver();
      scfg.T = T;
      scfg.K = 1;
      scfg.variant = v;
      const auto tic = std::chrono::steady_clock::now();
      TrainResult result = v == MsaVariant::memfree
                               ? msa_memfree(setup.theta0, setup.data.train, scfg, true)
                               : run_msa(setup.theta0, setup.data.train, scfg);
      const auto toc = std::chrono::steady_clock::now();
      const double seconds = std::chrono::duration<double>(toc - tic).count();
      csv += std::string(variant_name(v)) + "," + std::to_string(T) + "," +
             std::to_string(result.report.peak_state_stored) + "," +
             std::to_string(result.report.peak_reverse_stored) + "," + fmt(seconds) + "," +
             (v == MsaVariant::memfree ? fmt(result.drift) : std::string()) + "\n";
    }
  }
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  write_text_file((fs::path(cfg.output_dir) / "benchmark.csv").string(), csv);
  std::cout << csv;
}

}  // namespace msa
