#pragma once

#include <string>
#include <vector>

#include "msa/config.hpp"
#include "msa/datagen.hpp"

namespace msa {

// Everything derived from one config: the measurement operator, the train and
// test problem instances and the initial control. The seed stream is drawn in
// a fixed order (theta seed, operator seed, then per-instance dataset seeds),
// so all artifacts are reproducible from (config, seed).
struct ExperimentSetup {
  MeasurementOp op;
  Dataset data;
  RegularizerParams theta0;
};
ExperimentSetup make_experiment(const RunConfig& cfg);

// train: runs the selected MSA variant over the training set; writes
// log.csv, timings.csv and checkpoint.msac under cfg.output_dir.
void run_train(const RunConfig& cfg);

// reconstruct: forward flow from x^0 = A^T b with the checkpointed control;
// writes the output image; prints a PSNR/SSIM line when ground truth given.
void run_reconstruct(const RunConfig& cfg, const std::string& checkpoint_path,
                     const std::string& input_path, const std::string& output_path,
                     const std::string& ground_truth_path);

// benchmark: for T in {4,16,64}, per variant: memory counters, wall time and
// (memfree) reconstruction drift; writes benchmark.csv under cfg.output_dir.
void run_benchmark(const RunConfig& cfg);

}  // namespace msa
