#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "msa/cli_commands.hpp"
#include "msa/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal-control training of convolutional regularizers for imaging inverse problems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint_path, input_path, output_path, ground_truth_path;

  CLI::App* train = app.add_subcommand("train", "train a regularizer with the configured MSA variant");
  train->add_option("--config", config_path, "path to key = value config file")->required();

  CLI::App* rec = app.add_subcommand("reconstruct", "run the gradient flow with a trained checkpoint");
  rec->add_option("--config", config_path, "path to key = value config file")->required();
  rec->add_option("--checkpoint", checkpoint_path, "trained MSAC checkpoint")->required();
  rec->add_option("--input", input_path, "measurement image (P5 or MSAF)")->required();
  rec->add_option("--output", output_path, "output image path (.pgm for P5, otherwise MSAF)")->required();
  rec->add_option("--ground-truth", ground_truth_path, "optional ground truth for PSNR/SSIM");

  CLI::App* bench = app.add_subcommand("benchmark", "compare variant memory and wall time over T");
  bench->add_option("--config", config_path, "path to key = value config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const msa::RunConfig cfg = msa::RunConfig::parse_file(config_path);
    if (train->parsed()) {
      msa::run_train(cfg);
    } else if (rec->parsed()) {
      msa::run_reconstruct(cfg, checkpoint_path, input_path, output_path, ground_truth_path);
    } else if (bench->parsed()) {
      msa::run_benchmark(cfg);
    }
  } catch (const msa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const msa::ShapeError& e) {
    std::cerr << "contract error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const msa::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const msa::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
