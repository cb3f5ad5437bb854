#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rdrls/config.hpp"
#include "rdrls/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  CLI::App app{"Diffusion RLS network simulator: robust norm-constrained "
               "adaptation with impulsive-noise scenarios"};
  std::string config_path;
  std::string preset;
  int trials = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  int threads = 0;
  bool serial = false;

  auto* config_opt =
      app.add_option("--config", config_path, "Experiment config file");
  app.add_option("--preset", preset,
                 "Built-in preset: fig2-bg, fig3-alpha-stable, fig4-nodewise")
      ->excludes(config_opt);
  app.add_option("--trials", trials, "Override the trial count");
  app.add_option("--iterations", iterations, "Override the iteration count");
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("--out", out_dir, "Override the output directory");
  app.add_option("--threads", threads, "OpenMP thread count (0 = default)");
  app.add_flag("--serial", serial, "Run trials on the serial reference path");
  CLI11_PARSE(app, argc, argv);

  try {
    rdrls::ExperimentConfig config;
    if (!config_path.empty()) {
      config = rdrls::load_config(config_path);
    } else if (!preset.empty()) {
      config = rdrls::preset_config(preset);
    } else {
      std::cerr << "error: provide --config or --preset\n";
      return 1;
    }
    if (trials > 0) config.trials = trials;
    if (iterations > 0) {
      // A preset's halfway change marker stays relative to the new length.
      if (config.change_iteration > 0) config.change_iteration = -1;
      config.iterations = iterations;
      config.steady_state_window = 0;
    }
    if (seed != 0) config.seed = seed;
    if (!out_dir.empty()) config.output_dir = out_dir;
    config = rdrls::resolve_config(config);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
    const rdrls::RunPaths paths = rdrls::run_experiment(
        config, serial ? rdrls::Execution::Serial : rdrls::Execution::Parallel,
        &std::cout);
    (void)paths;
    return 0;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
}
