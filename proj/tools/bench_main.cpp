// Compares the serial reference engine against the OpenMP trial runner on
// the same scenario and verifies that both produce identical aggregates.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "rdrls/config.hpp"
#include "rdrls/engine.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double run_timed(const rdrls::Scenario& scenario, rdrls::Execution execution,
                 rdrls::SimulationResult& result) {
  const auto start = std::chrono::steady_clock::now();
  result = rdrls::run_monte_carlo(scenario, execution);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP engine benchmark"};
  std::string preset = "fig2-bg";
  int trials = 8;
  int iterations = 1200;
  std::uint64_t seed = 42;
  app.add_option("--preset", preset, "Scenario preset to benchmark");
  app.add_option("--trials", trials, "Trial count");
  app.add_option("--iterations", iterations, "Iteration count");
  app.add_option("--seed", seed, "Master seed");
  CLI11_PARSE(app, argc, argv);

  try {
    rdrls::ExperimentConfig config = rdrls::preset_config(preset);
    config.trials = trials;
    config.iterations = iterations;
    config.change_iteration = -1;
    config.seed = seed;
    config = rdrls::resolve_config(config);
    const rdrls::Scenario scenario = rdrls::build_scenario(config);

    rdrls::SimulationResult serial;
    rdrls::SimulationResult parallel;
    const double serial_seconds =
        run_timed(scenario, rdrls::Execution::Serial, serial);
    const double parallel_seconds =
        run_timed(scenario, rdrls::Execution::Parallel, parallel);

    double max_diff = 0.0;
    for (std::size_t a = 0; a < serial.mean_sq_dev.size(); ++a) {
      for (std::size_t j = 0; j < serial.mean_sq_dev[a].size(); ++j) {
        max_diff = std::max(max_diff,
                            std::fabs(serial.mean_sq_dev[a][j] -
                                      parallel.mean_sq_dev[a][j]));
      }
    }

    int thread_count = 1;
#ifdef _OPENMP
    thread_count = omp_get_max_threads();
#endif
    std::printf("scenario            : %s (%d trials, %d iterations)\n",
                preset.c_str(), trials, iterations);
    std::printf("serial reference    : %8.3f s\n", serial_seconds);
    std::printf("openmp (%2d threads) : %8.3f s\n", thread_count,
                parallel_seconds);
    std::printf("speedup             : %8.2fx\n",
                serial_seconds / parallel_seconds);
    std::printf("max aggregate diff  : %g\n", max_diff);
    return max_diff == 0.0 ? 0 : 2;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 1;
  }
}
