#include "rdrls/config.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rdrls/harness.hpp"

using namespace rdrls;

namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rdrls-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

int count_columns(const std::string& header_line) {
  int columns = 1;
  for (char c : header_line) {
    if (c == ',') ++columns;
  }
  return columns;
}

ExperimentConfig small_config(const std::string& out_dir) {
  ExperimentConfig config;
  config.iterations = 100;
  config.trials = 2;
  config.seed = 404;
  config.nodes = 5;
  config.filter_length = 4;
  config.noise = "bernoulli-gaussian";
  config.algorithms = {"rdrls", "dselms"};
  config.output_dir = out_dir;
  return config;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("fig2 preset carries the reference parameter set") {
  const ExperimentConfig c = preset_config("fig2-bg");
  CHECK(c.forgetting == 0.995);
  CHECK(c.regularization == 0.01);
  CHECK(c.bound_forgetting == 0.98);
  CHECK(c.energy_budget == 1);
  CHECK(c.window_scale == 3);
  CHECK(c.reset_threshold == 25.0);
  CHECK(c.step_size == 0.015);
  CHECK(c.nodes == 20);
  CHECK(c.filter_length == 16);
  CHECK(c.noise == "bernoulli-gaussian");
  CHECK(c.impulse_probability_min == 0.001);
  CHECK(c.impulse_probability_max == 0.05);
  CHECK(c.impulse_gain == 1000.0);
  CHECK(c.trials == 20);
  CHECK(c.iterations == 6000);
}

TEST_CASE("fig3 preset swaps the impulse model only") {
  const ExperimentConfig fig2 = preset_config("fig2-bg");
  const ExperimentConfig fig3 = preset_config("fig3-alpha-stable");
  CHECK(fig3.noise == "alpha-stable");
  CHECK(fig3.alpha == 1.15);
  CHECK(fig3.dispersion == doctest::Approx(1.0 / 15).epsilon(1e-15));
  CHECK(fig3.forgetting == fig2.forgetting);
  CHECK(fig3.step_size == fig2.step_size);
  CHECK(fig3.nodes == fig2.nodes);
  CHECK(fig3.algorithms == fig2.algorithms);
}

TEST_CASE("fig4 preset restricts the roster to robust algorithms") {
  const ExperimentConfig c = preset_config("fig4-nodewise");
  CHECK(c.noise == "alpha-stable");
  CHECK(c.algorithms ==
        std::vector<std::string>{"dselms", "rdrls", "rdrls-dnc"});
}

TEST_CASE("unknown presets are rejected") {
  CHECK_THROWS_AS(preset_config("fig9"), std::invalid_argument);
}

TEST_CASE("empty custom configs are rejected with a missing-field error") {
  CHECK_THROWS_WITH_AS(parse_config_text(""),
                       doctest::Contains("run.iterations"),
                       std::invalid_argument);
}

TEST_CASE("unknown keys are rejected with the offending line") {
  const std::string text =
      "[run]\npreset = fig2-bg\n\n[signal]\nwavelength = 3\n";
  CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("line 5"),
                       std::invalid_argument);
}

TEST_CASE("unknown sections are rejected") {
  CHECK_THROWS_WITH_AS(parse_config_text("[plotting]\nstyle = dark\n"),
                       doctest::Contains("unknown section"),
                       std::invalid_argument);
}

TEST_CASE("unclosed edge blocks are rejected") {
  const std::string text =
      "[run]\npreset = fig2-bg\n[topology]\nbegin edges\n1 2\n";
  CHECK_THROWS_WITH_AS(parse_config_text(text), doctest::Contains("edge block"),
                       std::invalid_argument);
}

TEST_CASE("explicit edge blocks parse into the topology") {
  const std::string text =
      "[run]\npreset = fig2-bg\n[topology]\nnodes = 3\nbegin edges\n1 2\n2 3\n"
      "end edges\n[signal]\nfilter_length = 4\n";
  const ExperimentConfig config = parse_config_text(text);
  REQUIRE(config.edges.size() == 2);
  CHECK(config.edges[0] == std::pair<int, int>{0, 1});
  CHECK(config.edges[1] == std::pair<int, int>{1, 2});
  const Scenario scenario = build_scenario(resolve_config(config));
  CHECK(scenario.topology.node_count() == 3);
  CHECK(scenario.topology.linked(0, 1));
  CHECK_FALSE(scenario.topology.linked(0, 2));
}

TEST_CASE("change iterations beyond the run are rejected") {
  ExperimentConfig config = small_config("unused");
  config.change_iteration = 100;  // == iterations
  CHECK_THROWS_AS(validate_config(config), std::invalid_argument);
}

TEST_CASE("resolution fills every deferred value") {
  ExperimentConfig config = preset_config("fig2-bg");
  config.seed = 12345;
  const ExperimentConfig resolved = resolve_config(config);
  CHECK(resolved.seed == 12345);
  CHECK(resolved.topology_seed == derive_stream_seed(12345, 0, 0, 100));
  CHECK(resolved.profile_seed == derive_stream_seed(12345, 0, 0, 101));
  CHECK(resolved.ground_truth_seed == derive_stream_seed(12345, 0, 0, 102));
  CHECK(resolved.change_iteration == 3000);
  CHECK(resolved.steady_state_window == 500);
  CHECK_FALSE(resolved.edges.empty());

  ExperimentConfig unseeded = preset_config("fig2-bg");
  const ExperimentConfig auto_seeded = resolve_config(unseeded);
  CHECK(auto_seeded.seed != 0);
}

TEST_CASE("serialization round-trips the resolved config") {
  ExperimentConfig config = preset_config("fig3-alpha-stable");
  config.seed = 31415;
  config.external_traces = {"baseline.csv"};
  const ExperimentConfig resolved = resolve_config(config);
  const ExperimentConfig reloaded = parse_config_text(serialize_config(resolved));
  CHECK(reloaded == resolved);
}

TEST_CASE("scenario profiles honor the configured ranges") {
  ExperimentConfig config = small_config("unused");
  config.nodes = 12;
  const ExperimentConfig resolved = resolve_config(config);
  const Scenario scenario = build_scenario(resolved);
  REQUIRE(scenario.profiles.size() == 12);
  for (const NodeSignalProfile& profile : scenario.profiles) {
    CHECK(profile.innovation_variance >= resolved.innovation_variance_min);
    CHECK(profile.innovation_variance <= resolved.innovation_variance_max);
    CHECK(profile.background_variance >= resolved.background_variance_min);
    CHECK(profile.background_variance <= resolved.background_variance_max);
    const auto& impulse =
        std::get<ImpulseBernoulliGaussian>(profile.impulse);
    CHECK(impulse.probability >= resolved.impulse_probability_min);
    CHECK(impulse.probability <= resolved.impulse_probability_max);
    // Impulse power ties to the analytic clean-output power.
    NodeSignalProfile clean = profile;
    clean.impulse = ImpulseNone{};
    const NominalPowers powers =
        nominal_powers(clean, scenario.ground_truth.base());
    CHECK(impulse.variance ==
          doctest::Approx(1000.0 * powers.clean_output).epsilon(1e-12));
  }
}

TEST_CASE("learning curve has the contracted shape") {
  const fs::path dir = fresh_dir("shape");
  const ExperimentConfig config =
      resolve_config(small_config(dir.string()));
  run_experiment(config, Execution::Serial);
  const std::string csv = slurp((dir / "learning_curve.csv").string());
  CHECK(count_lines(csv) == 101);  // header + one row per iteration
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(count_columns(header) == 3);  // iteration + two algorithms
  CHECK(header == "iteration,rdrls,dselms");
  // LF endings only.
  CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("reruns from the emitted manifest are byte-identical") {
  const fs::path first_dir = fresh_dir("manifest-a");
  const ExperimentConfig config =
      resolve_config(small_config(first_dir.string()));
  const RunPaths first = run_experiment(config, Execution::Serial);

  ExperimentConfig reloaded = load_config(first.manifest);
  const fs::path second_dir = fresh_dir("manifest-b");
  reloaded.output_dir = second_dir.string();
  const RunPaths second =
      run_experiment(resolve_config(reloaded), Execution::Serial);

  CHECK(slurp(first.learning_curve) == slurp(second.learning_curve));
  CHECK(slurp(first.nodewise) == slurp(second.nodewise));
}

TEST_CASE("nodewise output covers every node with robust columns only") {
  const fs::path dir = fresh_dir("nodewise");
  ExperimentConfig config = preset_config("fig4-nodewise");
  config.trials = 1;
  config.iterations = 120;
  config.change_iteration = -1;
  config.seed = 2222;
  config.output_dir = dir.string();
  run_experiment(resolve_config(config), Execution::Serial);
  const std::string csv = slurp((dir / "nodewise_msd.csv").string());
  CHECK(count_lines(csv) == 21);  // header + twenty nodes
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "node,dselms,rdrls,rdrls-dnc");
}

TEST_CASE("drls is excluded from the nodewise robust columns") {
  const fs::path dir = fresh_dir("nodewise-drls");
  ExperimentConfig config = small_config(dir.string());
  config.algorithms = {"drls", "rdrls"};
  run_experiment(resolve_config(config), Execution::Serial);
  const std::string csv = slurp((dir / "nodewise_msd.csv").string());
  CHECK(csv.substr(0, csv.find('\n')) == "node,rdrls");
}

TEST_CASE("external baseline traces merge into the learning curve") {
  const fs::path dir = fresh_dir("external");
  const fs::path trace_path = dir / "imported.csv";
  {
    std::ofstream trace(trace_path);
    trace << "iteration,imported-baseline\n";
    for (int i = 1; i <= 5; ++i) trace << i << "," << (-3.5 - i) << "\n";
  }
  ExperimentConfig config = small_config(dir.string());
  config.external_traces = {trace_path.string()};
  run_experiment(resolve_config(config), Execution::Serial);
  const std::string csv = slurp((dir / "learning_curve.csv").string());
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "iteration,rdrls,dselms,imported-baseline");
  // Row 1 carries the imported value, row 6 leaves the cell empty.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  CHECK(line.find("-4.500000") != std::string::npos);
  for (int skip = 0; skip < 5; ++skip) std::getline(lines, line);
  CHECK(line.back() == ',');
}

TEST_CASE("divergent curves are clipped with a raw sidecar column") {
  SimulationResult result;
  result.node_count = 1;
  result.iterations = 3;
  result.change_iteration = 0;
  result.labels = {"steady", "blown"};
  result.kinds = {AlgorithmKind::Rdrls, AlgorithmKind::Drls};
  result.mean_sq_dev = {
      {1.0, 0.5, 0.25},
      {1.0, 1e12, std::numeric_limits<double>::infinity()}};
  ExperimentConfig config = small_config("unused");
  const std::string csv = learning_curve_csv(config, result);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "iteration,steady,blown,blown_raw");
  std::string row;
  std::getline(lines, row);  // iteration 1: nothing clipped yet
  CHECK(row == "1,0.000000,0.000000,0");
  std::getline(lines, row);  // 1e12 -> 120 dB, clipped to 60 in the plot column
  CHECK(row == "2,-3.010300,60.000000,120");
  std::getline(lines, row);  // infinity stays visible in the raw column
  CHECK(row == "3,-6.020600,60.000000,inf");
}

TEST_CASE("missing config files raise a clear error") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/rdrls.ini"),
                       doctest::Contains("cannot open"), std::invalid_argument);
}

}  // TEST_SUITE
