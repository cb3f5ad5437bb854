#include "rdrls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace rdrls {

namespace {

constexpr double kPlotClipDb = 60.0;

std::string format_db(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string format_raw(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

struct ExternalTrace {
  std::string label;
  std::map<int, double> values;
};

ExternalTrace read_external_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open external trace '" + path + "'");
  }
  ExternalTrace trace;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("external trace '" + path + "' is empty");
  }
  const std::size_t comma = line.find(',');
  trace.label = comma == std::string::npos
                    ? std::filesystem::path(path).stem().string()
                    : line.substr(comma + 1);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t split = line.find(',');
    if (split == std::string::npos) {
      throw std::invalid_argument("external trace '" + path +
                                  "': expected 'iteration,value'");
    }
    trace.values[std::stoi(line.substr(0, split))] =
        std::stod(line.substr(split + 1));
  }
  return trace;
}

}  // namespace

std::string learning_curve_csv(const ExperimentConfig& config,
                               const SimulationResult& result) {
  const std::size_t algorithm_count = result.labels.size();
  std::vector<std::vector<double>> curves(algorithm_count);
  std::vector<bool> clipped(algorithm_count, false);
  for (std::size_t a = 0; a < algorithm_count; ++a) {
    curves[a] = msd_net_curve(result, static_cast<int>(a));
    for (double value : curves[a]) {
      if (!std::isfinite(value) || value > kPlotClipDb) {
        clipped[a] = true;
        break;
      }
    }
  }
  std::vector<ExternalTrace> external;
  for (const std::string& path : config.external_traces) {
    external.push_back(read_external_trace(path));
  }

  std::ostringstream out;
  out << "iteration";
  for (const std::string& label : result.labels) out << ',' << label;
  for (std::size_t a = 0; a < algorithm_count; ++a) {
    if (clipped[a]) out << ',' << result.labels[a] << "_raw";
  }
  for (const ExternalTrace& trace : external) out << ',' << trace.label;
  out << '\n';
  for (int i = 1; i <= result.iterations; ++i) {
    out << i;
    for (std::size_t a = 0; a < algorithm_count; ++a) {
      const double value = curves[a][static_cast<std::size_t>(i - 1)];
      const double plotted =
          std::isfinite(value) ? std::min(value, kPlotClipDb) : kPlotClipDb;
      out << ',' << format_db(plotted);
    }
    for (std::size_t a = 0; a < algorithm_count; ++a) {
      if (clipped[a]) {
        out << ',' << format_raw(curves[a][static_cast<std::size_t>(i - 1)]);
      }
    }
    for (const ExternalTrace& trace : external) {
      const auto found = trace.values.find(i);
      out << ',';
      if (found != trace.values.end()) out << format_db(found->second);
    }
    out << '\n';
  }
  return out.str();
}

std::string nodewise_csv(const ExperimentConfig& config,
                         const SimulationResult& result) {
  const int segment_end = result.change_iteration > 0
                              ? result.change_iteration
                              : result.iterations;
  std::vector<int> robust;
  std::vector<std::vector<double>> steady;
  for (std::size_t a = 0; a < result.kinds.size(); ++a) {
    if (result.kinds[a] == AlgorithmKind::Drls) continue;
    robust.push_back(static_cast<int>(a));
    steady.push_back(steady_state_msd(result, static_cast<int>(a),
                                      config.steady_state_window, segment_end));
  }
  std::ostringstream out;
  out << "node";
  for (int a : robust) out << ',' << result.labels[static_cast<std::size_t>(a)];
  out << '\n';
  for (int k = 0; k < result.node_count; ++k) {
    out << (k + 1);
    for (std::size_t column = 0; column < robust.size(); ++column) {
      out << ',' << format_db(steady[column][static_cast<std::size_t>(k)]);
    }
    out << '\n';
  }
  return out.str();
}

RunPaths run_experiment(const ExperimentConfig& config, Execution execution,
                        std::ostream* log) {
  if (config.seed == 0 || config.edges.empty()) {
    throw std::invalid_argument("run_experiment: config must be resolved");
  }
  const auto started = std::chrono::steady_clock::now();
  const Scenario scenario = build_scenario(config);
  const SimulationResult result = run_monte_carlo(scenario, execution);

  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  RunPaths paths;
  paths.learning_curve = (dir / "learning_curve.csv").string();
  paths.nodewise = (dir / "nodewise_msd.csv").string();
  paths.manifest = (dir / "run_manifest.ini").string();

  {
    std::ofstream out(paths.learning_curve, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + paths.learning_curve);
    out << learning_curve_csv(config, result);
  }
  {
    std::ofstream out(paths.nodewise, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + paths.nodewise);
    out << nodewise_csv(config, result);
  }
  {
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - started);
    const auto now = std::chrono::system_clock::now();
    const std::time_t stamp = std::chrono::system_clock::to_time_t(now);
    char iso[32];
    std::strftime(iso, sizeof(iso), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&stamp));
    std::ofstream out(paths.manifest, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + paths.manifest);
    out << serialize_config(config);
    out << "\n[meta]\n";
    out << "tool = rdrls-sim\n";
    out << "version = " << kVersion << "\n";
    out << "created_utc = " << iso << "\n";
    out << "elapsed_seconds = " << elapsed.count() << "\n";
  }
  if (log) {
    *log << "wrote " << paths.learning_curve << "\n"
         << "wrote " << paths.nodewise << "\n"
         << "wrote " << paths.manifest << "\n";
  }
  return paths;
}

}  // namespace rdrls
