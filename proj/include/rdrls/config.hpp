#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rdrls/engine.hpp"

namespace rdrls {

inline constexpr const char* kVersion = "0.1.0";

/// Human-editable experiment description. Sections: [run], [topology],
/// [signal], [algorithms], [external]. Unknown sections or keys are
/// rejected with line diagnostics. Seed value 0 means "resolve for me";
/// resolve_config() replaces every 0 seed so the emitted manifest is fully
/// explicit.
struct ExperimentConfig {
  // [run]
  std::string preset = "custom";
  int iterations = 0;
  int trials = 0;
  std::uint64_t seed = 0;         // master seed; 0 = auto-generate
  int change_iteration = 0;       // -1 = halfway, 0 = no change
  int steady_state_window = 0;    // 0 = auto (segment / 6, capped at 500)
  std::string output_dir = "out";
  // [topology]
  int nodes = 0;
  double link_probability = 0.25;
  std::uint64_t topology_seed = 0;          // 0 = derived from master
  std::vector<std::pair<int, int>> edges;   // 0-based; empty = generate
  // [signal]
  int filter_length = 16;
  double ar_a1 = 1.6;
  double ar_a2 = -0.81;
  double innovation_variance_min = 0.2;
  double innovation_variance_max = 1.0;
  double background_variance_min = 0.01;
  double background_variance_max = 0.1;
  std::uint64_t profile_seed = 0;       // 0 = derived from master
  std::uint64_t ground_truth_seed = 0;  // 0 = derived from master
  std::string noise = "bernoulli-gaussian";  // none | bernoulli-gaussian | alpha-stable
  double impulse_probability_min = 0.001;
  double impulse_probability_max = 0.05;
  double impulse_gain = 1000.0;  // impulse variance = gain * clean output power
  double alpha = 1.15;
  double dispersion = 1.0 / 15.0;
  // [algorithms]
  std::vector<std::string> algorithms;  // drls, rdrls, rdrls-dnc, dselms (+ -nocoop)
  double forgetting = 0.995;
  double regularization = 0.01;
  double bound_forgetting = 0.98;
  int energy_budget = 1;
  double bound_init_override = 0.0;
  int window_scale = 3;
  double reset_threshold = 25.0;
  double step_size = 0.015;
  // [external]
  std::vector<std::string> external_traces;  // extra learning-curve columns

  bool operator==(const ExperimentConfig&) const = default;
};

/// Built-in parameter sets: "fig2-bg", "fig3-alpha-stable", "fig4-nodewise",
/// or "custom" (everything unset). Throws on unknown names.
ExperimentConfig preset_config(const std::string& name);

/// Parses config text. A `preset` key is applied first, then every explicit
/// key overrides it. Throws std::invalid_argument with a line or field
/// diagnostic on schema violations or missing required fields.
ExperimentConfig parse_config_text(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// All fields, fixed order; load_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Field-level range checks (also called by parse/resolve).
void validate_config(const ExperimentConfig& config);

/// Fills every deferred value: seeds, halfway change iteration, automatic
/// steady-state window, and the materialized topology edge list. The result
/// is self-contained and reproducible.
ExperimentConfig resolve_config(ExperimentConfig config);

/// Instantiates the engine scenario: topology, per-node signal profiles
/// drawn from the configured ranges, unit-norm ground truth, and the
/// algorithm roster. Requires a resolved config.
Scenario build_scenario(const ExperimentConfig& config);

}  // namespace rdrls
