#include "rdrls/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rdrls {

namespace {

std::string trim(const std::string& text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

[[noreturn]] void fail_line(int line, const std::string& message) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " +
                              message);
}

double parse_real(const std::string& value, int line) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) fail_line(line, "trailing characters in number");
    return parsed;
  } catch (const std::invalid_argument&) {
    fail_line(line, "expected a number, got '" + value + "'");
  } catch (const std::out_of_range&) {
    fail_line(line, "number out of range: '" + value + "'");
  }
}

int parse_int(const std::string& value, int line) {
  try {
    std::size_t used = 0;
    const long parsed = std::stol(value, &used);
    if (used != value.size()) fail_line(line, "trailing characters in integer");
    return static_cast<int>(parsed);
  } catch (const std::invalid_argument&) {
    fail_line(line, "expected an integer, got '" + value + "'");
  } catch (const std::out_of_range&) {
    fail_line(line, "integer out of range: '" + value + "'");
  }
}

std::uint64_t parse_seed(const std::string& value, int line) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used);
    if (used != value.size()) fail_line(line, "trailing characters in seed");
    return parsed;
  } catch (const std::exception&) {
    fail_line(line, "expected an unsigned seed, got '" + value + "'");
  }
}

struct AlgorithmName {
  AlgorithmKind kind;
  bool cooperate;
};

AlgorithmName parse_algorithm_name(const std::string& name) {
  std::string base = name;
  bool cooperate = true;
  constexpr std::string_view suffix = "-nocoop";
  if (base.size() > suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    cooperate = false;
    base.resize(base.size() - suffix.size());
  }
  if (base == "drls") return {AlgorithmKind::Drls, cooperate};
  if (base == "rdrls") return {AlgorithmKind::Rdrls, cooperate};
  if (base == "rdrls-dnc") return {AlgorithmKind::RdrlsDnc, cooperate};
  if (base == "dselms") return {AlgorithmKind::SignErrorLms, cooperate};
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

}  // namespace

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig config;
  config.preset = name;
  if (name == "custom") return config;

  config.iterations = 6000;
  config.trials = 20;
  config.change_iteration = -1;  // halfway
  config.nodes = 20;
  config.link_probability = 0.25;
  config.filter_length = 16;
  if (name == "fig2-bg") {
    config.noise = "bernoulli-gaussian";
    config.algorithms = {"drls", "dselms", "rdrls", "rdrls-nocoop",
                         "rdrls-dnc"};
  } else if (name == "fig3-alpha-stable") {
    config.noise = "alpha-stable";
    config.algorithms = {"drls", "dselms", "rdrls", "rdrls-nocoop",
                         "rdrls-dnc"};
  } else if (name == "fig4-nodewise") {
    config.noise = "alpha-stable";
    config.algorithms = {"dselms", "rdrls", "rdrls-dnc"};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  std::vector<std::pair<int, int>> edges;
  bool edges_given = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  bool in_edges = false;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (in_edges) {
      if (line == "end edges") {
        in_edges = false;
        continue;
      }
      std::istringstream fields(line);
      int a = 0;
      int b = 0;
      std::string extra;
      if (!(fields >> a >> b) || (fields >> extra)) {
        fail_line(line_no, "expected 'm k' edge pair");
      }
      if (a < 1 || b < 1) fail_line(line_no, "edge node ids are 1-based");
      edges.emplace_back(a - 1, b - 1);
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') fail_line(line_no, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "run" && section != "topology" && section != "signal" &&
          section != "algorithms" && section != "external" &&
          section != "meta") {
        fail_line(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    if (line == "begin edges") {
      if (section != "topology") {
        fail_line(line_no, "edge block belongs in [topology]");
      }
      in_edges = true;
      edges_given = true;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail_line(line_no, "expected 'key = value'");
    }
    entries.push_back(Entry{section, trim(line.substr(0, eq)),
                            trim(line.substr(eq + 1)), line_no});
  }
  if (in_edges) {
    throw std::invalid_argument("config: edge block not closed ('end edges')");
  }

  // The preset provides the baseline; explicit keys override it.
  std::string preset = "custom";
  for (const Entry& entry : entries) {
    if (entry.section == "run" && entry.key == "preset") preset = entry.value;
  }
  ExperimentConfig config = preset_config(preset);

  for (const Entry& e : entries) {
    const std::string id = e.section + "." + e.key;
    if (id == "run.preset") {
      // consumed above
    } else if (id == "run.iterations") {
      config.iterations = parse_int(e.value, e.line);
    } else if (id == "run.trials") {
      config.trials = parse_int(e.value, e.line);
    } else if (id == "run.seed") {
      config.seed = parse_seed(e.value, e.line);
    } else if (id == "run.change_iteration") {
      config.change_iteration = parse_int(e.value, e.line);
    } else if (id == "run.steady_state_window") {
      config.steady_state_window = parse_int(e.value, e.line);
    } else if (id == "run.output_dir") {
      config.output_dir = e.value;
    } else if (id == "topology.nodes") {
      config.nodes = parse_int(e.value, e.line);
    } else if (id == "topology.link_probability") {
      config.link_probability = parse_real(e.value, e.line);
    } else if (id == "topology.topology_seed") {
      config.topology_seed = parse_seed(e.value, e.line);
    } else if (id == "signal.filter_length") {
      config.filter_length = parse_int(e.value, e.line);
    } else if (id == "signal.ar_a1") {
      config.ar_a1 = parse_real(e.value, e.line);
    } else if (id == "signal.ar_a2") {
      config.ar_a2 = parse_real(e.value, e.line);
    } else if (id == "signal.innovation_variance_min") {
      config.innovation_variance_min = parse_real(e.value, e.line);
    } else if (id == "signal.innovation_variance_max") {
      config.innovation_variance_max = parse_real(e.value, e.line);
    } else if (id == "signal.background_variance_min") {
      config.background_variance_min = parse_real(e.value, e.line);
    } else if (id == "signal.background_variance_max") {
      config.background_variance_max = parse_real(e.value, e.line);
    } else if (id == "signal.profile_seed") {
      config.profile_seed = parse_seed(e.value, e.line);
    } else if (id == "signal.ground_truth_seed") {
      config.ground_truth_seed = parse_seed(e.value, e.line);
    } else if (id == "signal.noise") {
      config.noise = e.value;
    } else if (id == "signal.impulse_probability_min") {
      config.impulse_probability_min = parse_real(e.value, e.line);
    } else if (id == "signal.impulse_probability_max") {
      config.impulse_probability_max = parse_real(e.value, e.line);
    } else if (id == "signal.impulse_gain") {
      config.impulse_gain = parse_real(e.value, e.line);
    } else if (id == "signal.alpha") {
      config.alpha = parse_real(e.value, e.line);
    } else if (id == "signal.dispersion") {
      config.dispersion = parse_real(e.value, e.line);
    } else if (id == "algorithms.run") {
      config.algorithms = split_list(e.value);
    } else if (id == "algorithms.forgetting") {
      config.forgetting = parse_real(e.value, e.line);
    } else if (id == "algorithms.regularization") {
      config.regularization = parse_real(e.value, e.line);
    } else if (id == "algorithms.bound_forgetting") {
      config.bound_forgetting = parse_real(e.value, e.line);
    } else if (id == "algorithms.energy_budget") {
      config.energy_budget = parse_int(e.value, e.line);
    } else if (id == "algorithms.bound_init_override") {
      config.bound_init_override = parse_real(e.value, e.line);
    } else if (id == "algorithms.window_scale") {
      config.window_scale = parse_int(e.value, e.line);
    } else if (id == "algorithms.reset_threshold") {
      config.reset_threshold = parse_real(e.value, e.line);
    } else if (id == "algorithms.step_size") {
      config.step_size = parse_real(e.value, e.line);
    } else if (id == "external.traces") {
      config.external_traces = split_list(e.value);
    } else if (e.section == "meta") {
      // Manifest provenance; accepted, not interpreted.
      if (e.key != "version" && e.key != "created_utc" && e.key != "tool" &&
          e.key != "elapsed_seconds") {
        fail_line(e.line, "unknown key '" + e.key + "' in [meta]");
      }
    } else {
      fail_line(e.line, "unknown key '" + e.key + "' in [" + e.section + "]");
    }
  }
  if (edges_given) config.edges = std::move(edges);

  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void validate_config(const ExperimentConfig& c) {
  const auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
  };
  require(c.iterations >= 1, "missing or invalid field run.iterations");
  require(c.trials >= 1, "missing or invalid field run.trials");
  require(c.change_iteration >= -1 && c.change_iteration < c.iterations,
          "run.change_iteration must be -1, 0, or before the last iteration");
  require(c.steady_state_window >= 0, "run.steady_state_window must be >= 0");
  require(c.nodes >= 2, "missing or invalid field topology.nodes");
  require(c.link_probability > 0.0 && c.link_probability <= 1.0,
          "topology.link_probability must be in (0, 1]");
  require(c.filter_length >= 1, "signal.filter_length must be >= 1");
  require(c.innovation_variance_min > 0.0 &&
              c.innovation_variance_max >= c.innovation_variance_min,
          "signal innovation variance range must be positive and ordered");
  require(c.background_variance_min > 0.0 &&
              c.background_variance_max >= c.background_variance_min,
          "signal background variance range must be positive and ordered");
  require(c.noise == "none" || c.noise == "bernoulli-gaussian" ||
              c.noise == "alpha-stable",
          "signal.noise must be none, bernoulli-gaussian, or alpha-stable");
  require(c.impulse_probability_min >= 0.0 &&
              c.impulse_probability_max >= c.impulse_probability_min &&
              c.impulse_probability_max <= 1.0,
          "impulse probability range must lie in [0, 1]");
  require(c.impulse_gain > 0.0, "signal.impulse_gain must be positive");
  require(c.alpha > 0.0 && c.alpha <= 2.0, "signal.alpha must be in (0, 2]");
  require(c.dispersion > 0.0, "signal.dispersion must be positive");
  require(!c.algorithms.empty(), "missing field algorithms.run");
  for (const std::string& name : c.algorithms) {
    parse_algorithm_name(name);  // throws on unknown names
  }
  for (std::size_t i = 0; i < c.algorithms.size(); ++i) {
    for (std::size_t j = i + 1; j < c.algorithms.size(); ++j) {
      require(c.algorithms[i] != c.algorithms[j],
              "duplicate algorithm '" + c.algorithms[i] + "'");
    }
  }
  require(c.forgetting > 0.0 && c.forgetting <= 1.0,
          "algorithms.forgetting must be in (0, 1]");
  require(c.regularization > 0.0, "algorithms.regularization must be positive");
  require(c.bound_forgetting > 0.0 && c.bound_forgetting <= 1.0,
          "algorithms.bound_forgetting must be in (0, 1]");
  require(c.energy_budget >= 1, "algorithms.energy_budget must be >= 1");
  require(c.bound_init_override >= 0.0,
          "algorithms.bound_init_override must be >= 0");
  require(c.window_scale >= 1, "algorithms.window_scale must be >= 1");
  for (const std::string& name : c.algorithms) {
    if (name.rfind("rdrls-dnc", 0) == 0) {
      require(c.window_scale * c.filter_length >= 2,
              "detector window (window_scale * filter_length) must be >= 2");
    }
  }
  require(c.reset_threshold > 0.0,
          "algorithms.reset_threshold must be positive");
  require(c.step_size > 0.0, "algorithms.step_size must be positive");
  for (const auto& [a, b] : c.edges) {
    require(a >= 0 && b >= 0 && a < c.nodes && b < c.nodes && a != b,
            "topology edge endpoints out of range");
  }
}

ExperimentConfig resolve_config(ExperimentConfig config) {
  validate_config(config);
  if (config.seed == 0) {
    std::random_device device;
    do {
      config.seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
    } while (config.seed == 0);
  }
  if (config.topology_seed == 0) {
    config.topology_seed = derive_stream_seed(config.seed, 0, 0, 100);
  }
  if (config.profile_seed == 0) {
    config.profile_seed = derive_stream_seed(config.seed, 0, 0, 101);
  }
  if (config.ground_truth_seed == 0) {
    config.ground_truth_seed = derive_stream_seed(config.seed, 0, 0, 102);
  }
  if (config.change_iteration == -1) {
    config.change_iteration = config.iterations / 2;
  }
  if (config.steady_state_window == 0) {
    const int segment = config.change_iteration > 0 ? config.change_iteration
                                                    : config.iterations;
    config.steady_state_window = std::clamp(segment / 6, 1, 500);
  }
  if (config.edges.empty()) {
    const Topology topology = Topology::random_connected(
        config.nodes, config.link_probability, config.topology_seed);
    config.edges = topology.edges();
  }
  validate_config(config);
  return config;
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[run]\n";
  out << "preset = " << c.preset << "\n";
  out << "iterations = " << c.iterations << "\n";
  out << "trials = " << c.trials << "\n";
  out << "seed = " << c.seed << "\n";
  out << "change_iteration = " << c.change_iteration << "\n";
  out << "steady_state_window = " << c.steady_state_window << "\n";
  out << "output_dir = " << c.output_dir << "\n";
  out << "\n[topology]\n";
  out << "nodes = " << c.nodes << "\n";
  out << "link_probability = " << c.link_probability << "\n";
  out << "topology_seed = " << c.topology_seed << "\n";
  if (!c.edges.empty()) {
    out << "begin edges\n";
    for (const auto& [a, b] : c.edges) {
      out << (a + 1) << ' ' << (b + 1) << "\n";
    }
    out << "end edges\n";
  }
  out << "\n[signal]\n";
  out << "filter_length = " << c.filter_length << "\n";
  out << "ar_a1 = " << c.ar_a1 << "\n";
  out << "ar_a2 = " << c.ar_a2 << "\n";
  out << "innovation_variance_min = " << c.innovation_variance_min << "\n";
  out << "innovation_variance_max = " << c.innovation_variance_max << "\n";
  out << "background_variance_min = " << c.background_variance_min << "\n";
  out << "background_variance_max = " << c.background_variance_max << "\n";
  out << "profile_seed = " << c.profile_seed << "\n";
  out << "ground_truth_seed = " << c.ground_truth_seed << "\n";
  out << "noise = " << c.noise << "\n";
  out << "impulse_probability_min = " << c.impulse_probability_min << "\n";
  out << "impulse_probability_max = " << c.impulse_probability_max << "\n";
  out << "impulse_gain = " << c.impulse_gain << "\n";
  out << "alpha = " << c.alpha << "\n";
  out << "dispersion = " << c.dispersion << "\n";
  out << "\n[algorithms]\n";
  out << "run = ";
  for (std::size_t i = 0; i < c.algorithms.size(); ++i) {
    if (i) out << ", ";
    out << c.algorithms[i];
  }
  out << "\n";
  out << "forgetting = " << c.forgetting << "\n";
  out << "regularization = " << c.regularization << "\n";
  out << "bound_forgetting = " << c.bound_forgetting << "\n";
  out << "energy_budget = " << c.energy_budget << "\n";
  out << "bound_init_override = " << c.bound_init_override << "\n";
  out << "window_scale = " << c.window_scale << "\n";
  out << "reset_threshold = " << c.reset_threshold << "\n";
  out << "step_size = " << c.step_size << "\n";
  if (!c.external_traces.empty()) {
    out << "\n[external]\n";
    out << "traces = ";
    for (std::size_t i = 0; i < c.external_traces.size(); ++i) {
      if (i) out << ", ";
      out << c.external_traces[i];
    }
    out << "\n";
  }
  return out.str();
}

Scenario build_scenario(const ExperimentConfig& config) {
  validate_config(config);
  if (config.edges.empty()) {
    throw std::invalid_argument(
        "build_scenario: config not resolved (no topology edges)");
  }
  Topology topology(config.nodes, config.edges);

  GroundTruth truth = GroundTruth::random(
      config.filter_length, config.ground_truth_seed,
      std::max(config.change_iteration, 0));

  // Per-node parameter draws. Three uniforms per node regardless of the
  // noise model, so profiles are comparable across noise settings.
  Xoshiro256 rng(config.profile_seed);
  std::vector<NodeSignalProfile> profiles(static_cast<std::size_t>(config.nodes));
  for (NodeSignalProfile& profile : profiles) {
    profile.ar_a1 = config.ar_a1;
    profile.ar_a2 = config.ar_a2;
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const double u3 = rng.uniform01();
    profile.innovation_variance =
        config.innovation_variance_min +
        u1 * (config.innovation_variance_max - config.innovation_variance_min);
    profile.background_variance =
        config.background_variance_min +
        u2 * (config.background_variance_max - config.background_variance_min);
    if (config.noise == "bernoulli-gaussian") {
      const double probability =
          config.impulse_probability_min +
          u3 * (config.impulse_probability_max - config.impulse_probability_min);
      const NominalPowers powers = nominal_powers(profile, truth.base());
      profile.impulse = ImpulseBernoulliGaussian{
          probability, config.impulse_gain * powers.clean_output};
    } else if (config.noise == "alpha-stable") {
      profile.impulse = ImpulseAlphaStable{config.alpha, config.dispersion};
    }
    profile.validate();
  }

  Scenario scenario{std::move(topology),
                    std::move(profiles),
                    std::move(truth),
                    config.filter_length,
                    config.iterations,
                    config.trials,
                    config.seed,
                    {}};
  for (const std::string& name : config.algorithms) {
    const AlgorithmName parsed = parse_algorithm_name(name);
    AlgorithmSpec spec;
    spec.kind = parsed.kind;
    spec.cooperate = parsed.cooperate;
    spec.label = name;
    spec.forgetting = config.forgetting;
    spec.regularization = config.regularization;
    spec.bound_forgetting = config.bound_forgetting;
    spec.energy_budget = config.energy_budget;
    spec.bound_init_override = config.bound_init_override;
    spec.window_scale = config.window_scale;
    spec.reset_threshold = config.reset_threshold;
    spec.step_size = config.step_size;
    scenario.algorithms.push_back(std::move(spec));
  }
  scenario.validate();
  return scenario;
}

}  // namespace rdrls
