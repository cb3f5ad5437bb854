#include "rdrls/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdrls {

void Scenario::validate() const {
  if (static_cast<int>(profiles.size()) != topology.node_count()) {
    throw std::invalid_argument("Scenario: one profile per node required");
  }
  for (const auto& profile : profiles) profile.validate();
  if (ground_truth.length() != filter_length) {
    throw std::invalid_argument("Scenario: ground truth length mismatch");
  }
  if (iterations < 1) {
    throw std::invalid_argument("Scenario: iteration count must be positive");
  }
  if (trials < 1) {
    throw std::invalid_argument("Scenario: trial count must be positive");
  }
  if (algorithms.empty()) {
    throw std::invalid_argument("Scenario: no algorithms selected");
  }
  if (ground_truth.flip_iteration() > iterations) {
    throw std::invalid_argument("Scenario: change scheduled after the run ends");
  }
}

AlgorithmRunState::AlgorithmRunState(AlgorithmSpec spec, int algorithm_index,
                                     const Topology& topology,
                                     int filter_length,
                                     std::span<const double> initial_bounds,
                                     const CombinationMatrix& diffusion_weights)
    : spec_(std::move(spec)),
      algorithm_index_(algorithm_index),
      topology_(&topology),
      weights_(spec_.cooperate ? diffusion_weights
                               : CombinationMatrix::identity(topology.node_count())),
      node_count_(topology.node_count()) {
  intermediates_.assign(node_count_, Eigen::VectorXd::Zero(filter_length));
  int max_degree = 1;
  for (int k = 0; k < node_count_; ++k) {
    max_degree = std::max(max_degree, topology.neighborhood_size(k));
  }
  neighbor_vectors_.assign(static_cast<std::size_t>(max_degree),
                           Eigen::VectorXd::Zero(filter_length));
  neighbor_scalars_.resize(static_cast<std::size_t>(max_degree));
  neighbor_weights_.resize(static_cast<std::size_t>(max_degree));
  if (spec_.kind == AlgorithmKind::SignErrorLms) {
    lms_.reserve(node_count_);
    for (int k = 0; k < node_count_; ++k) {
      lms_.push_back(SignErrorLmsState::initial(filter_length, spec_.step_size));
    }
    return;
  }
  rls_.reserve(node_count_);
  for (int k = 0; k < node_count_; ++k) {
    rls_.push_back(RlsCoreState::initial(filter_length, spec_.forgetting,
                                         spec_.regularization));
  }
  if (spec_.is_robust()) {
    if (static_cast<int>(initial_bounds.size()) != node_count_) {
      throw std::invalid_argument("AlgorithmRunState: initial bound per node");
    }
    zetas_.assign(node_count_, 0.0);
    bounds_.reserve(node_count_);
    for (int k = 0; k < node_count_; ++k) {
      bounds_.push_back(RobustBoundState::initial(initial_bounds[k],
                                                  spec_.bound_forgetting));
    }
  }
  if (spec_.kind == AlgorithmKind::RdrlsDnc) {
    trimmed_means_.assign(node_count_, 0.0);
    detectors_.reserve(node_count_);
    for (int k = 0; k < node_count_; ++k) {
      detectors_.push_back(DncState::create(spec_.window_scale, filter_length,
                                            spec_.reset_threshold));
    }
  }
}

const Eigen::VectorXd& AlgorithmRunState::estimate(int node) const {
  return spec_.kind == AlgorithmKind::SignErrorLms ? lms_[node].estimate
                                                   : rls_[node].estimate;
}

double AlgorithmRunState::bound(int node) const {
  if (!spec_.is_robust()) {
    throw std::logic_error("bound: not a norm-constrained algorithm");
  }
  return bounds_[node].bound;
}

void AlgorithmRunState::adapt_phase(std::span<const NodeInput> inputs,
                                    int iteration,
                                    const RoundObserver* observer) {
  for (int k = 0; k < node_count_; ++k) {
    const Eigen::VectorXd& u = inputs[k].regressor;
    const double d = inputs[k].measurement;
    RoundEvent event;
    event.algorithm = algorithm_index_;
    event.node = k;
    event.iteration = iteration;
    event.phase = 1;
    switch (spec_.kind) {
      case AlgorithmKind::Drls: {
        const AdaptationOutcome outcome = drls_adapt(rls_[k], u, d);
        intermediates_[k] = outcome.intermediate;
        event.update_sq_norm = outcome.update_sq_norm;
        event.bound = std::numeric_limits<double>::quiet_NaN();
        event.scaling = 1.0;
        break;
      }
      case AlgorithmKind::SignErrorLms: {
        intermediates_[k] = selms_adapt(lms_[k], u, d);
        event.update_sq_norm =
            (intermediates_[k] - lms_[k].estimate).squaredNorm();
        event.bound = std::numeric_limits<double>::quiet_NaN();
        event.scaling = 1.0;
        break;
      }
      case AlgorithmKind::Rdrls:
      case AlgorithmKind::RdrlsDnc: {
        const double bound_prev = bounds_[k].bound;
        const AdaptationOutcome outcome = rdrls_adapt(rls_[k], bound_prev, u, d);
        intermediates_[k] = outcome.intermediate;
        zetas_[k] = bound_local_update(spec_.bound_forgetting, bound_prev,
                                       outcome.gain_energy);
        if (spec_.kind == AlgorithmKind::RdrlsDnc) {
          const double energy = u.squaredNorm();
          detectors_[k].push_normalized_error(
              energy > 0.0 ? outcome.error * outcome.error / energy : 0.0);
        }
        event.update_sq_norm = outcome.update_sq_norm;
        event.bound = bound_prev;
        event.scaling = outcome.scaling;
        break;
      }
    }
    if (observer) (*observer)(event);
  }
}

void AlgorithmRunState::detector_checkpoint(int iteration) {
  for (int k = 0; k < node_count_; ++k) {
    trimmed_means_[k] = detectors_[k].trimmed_mean();
  }
  for (int k = 0; k < node_count_; ++k) {
    std::size_t count = 1;
    if (spec_.cooperate) {
      const auto& hood = topology_->neighbors(k);
      count = hood.size();
      for (std::size_t j = 0; j < count; ++j) {
        neighbor_scalars_[j] = trimmed_means_[hood[j]];
        neighbor_weights_[j] = weights_.weight(hood[j], k);
      }
    } else {
      // Isolated node: only its own side information.
      neighbor_scalars_[0] = trimmed_means_[k];
      neighbor_weights_[0] = 1.0;
    }
    const DncDecision decision = dnc_step(
        detectors_[k], bounds_[k], rls_[k], iteration,
        std::span<const double>(neighbor_scalars_.data(), count),
        std::span<const double>(neighbor_weights_.data(), count), zetas_[k]);
    zetas_[k] = decision.zeta;
  }
}

void AlgorithmRunState::combine_phase(int iteration,
                                      const RoundObserver* observer) {
  // Combination reads only the staged intermediates and zetas published by
  // the adaptation phase, so estimates and bounds can be written in place.
  // Non-cooperating instances pass their own values through; no neighbor
  // state (including a diverged one) can reach an isolated node.
  const bool robust = spec_.is_robust();
  for (int k = 0; k < node_count_; ++k) {
    Eigen::VectorXd& target = spec_.kind == AlgorithmKind::SignErrorLms
                                  ? lms_[k].estimate
                                  : rls_[k].estimate;
    RoundEvent event;
    event.algorithm = algorithm_index_;
    event.node = k;
    event.iteration = iteration;
    event.phase = 2;
    event.bound = std::numeric_limits<double>::quiet_NaN();
    if (!spec_.cooperate) {
      target = intermediates_[k];
      if (robust) {
        bounds_[k].bound = zetas_[k];
        event.bound = bounds_[k].bound;
      }
      if (observer) (*observer)(event);
      continue;
    }
    const auto& hood = topology_->neighbors(k);
    for (std::size_t j = 0; j < hood.size(); ++j) {
      neighbor_vectors_[j] = intermediates_[hood[j]];
      neighbor_weights_[j] = weights_.weight(hood[j], k);
    }
    const std::span<const double> weights(neighbor_weights_.data(),
                                          hood.size());
    target = combine(
        std::span<const Eigen::VectorXd>(neighbor_vectors_.data(), hood.size()),
        weights);
    if (robust) {
      for (std::size_t j = 0; j < hood.size(); ++j) {
        neighbor_scalars_[j] = zetas_[hood[j]];
      }
      bounds_[k].bound = combine(
          std::span<const double>(neighbor_scalars_.data(), hood.size()),
          weights);
      event.bound = bounds_[k].bound;
    }
    if (observer) (*observer)(event);
  }
}

void AlgorithmRunState::run_round(std::span<const NodeInput> inputs,
                                  int iteration,
                                  const RoundObserver* observer) {
  if (static_cast<int>(inputs.size()) != node_count_) {
    throw std::invalid_argument("run_round: one input per node required");
  }
  adapt_phase(inputs, iteration, observer);
  if (spec_.kind == AlgorithmKind::RdrlsDnc &&
      detectors_[0].checkpoint_due(iteration)) {
    detector_checkpoint(iteration);
  }
  combine_phase(iteration, observer);
}

TrialResult run_trial(const Scenario& scenario, int trial_index,
                      const RoundObserver* observer) {
  scenario.validate();
  const int n = scenario.topology.node_count();
  const int m = scenario.filter_length;
  const CombinationMatrix diffusion =
      CombinationMatrix::metropolis(scenario.topology);

  // Analytic per-node powers feed the initial bounds.
  std::vector<double> regressor_power(n);
  std::vector<double> measurement_power(n);
  for (int k = 0; k < n; ++k) {
    const NominalPowers powers =
        nominal_powers(scenario.profiles[k], scenario.ground_truth.base());
    regressor_power[k] = powers.regressor;
    measurement_power[k] = powers.measurement;
  }

  std::vector<AlgorithmRunState> algorithms;
  algorithms.reserve(scenario.algorithms.size());
  std::vector<double> bounds0(n, 1.0);
  for (std::size_t a = 0; a < scenario.algorithms.size(); ++a) {
    const AlgorithmSpec& spec = scenario.algorithms[a];
    if (spec.is_robust()) {
      for (int k = 0; k < n; ++k) {
        bounds0[k] = spec.bound_init_override > 0.0
                         ? spec.bound_init_override
                         : initial_bound(spec.energy_budget,
                                         measurement_power[k],
                                         regressor_power[k], m);
      }
    }
    algorithms.emplace_back(spec, static_cast<int>(a), scenario.topology, m,
                            bounds0, diffusion);
  }

  // Per-node generators; one independent stream per (trial, node, tag).
  std::vector<Ar2Generator> inputs_rng;
  std::vector<NoiseGenerator> noise_rng;
  std::vector<RegressorWindow> windows;
  inputs_rng.reserve(n);
  noise_rng.reserve(n);
  windows.reserve(n);
  for (int k = 0; k < n; ++k) {
    const NodeSignalProfile& profile = scenario.profiles[k];
    inputs_rng.emplace_back(
        profile.ar_a1, profile.ar_a2, profile.innovation_variance,
        Xoshiro256(derive_stream_seed(scenario.master_seed,
                                      static_cast<std::uint64_t>(trial_index),
                                      static_cast<std::uint64_t>(k), 0)));
    noise_rng.emplace_back(
        profile,
        Xoshiro256(derive_stream_seed(scenario.master_seed,
                                      static_cast<std::uint64_t>(trial_index),
                                      static_cast<std::uint64_t>(k), 1)));
    windows.emplace_back(m);
  }

  TrialResult result;
  result.sq_dev.assign(scenario.algorithms.size(),
                       std::vector<double>(
                           static_cast<std::size_t>(scenario.iterations) * n));
  std::vector<NodeInput> inputs(n);
  for (int k = 0; k < n; ++k) inputs[k].regressor.resize(m);

  for (int i = 1; i <= scenario.iterations; ++i) {
    const Eigen::VectorXd& truth = scenario.ground_truth.at(i);
    for (int k = 0; k < n; ++k) {
      windows[k].push(inputs_rng[k].next());
      inputs[k].regressor = windows[k].values();
      inputs[k].measurement =
          measurement(truth, inputs[k].regressor, noise_rng[k].next());
    }
    const std::size_t row = static_cast<std::size_t>(i - 1) * n;
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      algorithms[a].run_round(inputs, i, observer);
      for (int k = 0; k < n; ++k) {
        result.sq_dev[a][row + k] =
            (truth - algorithms[a].estimate(k)).squaredNorm();
      }
    }
  }
  return result;
}

namespace {

void accumulate(std::vector<std::vector<double>>& total,
                const TrialResult& trial) {
  for (std::size_t a = 0; a < total.size(); ++a) {
    const std::vector<double>& src = trial.sq_dev[a];
    std::vector<double>& dst = total[a];
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

}  // namespace

SimulationResult run_monte_carlo(const Scenario& scenario, Execution execution,
                                 const RoundObserver* observer) {
  scenario.validate();
  if (execution == Execution::Parallel && observer != nullptr) {
    throw std::invalid_argument(
        "run_monte_carlo: observers require serial execution");
  }
  const int n = scenario.topology.node_count();
  SimulationResult result;
  result.node_count = n;
  result.iterations = scenario.iterations;
  result.change_iteration = scenario.ground_truth.flip_iteration();
  for (const AlgorithmSpec& spec : scenario.algorithms) {
    result.labels.push_back(spec.label);
    result.kinds.push_back(spec.kind);
  }
  result.mean_sq_dev.assign(
      scenario.algorithms.size(),
      std::vector<double>(static_cast<std::size_t>(scenario.iterations) * n,
                          0.0));

  if (execution == Execution::Serial) {
    for (int t = 0; t < scenario.trials; ++t) {
      const TrialResult trial = run_trial(scenario, t, observer);
      accumulate(result.mean_sq_dev, trial);
    }
  } else {
    // Trials are independent; the ordered merge keeps the accumulation
    // sequence identical to the serial path for any thread count.
#pragma omp parallel for ordered schedule(dynamic, 1)
    for (int t = 0; t < scenario.trials; ++t) {
      const TrialResult trial = run_trial(scenario, t, nullptr);
#pragma omp ordered
      accumulate(result.mean_sq_dev, trial);
    }
  }

  const double scale = 1.0 / scenario.trials;
  for (auto& series : result.mean_sq_dev) {
    for (double& value : series) value *= scale;
  }
  return result;
}

double to_decibel(double linear) {
  if (linear == 0.0) return -120.0;
  return 10.0 * std::log10(linear);
}

double msd_net(std::span<const double> node_mean_sq_dev) {
  if (node_mean_sq_dev.empty()) {
    throw std::invalid_argument("msd_net: at least one node required");
  }
  double sum = 0.0;
  for (double value : node_mean_sq_dev) sum += value;
  return to_decibel(sum / static_cast<double>(node_mean_sq_dev.size()));
}

std::vector<double> msd_net_curve(const SimulationResult& result,
                                  int algorithm) {
  const auto& series = result.mean_sq_dev.at(static_cast<std::size_t>(algorithm));
  std::vector<double> curve(static_cast<std::size_t>(result.iterations));
  for (int i = 0; i < result.iterations; ++i) {
    curve[static_cast<std::size_t>(i)] =
        msd_net(std::span<const double>(series).subspan(
            static_cast<std::size_t>(i) * result.node_count,
            static_cast<std::size_t>(result.node_count)));
  }
  return curve;
}

std::vector<double> steady_state_msd(const SimulationResult& result,
                                     int algorithm, int window,
                                     int segment_end) {
  if (window < 1 || segment_end < window || segment_end > result.iterations) {
    throw std::invalid_argument("steady_state_msd: window does not fit");
  }
  const auto& series = result.mean_sq_dev.at(static_cast<std::size_t>(algorithm));
  std::vector<double> tail(static_cast<std::size_t>(result.node_count), 0.0);
  for (int i = segment_end - window + 1; i <= segment_end; ++i) {
    const std::size_t row = static_cast<std::size_t>(i - 1) * result.node_count;
    for (int k = 0; k < result.node_count; ++k) {
      tail[static_cast<std::size_t>(k)] += series[row + k];
    }
  }
  for (double& value : tail) value = to_decibel(value / window);
  return tail;
}

double steady_state_msd_net(const SimulationResult& result, int algorithm,
                            int window, int segment_end) {
  if (window < 1 || segment_end < window || segment_end > result.iterations) {
    throw std::invalid_argument("steady_state_msd_net: window does not fit");
  }
  const auto& series = result.mean_sq_dev.at(static_cast<std::size_t>(algorithm));
  double sum = 0.0;
  for (int i = segment_end - window + 1; i <= segment_end; ++i) {
    const std::size_t row = static_cast<std::size_t>(i - 1) * result.node_count;
    for (int k = 0; k < result.node_count; ++k) sum += series[row + k];
  }
  return to_decibel(sum / (static_cast<double>(window) * result.node_count));
}

}  // namespace rdrls
