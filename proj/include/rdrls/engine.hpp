#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdrls/adaptive_node.hpp"
#include "rdrls/signal_model.hpp"
#include "rdrls/topology.hpp"

namespace rdrls {

enum class AlgorithmKind { Drls, Rdrls, RdrlsDnc, SignErrorLms };

/// One algorithm instance in a scenario. Non-cooperating instances use the
/// identity combination matrix (independent single-agent estimation).
struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::Rdrls;
  bool cooperate = true;
  std::string label = "rdrls";
  double forgetting = 0.995;       // RLS forgetting factor
  double regularization = 0.01;    // RLS regularization
  double bound_forgetting = 0.98;  // bound recursion forgetting factor
  int energy_budget = 1;           // initial-bound multiplier
  double bound_init_override = 0.0;  // > 0 replaces the analytic initial bound
  int window_scale = 3;            // detector window = scale * filter length
  double reset_threshold = 25.0;   // detector reset trigger
  double step_size = 0.015;        // sign-error LMS step

  bool is_robust() const {
    return kind == AlgorithmKind::Rdrls || kind == AlgorithmKind::RdrlsDnc;
  }
};

/// Full experiment description consumed by the engine.
struct Scenario {
  Topology topology;
  std::vector<NodeSignalProfile> profiles;  // one per node
  GroundTruth ground_truth;                 // carries the flip schedule
  int filter_length = 16;
  int iterations = 0;
  int trials = 0;
  std::uint64_t master_seed = 1;
  std::vector<AlgorithmSpec> algorithms;

  void validate() const;
};

/// Signals observed by one node in one round.
struct NodeInput {
  Eigen::VectorXd regressor;
  double measurement = 0.0;
};

/// Instrumentation record. Phase 1 events report the adaptation
/// (update_sq_norm, the bound it was checked against, the step scaling);
/// phase 2 events report the freshly combined bound.
struct RoundEvent {
  int algorithm = 0;
  int node = 0;
  int iteration = 0;
  int phase = 0;
  double update_sq_norm = 0.0;
  double bound = 0.0;  // phase 1: bound before adaptation; phase 2: combined
  double scaling = 0.0;
};
using RoundObserver = std::function<void(const RoundEvent&)>;

/// All per-node state of one algorithm instance, plus the staging buffers
/// that realize the two-phase (adapt, then combine) round.
class AlgorithmRunState {
 public:
  AlgorithmRunState(AlgorithmSpec spec, int algorithm_index,
                    const Topology& topology, int filter_length,
                    std::span<const double> initial_bounds,
                    const CombinationMatrix& diffusion_weights);

  /// One synchronous round: every node adapts on its own input, then
  /// combines the neighborhood's published intermediates. Phase 2 never
  /// reads a phase 1 output produced after phase 2 began: intermediates go
  /// through staging buffers written before any combination starts.
  void run_round(std::span<const NodeInput> inputs, int iteration,
                 const RoundObserver* observer);

  const Eigen::VectorXd& estimate(int node) const;
  double bound(int node) const;  // current combined bound (robust kinds)
  const AlgorithmSpec& spec() const { return spec_; }

 private:
  void adapt_phase(std::span<const NodeInput> inputs, int iteration,
                   const RoundObserver* observer);
  void detector_checkpoint(int iteration);
  void combine_phase(int iteration, const RoundObserver* observer);

  AlgorithmSpec spec_;
  int algorithm_index_;
  const Topology* topology_;
  CombinationMatrix weights_;
  int node_count_;

  std::vector<RlsCoreState> rls_;
  std::vector<RobustBoundState> bounds_;
  std::vector<DncState> detectors_;
  std::vector<SignErrorLmsState> lms_;

  std::vector<Eigen::VectorXd> intermediates_;
  std::vector<double> zetas_;
  std::vector<double> trimmed_means_;
  // combine scratch
  std::vector<Eigen::VectorXd> neighbor_vectors_;
  std::vector<double> neighbor_scalars_;
  std::vector<double> neighbor_weights_;
};

/// Squared deviations ||w_true - w_k||^2 for one trial:
/// sq_dev[algorithm][(iteration - 1) * N + node].
struct TrialResult {
  std::vector<std::vector<double>> sq_dev;
};

/// Runs all iterations of one trial. Deterministic for a given
/// (master_seed, trial_index); all algorithms consume the identical
/// regressor/noise streams. Non-finite state propagates into the recorded
/// deviations as a divergence marker.
TrialResult run_trial(const Scenario& scenario, int trial_index,
                      const RoundObserver* observer = nullptr);

/// Trial-averaged squared deviations plus scenario metadata.
struct SimulationResult {
  int node_count = 0;
  int iterations = 0;
  int change_iteration = 0;  // 0 = no change scheduled
  std::vector<std::string> labels;
  std::vector<AlgorithmKind> kinds;
  std::vector<std::vector<double>> mean_sq_dev;  // [alg][(i-1)*N + node]
};

enum class Execution { Serial, Parallel };

/// Monte-Carlo runner. The parallel path distributes trials across OpenMP
/// threads and merges per-trial results in trial order, so serial and
/// parallel execution produce identical aggregates. An observer is only
/// supported on the serial path.
SimulationResult run_monte_carlo(const Scenario& scenario, Execution execution,
                                 const RoundObserver* observer = nullptr);

/// 10 log10(x) with a -120 dB floor for exact-zero deviations. Non-finite
/// values propagate unchanged (divergence is recorded, not masked).
double to_decibel(double linear);

/// Node-averaged deviation in dB for one iteration.
double msd_net(std::span<const double> node_mean_sq_dev);

/// Network learning curve in dB, one value per iteration.
std::vector<double> msd_net_curve(const SimulationResult& result,
                                  int algorithm);

/// Per-node tail average (linear, then dB) over the window ending at
/// segment_end (1-based iteration). Throws when the window does not fit.
std::vector<double> steady_state_msd(const SimulationResult& result,
                                     int algorithm, int window,
                                     int segment_end);

/// Network steady state: node- and tail-averaged deviation in dB.
double steady_state_msd_net(const SimulationResult& result, int algorithm,
                            int window, int segment_end);

}  // namespace rdrls
