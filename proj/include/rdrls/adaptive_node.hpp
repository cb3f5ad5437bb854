#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

namespace rdrls {

/// Exponentially weighted RLS core: estimate w and inverse correlation P.
struct RlsCoreState {
  Eigen::VectorXd estimate;             // w
  Eigen::MatrixXd inverse_correlation;  // P, kept symmetric
  double forgetting = 0.995;            // lambda in (0, 1]
  double regularization = 0.01;         // delta > 0

  static RlsCoreState initial(int length, double forgetting,
                              double regularization);

  /// P back to its initial value (1/delta) I.
  void reset_inverse_correlation();
};

/// Rank-one inverse-correlation update followed by the gain g = P u, with P
/// re-symmetrized to stop floating-point drift. Returns the gain.
/// Throws on non-finite input.
Eigen::VectorXd rls_gain_update(RlsCoreState& state, const Eigen::VectorXd& u);

/// Time-varying ceiling on the squared norm of the adaptation update.
struct RobustBoundState {
  double bound = 0.0;          // current bound (yesterday's combined value)
  double initial_bound = 0.0;  // reset target
  double forgetting = 0.98;    // beta in (0, 1]; 1 freezes the bound

  static RobustBoundState initial(double bound0, double forgetting);
};

/// Initial bound: energy_budget * measurement_power / (M * regressor_power).
double initial_bound(int energy_budget, double measurement_power,
                     double regressor_power, int filter_length);

struct AdaptationOutcome {
  Eigen::VectorXd intermediate;  // psi
  double error = 0.0;            // e = d - u' w
  double scaling = 1.0;          // effective step scaling, in (0, 1]
  double gain_energy = 0.0;      // ||g||^2 e^2
  double update_sq_norm = 0.0;   // ||psi - w||^2
};

/// Norm-constrained update on top of the plain RLS direction:
///   psi = w + min(sqrt(bound) / (||g|| |e|), 1) g e.
/// The 0/0 case (||g|| |e| = 0) takes scaling 1; the update is the zero
/// vector either way. Guarantees ||psi - w||^2 <= bound.
AdaptationOutcome constrained_update(const Eigen::VectorXd& estimate,
                                     const Eigen::VectorXd& gain, double error,
                                     double bound);

/// Full adaptation of one node: error, gain update, constrained step.
/// Requires bound > 0. A non-finite measurement propagates through the
/// outcome as a diagnostic; the constraint itself is the defense against
/// large-but-finite impulses.
AdaptationOutcome rdrls_adapt(RlsCoreState& state, double bound,
                              const Eigen::VectorXd& u, double d);

/// Unconstrained RLS adaptation (plain diffusion RLS).
AdaptationOutcome drls_adapt(RlsCoreState& state, const Eigen::VectorXd& u,
                             double d);

/// Local pre-combination bound recursion:
///   zeta = beta * bound_prev + (1 - beta) * min(gain_energy, bound_prev).
double bound_local_update(double forgetting, double bound_prev,
                          double gain_energy);

/// Checkpointed, outlier-trimmed error-energy change detector. Holds the
/// last window_length normalized squared errors e^2 / ||u||^2.
struct DncState {
  int window_length = 0;  // checkpoint period, entries kept
  int trim_count = 0;     // largest entries discarded at a checkpoint
  double threshold = 0.0; // reset trigger on the normalized energy jump
  double theta_old = 0.0;
  double theta_new = 0.0;
  std::vector<double> buffer;  // ring buffer, filled_ entries valid
  int cursor = 0;
  int filled = 0;

  /// window_length = window_scale * filter_length, trim_count rounded from
  /// 0.75 * window_length with at least one surviving entry.
  static DncState create(int window_scale, int filter_length,
                         double threshold);

  void push_normalized_error(double value);

  /// True when iteration is a positive multiple of the window length (the
  /// buffer is full by then).
  bool checkpoint_due(int iteration) const;

  /// Mean of the smallest (window_length - trim_count) entries.
  double trimmed_mean() const;
};

struct DncDecision {
  double zeta = 0.0;   // pre-combination bound after the branch
  bool reset = false;  // inverse correlation was re-initialized
};

/// Checkpoint branch of the change detector. Combines the neighbors'
/// trimmed means into theta_new, compares against theta_old, and either
/// resets (bound back to its initial value, P re-initialized), inflates the
/// bound by the energy increase, or passes zeta_local through. Updates
/// theta_old. Throws std::logic_error when called off-schedule.
DncDecision dnc_step(DncState& dnc, RobustBoundState& bound,
                     RlsCoreState& rls, int iteration,
                     std::span<const double> neighbor_trimmed_means,
                     std::span<const double> weights, double zeta_local);

/// Sign-error LMS node state.
struct SignErrorLmsState {
  Eigen::VectorXd estimate;
  double step_size = 0.015;

  static SignErrorLmsState initial(int length, double step_size);
};

/// psi = w + mu * u * sign(d - u' w), with sign(0) = 0.
Eigen::VectorXd selms_adapt(const SignErrorLmsState& state,
                            const Eigen::VectorXd& u, double d);

/// Convex combination of neighbor vectors with one column of the
/// combination matrix. Throws on weight/value count mismatch.
Eigen::VectorXd combine(std::span<const Eigen::VectorXd> values,
                        std::span<const double> weights);
double combine(std::span<const double> values, std::span<const double> weights);

}  // namespace rdrls
