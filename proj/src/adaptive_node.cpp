#include "rdrls/adaptive_node.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdrls {

RlsCoreState RlsCoreState::initial(int length, double forgetting,
                                   double regularization) {
  if (length < 1) {
    throw std::invalid_argument("RlsCoreState: length must be positive");
  }
  if (!(forgetting > 0.0) || forgetting > 1.0) {
    throw std::invalid_argument("RlsCoreState: forgetting must be in (0, 1]");
  }
  if (!(regularization > 0.0)) {
    throw std::invalid_argument("RlsCoreState: regularization must be > 0");
  }
  RlsCoreState state;
  state.estimate = Eigen::VectorXd::Zero(length);
  state.forgetting = forgetting;
  state.regularization = regularization;
  state.inverse_correlation =
      Eigen::MatrixXd::Identity(length, length) / regularization;
  return state;
}

void RlsCoreState::reset_inverse_correlation() {
  const Eigen::Index m = estimate.size();
  inverse_correlation = Eigen::MatrixXd::Identity(m, m) / regularization;
}

Eigen::VectorXd rls_gain_update(RlsCoreState& state, const Eigen::VectorXd& u) {
  if (u.size() != state.estimate.size()) {
    throw std::invalid_argument("rls_gain_update: dimension mismatch");
  }
  if (!u.allFinite()) {
    throw std::invalid_argument("rls_gain_update: non-finite regressor");
  }
  const Eigen::VectorXd pu = state.inverse_correlation * u;
  const double denom = state.forgetting + u.dot(pu);
  state.inverse_correlation =
      (state.inverse_correlation - (pu * pu.transpose()) / denom) /
      state.forgetting;
  state.inverse_correlation =
      0.5 * (state.inverse_correlation +
             state.inverse_correlation.transpose().eval());
  return state.inverse_correlation * u;
}

RobustBoundState RobustBoundState::initial(double bound0, double forgetting) {
  if (!(bound0 > 0.0)) {
    throw std::invalid_argument("RobustBoundState: bound must be positive");
  }
  // beta = 1 freezes the bound, which is the plain-RLS reduction case.
  if (!(forgetting > 0.0) || forgetting > 1.0) {
    throw std::invalid_argument("RobustBoundState: forgetting must be in (0, 1]");
  }
  return RobustBoundState{bound0, bound0, forgetting};
}

double initial_bound(int energy_budget, double measurement_power,
                     double regressor_power, int filter_length) {
  if (energy_budget < 1) {
    throw std::invalid_argument("initial_bound: energy budget must be >= 1");
  }
  if (!(measurement_power > 0.0) || !(regressor_power > 0.0)) {
    throw std::invalid_argument("initial_bound: powers must be positive");
  }
  return energy_budget * measurement_power /
         (filter_length * regressor_power);
}

AdaptationOutcome constrained_update(const Eigen::VectorXd& estimate,
                                     const Eigen::VectorXd& gain, double error,
                                     double bound) {
  AdaptationOutcome outcome;
  const double gain_norm = gain.norm();
  const double magnitude = gain_norm * std::abs(error);
  outcome.error = error;
  outcome.gain_energy = magnitude * magnitude;
  outcome.scaling =
      magnitude > 0.0 ? std::min(std::sqrt(bound) / magnitude, 1.0) : 1.0;
  outcome.intermediate = estimate + outcome.scaling * error * gain;
  outcome.update_sq_norm = (outcome.intermediate - estimate).squaredNorm();
  return outcome;
}

AdaptationOutcome rdrls_adapt(RlsCoreState& state, double bound,
                              const Eigen::VectorXd& u, double d) {
  if (!(bound > 0.0)) {
    throw std::invalid_argument("rdrls_adapt: bound must be positive");
  }
  const double error = d - u.dot(state.estimate);
  const Eigen::VectorXd gain = rls_gain_update(state, u);
  return constrained_update(state.estimate, gain, error, bound);
}

AdaptationOutcome drls_adapt(RlsCoreState& state, const Eigen::VectorXd& u,
                             double d) {
  AdaptationOutcome outcome;
  const double error = d - u.dot(state.estimate);
  const Eigen::VectorXd gain = rls_gain_update(state, u);
  outcome.error = error;
  const double magnitude = gain.norm() * std::abs(error);
  outcome.gain_energy = magnitude * magnitude;
  outcome.intermediate = state.estimate + error * gain;
  outcome.update_sq_norm = outcome.gain_energy;
  return outcome;
}

double bound_local_update(double forgetting, double bound_prev,
                          double gain_energy) {
  return forgetting * bound_prev +
         (1.0 - forgetting) * std::min(gain_energy, bound_prev);
}

DncState DncState::create(int window_scale, int filter_length,
                          double threshold) {
  if (window_scale < 1 || filter_length < 1) {
    throw std::invalid_argument("DncState: window scale and length must be >= 1");
  }
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("DncState: threshold must be positive");
  }
  DncState state;
  state.window_length = window_scale * filter_length;
  if (state.window_length < 2) {
    throw std::invalid_argument("DncState: window must hold at least 2 errors");
  }
  // 0.75 of the window is trimmed, rounded; the trim count stays a positive
  // integer with at least one surviving entry.
  state.trim_count = static_cast<int>(std::lround(0.75 * state.window_length));
  state.trim_count = std::clamp(state.trim_count, 1, state.window_length - 1);
  state.threshold = threshold;
  state.buffer.assign(static_cast<std::size_t>(state.window_length), 0.0);
  return state;
}

void DncState::push_normalized_error(double value) {
  buffer[static_cast<std::size_t>(cursor)] = value;
  cursor = (cursor + 1) % window_length;
  filled = std::min(filled + 1, window_length);
}

bool DncState::checkpoint_due(int iteration) const {
  return iteration > 0 && iteration % window_length == 0;
}

double DncState::trimmed_mean() const {
  if (filled < window_length) {
    throw std::logic_error("DncState: trimmed mean before the window is full");
  }
  std::vector<double> sorted(buffer);
  std::sort(sorted.begin(), sorted.end());
  const int keep = window_length - trim_count;
  double sum = 0.0;
  for (int j = 0; j < keep; ++j) sum += sorted[static_cast<std::size_t>(j)];
  return sum / keep;
}

DncDecision dnc_step(DncState& dnc, RobustBoundState& bound,
                     RlsCoreState& rls, int iteration,
                     std::span<const double> neighbor_trimmed_means,
                     std::span<const double> weights, double zeta_local) {
  if (!dnc.checkpoint_due(iteration)) {
    throw std::logic_error("dnc_step: called off-schedule");
  }
  dnc.theta_new = combine(neighbor_trimmed_means, weights);
  const double delta = (dnc.theta_new - dnc.theta_old) / bound.bound;
  DncDecision decision;
  if (delta > dnc.threshold) {
    decision.zeta = bound.initial_bound;
    decision.reset = true;
    rls.reset_inverse_correlation();
  } else if (dnc.theta_new > dnc.theta_old) {
    decision.zeta = bound.bound + (dnc.theta_new - dnc.theta_old);
  } else {
    decision.zeta = zeta_local;
  }
  dnc.theta_old = dnc.theta_new;
  return decision;
}

SignErrorLmsState SignErrorLmsState::initial(int length, double step_size) {
  if (length < 1) {
    throw std::invalid_argument("SignErrorLmsState: length must be positive");
  }
  if (!(step_size > 0.0)) {
    throw std::invalid_argument("SignErrorLmsState: step size must be positive");
  }
  return SignErrorLmsState{Eigen::VectorXd::Zero(length), step_size};
}

Eigen::VectorXd selms_adapt(const SignErrorLmsState& state,
                            const Eigen::VectorXd& u, double d) {
  if (u.size() != state.estimate.size()) {
    throw std::invalid_argument("selms_adapt: dimension mismatch");
  }
  const double error = d - u.dot(state.estimate);
  const double sign = error > 0.0 ? 1.0 : (error < 0.0 ? -1.0 : 0.0);
  return state.estimate + state.step_size * sign * u;
}

Eigen::VectorXd combine(std::span<const Eigen::VectorXd> values,
                        std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty()) {
    throw std::invalid_argument("combine: weight/value count mismatch");
  }
  Eigen::VectorXd result = weights[0] * values[0];
  for (std::size_t m = 1; m < values.size(); ++m) {
    result += weights[m] * values[m];
  }
  return result;
}

double combine(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size() || values.empty()) {
    throw std::invalid_argument("combine: weight/value count mismatch");
  }
  double result = 0.0;
  for (std::size_t m = 0; m < values.size(); ++m) {
    result += weights[m] * values[m];
  }
  return result;
}

}  // namespace rdrls
