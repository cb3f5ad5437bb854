#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <variant>
#include <vector>

#include "rdrls/rng.hpp"

namespace rdrls {

struct ImpulseNone {
  bool operator==(const ImpulseNone&) const = default;
};

/// Gaussian impulses gated by a Bernoulli occurrence process.
struct ImpulseBernoulliGaussian {
  double probability = 0.0;  // P[b = 1]
  double variance = 1.0;     // variance of the gating Gaussian
  bool operator==(const ImpulseBernoulliGaussian&) const = default;
};

/// Symmetric alpha-stable noise with characteristic function
/// exp(-dispersion * |t|^alpha).
struct ImpulseAlphaStable {
  double alpha = 1.15;
  double dispersion = 1.0 / 15.0;
  bool operator==(const ImpulseAlphaStable&) const = default;
};

using ImpulseModel =
    std::variant<ImpulseNone, ImpulseBernoulliGaussian, ImpulseAlphaStable>;

/// Per-node signal and noise configuration.
struct NodeSignalProfile {
  double ar_a1 = 1.6;
  double ar_a2 = -0.81;
  double innovation_variance = 1.0;   // white driving-noise variance
  double background_variance = 0.01;  // Gaussian background noise variance
  ImpulseModel impulse = ImpulseNone{};

  /// Throws std::invalid_argument on unstable AR coefficients or
  /// out-of-range noise parameters.
  void validate() const;
};

/// One step of the second-order autoregressive recursion
///   u(i) = a1 * u(i-1) + a2 * u(i-2) + innovation.
double ar2_next(double a1, double a2, double u_prev1, double u_prev2,
                double innovation);

/// Colored input generator; state starts at zero (u(i) = 0 for i < 0).
class Ar2Generator {
 public:
  Ar2Generator(double a1, double a2, double innovation_variance,
               Xoshiro256 rng);

  double next();

 private:
  double a1_;
  double a2_;
  double stddev_;
  double prev1_ = 0.0;
  double prev2_ = 0.0;
  Xoshiro256 rng_;
};

/// Shift-register regressor window, newest sample at index 0.
class RegressorWindow {
 public:
  explicit RegressorWindow(int length);

  void push(double sample);
  const Eigen::VectorXd& values() const { return values_; }
  int length() const { return static_cast<int>(values_.size()); }

 private:
  Eigen::VectorXd values_;
};

/// Unknown parameter vector with an optional mid-run sign flip.
/// Normalized to unit L2 norm on construction.
class GroundTruth {
 public:
  GroundTruth(Eigen::VectorXd coefficients, int flip_iteration);

  /// Drawn from a zero-mean uniform distribution and normalized.
  static GroundTruth random(int length, std::uint64_t seed,
                            int flip_iteration);

  /// The true vector in effect at 1-based iteration i.
  const Eigen::VectorXd& at(int iteration) const {
    return (flip_iteration_ > 0 && iteration > flip_iteration_) ? flipped_
                                                                : base_;
  }
  const Eigen::VectorXd& base() const { return base_; }
  int flip_iteration() const { return flip_iteration_; }
  int length() const { return static_cast<int>(base_.size()); }

 private:
  Eigen::VectorXd base_;
  Eigen::VectorXd flipped_;
  int flip_iteration_;  // 0 = never flips
};

/// b * g with P[b = 1] = probability and g zero-mean Gaussian of the given
/// variance. Always consumes one uniform and one Gaussian draw so the
/// stream position does not depend on the Bernoulli outcome.
double sample_bernoulli_gaussian(double probability, double variance,
                                 Xoshiro256& rng);

/// Symmetric alpha-stable sample via the trigonometric transform of a
/// uniform angle and an exponential variate; the dispersion enters as the
/// scale factor dispersion^(1/alpha). Exact for the symmetric case.
double sample_alpha_stable(double alpha, double dispersion, Xoshiro256& rng);

/// d = u' w + v. Throws on dimension mismatch.
double measurement(const Eigen::VectorXd& truth,
                   const Eigen::VectorXd& regressor, double noise);

/// Additive noise stream: background Gaussian plus the configured impulse
/// process. Fixed RNG consumption per call for every impulse model.
class NoiseGenerator {
 public:
  NoiseGenerator(const NodeSignalProfile& profile, Xoshiro256 rng);

  double next();

 private:
  double background_stddev_;
  ImpulseModel impulse_;
  Xoshiro256 rng_;
};

/// Autocovariance sequence r(0..count-1) of the stationary AR(2) process.
std::vector<double> ar2_autocovariance(double a1, double a2,
                                       double innovation_variance, int count);

/// Stationary variance of the AR(2) process (Yule-Walker closed form).
double ar2_stationary_variance(double a1, double a2,
                               double innovation_variance);

struct NominalPowers {
  double regressor = 0.0;     // per-tap variance of u
  double clean_output = 0.0;  // variance of u' w
  double measurement = 0.0;   // clean output plus background noise
};

/// Analytic signal powers of the stationary generator, excluding impulsive
/// contributions. Throws on unstable AR coefficients.
NominalPowers nominal_powers(const NodeSignalProfile& profile,
                             const Eigen::VectorXd& truth);

}  // namespace rdrls
