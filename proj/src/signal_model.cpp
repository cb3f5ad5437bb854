#include "rdrls/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdrls {

namespace {

bool ar2_stable(double a1, double a2) {
  // Stationarity triangle for u(i) = a1 u(i-1) + a2 u(i-2) + e(i).
  return std::abs(a2) < 1.0 && a1 + a2 < 1.0 && a2 - a1 < 1.0;
}

}  // namespace

void NodeSignalProfile::validate() const {
  if (!ar2_stable(ar_a1, ar_a2)) {
    throw std::invalid_argument("NodeSignalProfile: unstable AR coefficients");
  }
  if (!(innovation_variance > 0.0)) {
    throw std::invalid_argument(
        "NodeSignalProfile: innovation_variance must be positive");
  }
  if (!(background_variance > 0.0)) {
    throw std::invalid_argument(
        "NodeSignalProfile: background_variance must be positive");
  }
  if (const auto* bg = std::get_if<ImpulseBernoulliGaussian>(&impulse)) {
    if (bg->probability < 0.0 || bg->probability > 1.0) {
      throw std::invalid_argument(
          "NodeSignalProfile: impulse probability must be in [0, 1]");
    }
    if (!(bg->variance > 0.0)) {
      throw std::invalid_argument(
          "NodeSignalProfile: impulse variance must be positive");
    }
  } else if (const auto* as = std::get_if<ImpulseAlphaStable>(&impulse)) {
    if (!(as->alpha > 0.0) || as->alpha > 2.0) {
      throw std::invalid_argument(
          "NodeSignalProfile: alpha must be in (0, 2]");
    }
    if (!(as->dispersion > 0.0)) {
      throw std::invalid_argument(
          "NodeSignalProfile: dispersion must be positive");
    }
  }
}

double ar2_next(double a1, double a2, double u_prev1, double u_prev2,
                double innovation) {
  return a1 * u_prev1 + a2 * u_prev2 + innovation;
}

Ar2Generator::Ar2Generator(double a1, double a2, double innovation_variance,
                           Xoshiro256 rng)
    : a1_(a1), a2_(a2), stddev_(std::sqrt(innovation_variance)), rng_(rng) {}

double Ar2Generator::next() {
  const double sample =
      ar2_next(a1_, a2_, prev1_, prev2_, stddev_ * rng_.gaussian());
  prev2_ = prev1_;
  prev1_ = sample;
  return sample;
}

RegressorWindow::RegressorWindow(int length) {
  if (length < 1) {
    throw std::invalid_argument("RegressorWindow: length must be positive");
  }
  values_ = Eigen::VectorXd::Zero(length);
}

void RegressorWindow::push(double sample) {
  const int m = length();
  for (int j = m - 1; j > 0; --j) values_[j] = values_[j - 1];
  values_[0] = sample;
}

GroundTruth::GroundTruth(Eigen::VectorXd coefficients, int flip_iteration)
    : base_(std::move(coefficients)), flip_iteration_(flip_iteration) {
  const double norm = base_.norm();
  if (!(norm > 0.0)) {
    throw std::invalid_argument("GroundTruth: zero parameter vector");
  }
  base_ /= norm;
  flipped_ = -base_;
  if (flip_iteration_ < 0) {
    throw std::invalid_argument("GroundTruth: negative flip iteration");
  }
}

GroundTruth GroundTruth::random(int length, std::uint64_t seed,
                                int flip_iteration) {
  if (length < 1) {
    throw std::invalid_argument("GroundTruth: length must be positive");
  }
  Xoshiro256 rng(seed);
  Eigen::VectorXd w(length);
  do {
    for (int j = 0; j < length; ++j) w[j] = 2.0 * rng.uniform01() - 1.0;
  } while (!(w.norm() > 1e-6));
  return GroundTruth(std::move(w), flip_iteration);
}

double sample_bernoulli_gaussian(double probability, double variance,
                                 Xoshiro256& rng) {
  if (probability < 0.0 || probability > 1.0) {
    throw std::invalid_argument(
        "sample_bernoulli_gaussian: probability must be in [0, 1]");
  }
  if (!(variance > 0.0)) {
    throw std::invalid_argument(
        "sample_bernoulli_gaussian: variance must be positive");
  }
  const double occurrence = rng.uniform01() < probability ? 1.0 : 0.0;
  const double magnitude = std::sqrt(variance) * rng.gaussian();
  return occurrence * magnitude;
}

double sample_alpha_stable(double alpha, double dispersion, Xoshiro256& rng) {
  if (!(alpha > 0.0) || alpha > 2.0) {
    throw std::invalid_argument("sample_alpha_stable: alpha must be in (0, 2]");
  }
  if (!(dispersion > 0.0)) {
    throw std::invalid_argument(
        "sample_alpha_stable: dispersion must be positive");
  }
  // Chambers-Mallows-Stuck, symmetric case: a uniform angle on
  // (-pi/2, pi/2) and a unit exponential give a standard SaS variate.
  const double angle = std::numbers::pi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  double standard;
  if (alpha == 1.0) {
    standard = std::tan(angle);
  } else {
    const double scaled = alpha * angle;
    standard = std::sin(scaled) /
               std::pow(std::cos(angle), 1.0 / alpha) *
               std::pow(std::cos(angle - scaled) / w, (1.0 - alpha) / alpha);
  }
  return std::pow(dispersion, 1.0 / alpha) * standard;
}

double measurement(const Eigen::VectorXd& truth,
                   const Eigen::VectorXd& regressor, double noise) {
  if (truth.size() != regressor.size()) {
    throw std::invalid_argument("measurement: dimension mismatch");
  }
  return regressor.dot(truth) + noise;
}

NoiseGenerator::NoiseGenerator(const NodeSignalProfile& profile, Xoshiro256 rng)
    : background_stddev_(std::sqrt(profile.background_variance)),
      impulse_(profile.impulse),
      rng_(rng) {}

double NoiseGenerator::next() {
  double value = background_stddev_ * rng_.gaussian();
  if (const auto* bg = std::get_if<ImpulseBernoulliGaussian>(&impulse_)) {
    value += sample_bernoulli_gaussian(bg->probability, bg->variance, rng_);
  } else if (const auto* as = std::get_if<ImpulseAlphaStable>(&impulse_)) {
    value += sample_alpha_stable(as->alpha, as->dispersion, rng_);
  }
  return value;
}

double ar2_stationary_variance(double a1, double a2,
                               double innovation_variance) {
  if (!ar2_stable(a1, a2)) {
    throw std::invalid_argument(
        "ar2_stationary_variance: unstable AR coefficients");
  }
  return innovation_variance * (1.0 - a2) /
         ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
}

std::vector<double> ar2_autocovariance(double a1, double a2,
                                       double innovation_variance, int count) {
  if (count < 1) {
    throw std::invalid_argument("ar2_autocovariance: count must be positive");
  }
  std::vector<double> r(static_cast<std::size_t>(std::max(count, 2)));
  r[0] = ar2_stationary_variance(a1, a2, innovation_variance);
  r[1] = a1 / (1.0 - a2) * r[0];
  for (int tau = 2; tau < static_cast<int>(r.size()); ++tau) {
    r[tau] = a1 * r[tau - 1] + a2 * r[tau - 2];
  }
  r.resize(static_cast<std::size_t>(count));
  return r;
}

NominalPowers nominal_powers(const NodeSignalProfile& profile,
                             const Eigen::VectorXd& truth) {
  profile.validate();
  const int m = static_cast<int>(truth.size());
  const std::vector<double> r = ar2_autocovariance(
      profile.ar_a1, profile.ar_a2, profile.innovation_variance, m);
  NominalPowers powers;
  powers.regressor = r[0];
  // Var(u' w) from the regressor autocovariance; the shifted window makes
  // the regressor covariance Toeplitz in r.
  double variance = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < m; ++l) {
      variance += truth[j] * truth[l] * r[static_cast<std::size_t>(std::abs(j - l))];
    }
  }
  powers.clean_output = variance;
  powers.measurement = variance + profile.background_variance;
  return powers;
}

}  // namespace rdrls
