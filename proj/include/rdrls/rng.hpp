#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rdrls {

/// splitmix64 step; used for seed expansion and stream derivation.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ with explicitly defined sampling primitives, so that every
/// stream is bit-reproducible independent of the standard library.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64_next(s);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on the open interval (0,1); safe as a log/division argument.
  double uniform_open() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Standard normal via the trigonometric Box-Muller transform.
  /// Consumes exactly two words per call, keeping the stream position a
  /// fixed function of the call count.
  double gaussian() {
    const double u1 = uniform_open();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  /// Exponential(1); one word per call.
  double exponential() { return -std::log(uniform_open()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Stream-splitting rule: feed master seed, trial index, node index, and a
/// stream tag through successive splitmix64 steps. Every (master, trial,
/// node, tag) tuple names one independent, reproducible stream.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t trial,
                                        std::uint64_t node, std::uint64_t tag) {
  std::uint64_t s = master;
  std::uint64_t h = splitmix64_next(s);
  s ^= h + 0x9e3779b97f4a7c15ULL * (trial + 1);
  h = splitmix64_next(s);
  s ^= h + 0x9e3779b97f4a7c15ULL * (node + 1);
  h = splitmix64_next(s);
  s ^= h + 0x9e3779b97f4a7c15ULL * (tag + 1);
  return splitmix64_next(s);
}

}  // namespace rdrls
