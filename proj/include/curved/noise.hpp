#pragma once

// Deterministic, per-trial Gaussian streams.  Each Monte Carlo trial owns a
// NoiseSource seeded from (master seed, stream id), so ensembles are
// reproducible for a fixed seed and independent of scheduling or trial order.

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace curved::sde {

class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed & 0xffffffffu),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id & 0xffffffffu),
        static_cast<std::uint32_t>(stream_id >> 32),
    };
    eng_.seed(seq);
  }

  double normal() { return n01_(eng_); }

  // Pair of independent N(0, dt) increments.
  Eigen::Vector2d normal2(double dt) {
    const double s = std::sqrt(dt);
    return {s * n01_(eng_), s * n01_(eng_)};
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 eng_;
  std::normal_distribution<double> n01_{0.0, 1.0};
};

}  // namespace curved::sde
