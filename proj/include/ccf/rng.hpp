#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace ccf {

// Seeded random source whose streams are reproducible across platforms:
// std::mt19937_64 is fully specified by the standard, and every derived
// distribution below is computed here rather than by <random>'s
// implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  // Text form of the full generator state, including the cached normal.
  std::string serialize() const;
  static Rng deserialize(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ccf
