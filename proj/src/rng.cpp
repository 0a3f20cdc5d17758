#include "ccf/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ccf/errors.hpp"

namespace ccf {

Rng::Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw ValidationError("Rng::index requires n > 0");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return static_cast<std::size_t>(r % n);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(theta);
  has_spare_ = true;
  return radius * std::cos(theta);
}

std::string Rng::serialize() const {
  std::ostringstream out;
  out << seed_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << std::bit_cast<std::uint64_t>(spare_) << ' '
      << engine_;
  return out.str();
}

Rng Rng::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::uint64_t seed = 0;
  int spare_flag = 0;
  std::uint64_t spare_bits = 0;
  in >> seed >> spare_flag >> spare_bits;
  Rng rng(seed);
  in >> rng.engine_;
  if (!in) throw FormatError("malformed rng state");
  rng.has_spare_ = spare_flag != 0;
  rng.spare_ = std::bit_cast<double>(spare_bits);
  return rng;
}

bool operator==(const Rng& a, const Rng& b) {
  return a.seed_ == b.seed_ && a.engine_ == b.engine_ && a.has_spare_ == b.has_spare_ &&
         std::bit_cast<std::uint64_t>(a.spare_) == std::bit_cast<std::uint64_t>(b.spare_);
}

}  // namespace ccf
