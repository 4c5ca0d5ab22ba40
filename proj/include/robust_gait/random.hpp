#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace robust_gait
{

/// Seeded stream with portable draws. std::mt19937_64 output is fixed by the
/// standard; the distribution adaptors are not, so the transforms live here.
class RandomStream
{
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller (one draw per call, no caching).
  double normal()
  {
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t next_u64() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

} // namespace robust_gait
