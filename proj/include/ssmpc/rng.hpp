// Copyright 2026 The ssmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSMPC__RNG_HPP_
#define SSMPC__RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ssmpc
{

/// SplitMix64 finalizer. Used to derive independent per-episode seeds from a batch seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept
{
  return splitmix64(base ^ splitmix64(stream + 1));
}

/// Portable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the standard. The
/// standard distributions are not, so uniform and normal draws are implemented here:
/// uniform uses the top 53 bits, normal uses the Box-Muller transform (both outputs of
/// a pair are consumed in order).
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double standard_normal()
  {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 1 - U keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * standard_normal(); }

  bool bernoulli(double p) { return uniform01() < p; }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_{0.0};
  bool has_spare_{false};
};

}  // namespace ssmpc

#endif  // SSMPC__RNG_HPP_
