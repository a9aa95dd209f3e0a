#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace cogs {

/// Seeded random stream used everywhere randomness is needed.
///
/// Wraps std::mt19937_64 (whose output sequence is pinned by the standard)
/// and derives uniform/normal variates with fixed in-house formulas, so a
/// given seed produces identical streams on every platform. normal() draws
/// exactly two uniforms (Box-Muller without a cached spare), which keeps the
/// state fully captured by the engine alone.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased uniform integer in [0, n). Requires n > 0.
  int uniform_int(int n);

  /// Standard normal variate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::string serialize() const;
  static Rng deserialize(const std::string& state);

  bool operator==(const Rng& other) const { return gen_ == other.gen_; }

private:
  std::mt19937_64 gen_;
};

/// Deterministic seed derivation: mixes a master seed with a component label
/// and up to three indices. Every sub-stream in the project is derived this
/// way, so any intermediate result can be regenerated in isolation.
///
/// Formula: FNV-1a(64) over the label bytes, then splitmix64 applied to
/// (h ^ master) and once more per index.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                          std::uint64_t i2 = 0);

std::uint64_t splitmix64(std::uint64_t x);

} // namespace cogs
