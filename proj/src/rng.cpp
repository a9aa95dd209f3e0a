#include "cogs/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cogs/errors.hpp"

namespace cogs {

int Rng::uniform_int(int n) {
  if (n <= 0) throw InvalidArgumentError("uniform_int: n must be positive");
  // Lemire's unbiased bounded generation.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  std::uint64_t x = gen_();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < bound) {
    const std::uint64_t threshold = (-bound) % bound;
    while (lo < threshold) {
      x = gen_();
      m = static_cast<__uint128_t>(x) * bound;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<int>(m >> 64);
}

double Rng::normal() {
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << gen_;
  return os.str();
}

Rng Rng::deserialize(const std::string& state) {
  Rng r(0);
  std::istringstream is(state);
  is >> r.gen_;
  if (is.fail()) throw ParseError("Rng::deserialize: malformed state string");
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t i0, std::uint64_t i1,
                          std::uint64_t i2) {
  std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a offset basis
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h = splitmix64(h ^ master);
  h = splitmix64(h ^ i0);
  h = splitmix64(h ^ i1);
  h = splitmix64(h ^ i2);
  return h;
}

} // namespace cogs
