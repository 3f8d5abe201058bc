#pragma once

#include <cstdint>
#include <random>

namespace emiscan::rng {

// splitmix64 finalizer; used to derive independent per-pixel / per-point
// seeds from the master seed so parallel execution order cannot change
// any result.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a) {
  return mix(seed ^ mix(a));
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive(derive(seed, a), b);
}

// Deterministic gaussian stream for a derived seed.
class Gaussian {
public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return dist_(engine_); }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

} // namespace emiscan::rng
