#ifndef IHUM_RANDOM_HPP
#define IHUM_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include "ihum/grid.hpp"

namespace ihum {

/// SplitMix64. Each draw advances the state by 0x9E3779B97F4A7C15 and returns
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z ^ (z >> 31)
/// with all arithmetic modulo 2^64. uniform() maps the top 53 bits to [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Independent uniform(-1, 1) entries, traces included.
inline State random_state(const Discretization& d, SplitMix64& rng) {
  State s(d.size());
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return s;
}

/// Smooth random profile sum_k c_k cos(k pi (x - a)/(b - a)) / (1 + k)^2 for
/// k = 0..modes-1 with c_k uniform(-1, 1); the traces are the endpoint values.
inline State smooth_random_state(const Discretization& d, SplitMix64& rng, int modes = 6) {
  const Grid& g = d.grid();
  std::vector<double> c(static_cast<std::size_t>(modes));
  for (double& ck : c) ck = rng.uniform(-1.0, 1.0);
  return d.sample([&](double x) {
    const double xi = (x - g.a()) / (g.b() - g.a());
    double v = 0.0;
    for (int k = 0; k < modes; ++k)
      v += c[static_cast<std::size_t>(k)] * std::cos(k * std::numbers::pi * xi) /
           ((1.0 + k) * (1.0 + k));
    return v;
  });
}

}  // namespace ihum

#endif  // IHUM_RANDOM_HPP
