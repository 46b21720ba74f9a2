#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace loca {

// Derives an independent substream seed from a master seed and a tag tuple
// (splitmix64 absorption). Used to give every Monte Carlo trial its own
// stream so that aggregation is independent of scheduling order.
std::uint64_t mix_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags);

// Seeded random source. Distribution mappings are implemented explicitly so
// that streams are reproducible independent of the standard library's
// distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (polar form avoided to keep draw count fixed).
  double gaussian();
  double gaussian(double mu, double sd) { return mu + sd * gaussian(); }

  // Chi-square with k degrees of freedom; k = 2 uses the exponential shortcut.
  double chi_square(int dof);

  // Uniform integer in {0, ..., n-1}, n >= 1.
  std::int64_t uniform_index(std::int64_t n);

  // k distinct indices sampled uniformly from {0, ..., n-1} (partial Fisher-Yates).
  std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t k);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace loca
