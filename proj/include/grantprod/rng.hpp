#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace grantprod {

// Deterministic RNG helpers. All draws go through explicit arithmetic so
// that results do not depend on the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n), unbiased via rejection.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform_index(static_cast<std::size_t>(hi - lo + 1)));
  }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // Derive an independent stream; stable across call sites.
  Rng split(std::uint64_t salt) const {
    return Rng(seed_mix_ ^ (salt * 0x9e3779b97f4a7c15ull + 0x1234567ull));
  }

 private:
  explicit Rng(std::uint64_t seed, int)
      : engine_(seed) {}

  std::mt19937_64 engine_;
  std::uint64_t seed_mix_ = engine_();
};

}  // namespace grantprod
