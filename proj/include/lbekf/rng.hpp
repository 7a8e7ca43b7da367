#pragma once

#include <cstdint>
#include <cmath>
#include <cstddef>
#include <random>

namespace lbekf {

// SplitMix64 finalizer. Used to derive independent stream seeds from a master
// seed and a stream index.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

// Seedable, splittable generator. `split(i)` yields a child whose stream depends
// only on this generator's seed and `i`, never on how much of the parent has
// been consumed, so trial results are independent of scheduling.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  Rng split(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

  std::uint64_t seed() const noexcept { return seed_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(*this); }

  // Zero-mean Gaussian with the given variance; variance 0 returns exactly 0.
  double gaussian(double variance) {
    if (variance <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, std::sqrt(variance))(*this);
  }

  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(*this);
  }

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(*this);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace lbekf
