#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace hcae {

// splitmix64 finalizer; used both as a mixer and for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives a child seed from a root seed, a stream tag and an index.
// All randomness in the artifact flows from a single top-level seed
// through this function, so runs are reproducible and parallelizable:
//   subject i  -> derive_seed(seed, "subject", i)
//   split run r-> derive_seed(seed, "run", r)
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                          std::uint64_t index);

// Deterministic generator. Hand-rolled distributions (no std::*_distribution)
// so sequences do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dull)) {
    // warm up once so nearby seeds decorrelate
    next_u64();
  }

  std::uint64_t next_u64() {
    // xorshift* over splitmix-initialized state
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545f4914f6cdd1dull;
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // uniform integer in [0, n)
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hcae
