#ifndef ODCSA_PRNG_HPP
#define ODCSA_PRNG_HPP

#include <cstdint>
#include <vector>

namespace odcsa {

// SplitMix64. Fixed algorithm so that a given seed yields the same draw
// sequence on every platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [0, n)
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  // Fisher-Yates
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// He-uniform initialization: values in (-b, b) with b = sqrt(6 / fan_in).
// Throws on fan_in == 0.
std::vector<double> he_uniform_init(Prng& prng, std::size_t fan_in, std::size_t count);

}  // namespace odcsa

#endif
