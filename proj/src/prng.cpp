#include "odcsa/prng.hpp"

#include <cmath>
#include <stdexcept>

namespace odcsa {

std::vector<double> he_uniform_init(Prng& prng, std::size_t fan_in, std::size_t count) {
  if (fan_in == 0) {
    throw std::invalid_argument("he_uniform_init: fan_in must be nonzero");
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<double> out(count);
  for (auto& v : out) v = prng.uniform(-bound, bound);
  return out;
}

}  // namespace odcsa
