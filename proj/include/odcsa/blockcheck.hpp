#ifndef ODCSA_BLOCKCHECK_HPP
#define ODCSA_BLOCKCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace odcsa {

struct BlockCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Names accepted by run_block_gradcheck, in run order.
std::vector<std::string> gradcheck_block_names();

// Finite-difference check of one named block on seeded random inputs;
// pass means max relative error < 1e-4.
BlockCheckResult run_block_gradcheck(const std::string& name, std::uint64_t seed = 7);

std::vector<BlockCheckResult> run_block_gradchecks(const std::string& which,
                                                   std::uint64_t seed = 7);

}  // namespace odcsa

#endif
