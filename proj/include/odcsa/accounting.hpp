#ifndef ODCSA_ACCOUNTING_HPP
#define ODCSA_ACCOUNTING_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "odcsa/net.hpp"

namespace odcsa {

struct BlockCost {
  std::string name;
  std::size_t params = 0;
  std::size_t macs = 0;  // convolution multiply-accumulates at the given input size
};

struct CostReport {
  int input_size = 0;
  std::vector<BlockCost> blocks;
  // Orthogonal rectangular branches versus a dense three-layer 3x3 stack at
  // the same channel count: 18*C^2 vs 27*C^2 kernel weights.
  int odc_channels = 0;
  std::size_t odc_branch_weights = 0;
  std::size_t dense3x3_weights = 0;

  std::size_t total_params() const;
  std::size_t total_macs() const;
  double branch_ratio() const {
    return static_cast<double>(odc_branch_weights) / static_cast<double>(dense3x3_weights);
  }
};

CostReport count_params_flops(const OdcSaNet& net, int input_size);
std::string format_cost_table(const CostReport& report);

}  // namespace odcsa

#endif
