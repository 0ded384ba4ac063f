#ifndef ODCSA_CONFIG_HPP
#define ODCSA_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "odcsa/net.hpp"

namespace odcsa {

// key=value run configuration; '#' starts a comment. Unknown keys are
// rejected.
struct Config {
  int size = 64;
  std::uint64_t seed = 1;
  int epochs = 100;
  int batch = 16;
  double lr = 1e-4;
  int lr_decay_every = 30;
  double lr_decay = 0.1;
  std::vector<double> scales = {0.75, 1.0, 1.25};
  std::string data_dir;
  std::string ckpt_path = "model.ckpt";
  AblationFlags ablation;
  double loss_weight_amp = 5.0;
  int loss_weight_window = 31;
};

Config parse_config_text(const std::string& text, const std::string& origin = "<config>");
Config parse_config_file(const std::string& path);
std::string dump_config(const Config& cfg);

}  // namespace odcsa

#endif
