#ifndef ODCSA_COMMANDS_HPP
#define ODCSA_COMMANDS_HPP

#include <cstdint>
#include <string>

namespace odcsa {

// CLI entry points. Each returns a process exit code and reports problems on
// stderr as a single line.
int cmd_synth(const std::string& out_dir, int count, int size, std::uint64_t seed);
int cmd_train(const std::string& config_path);
int cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& report_path, const std::string& config_path);
int cmd_predict(const std::string& ckpt_path, const std::string& image_path,
                const std::string& out_path, const std::string& config_path);
int cmd_gradcheck(const std::string& block);
int cmd_flops(int size);
int cmd_config_dump(const std::string& config_path);

// RunLog location derived from the checkpoint path.
std::string runlog_path_for(const std::string& ckpt_path);

}  // namespace odcsa

#endif
