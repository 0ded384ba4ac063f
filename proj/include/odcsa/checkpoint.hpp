#ifndef ODCSA_CHECKPOINT_HPP
#define ODCSA_CHECKPOINT_HPP

#include <string>
#include <vector>

#include "odcsa/net.hpp"

namespace odcsa {

// Binary checkpoint: magic "ODCSA1\n", then little-endian u32 tensor count;
// per tensor u16 name length, name bytes, u8 rank, u32 dims, and a 32-bit
// float payload.
void save_checkpoint(OdcSaNet& net, const std::string& path);
void load_checkpoint(OdcSaNet& net, const std::string& path);

// Tensor names stored in a checkpoint, in file order.
std::vector<std::string> checkpoint_tensor_names(const std::string& path);

// Structural flags recovered from the stored tensor names.
AblationFlags flags_from_checkpoint(const std::string& path);

}  // namespace odcsa

#endif
