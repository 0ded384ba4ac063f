#ifndef ODCSA_NETPBM_HPP
#define ODCSA_NETPBM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "odcsa/tensor.hpp"

namespace odcsa {

// Decoded netpbm payload: P6 (binary RGB), P5 (binary gray) or P2 (ASCII
// gray), maxval up to 255.
struct NetpbmImage {
  int kind = 0;  // 2, 5 or 6
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint8_t> bytes;  // h*w for gray, h*w*3 interleaved for RGB

  bool is_rgb() const { return kind == 6; }
};

// Parse failures report the byte offset of the problem.
NetpbmImage read_netpbm(const std::string& path);

// (1,3,H,W) values in [0,1].
Tensor4 image_from_netpbm(const NetpbmImage& img);

// (1,1,H,W) binarized at >= 128/maxval.
Tensor4 mask_from_netpbm(const NetpbmImage& img);

// Probability map in [0,1] -> 8-bit P5, rounded half up. Throws on values
// outside [0,1].
void write_pgm(const Tensor4& prob, const std::string& path);

// (1,3,H,W) values in [0,1] -> binary P6, rounded half up.
void write_ppm(const Tensor4& rgb, const std::string& path);

}  // namespace odcsa

#endif
