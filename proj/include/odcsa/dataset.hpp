#ifndef ODCSA_DATASET_HPP
#define ODCSA_DATASET_HPP

#include <string>
#include <vector>

#include "odcsa/prng.hpp"
#include "odcsa/tensor.hpp"

namespace odcsa {

struct Sample {
  std::string id;
  Tensor4 image;  // (1,3,H,W) in [0,1]
  Tensor4 mask;   // (1,1,H,W) binary
};

// Directory layout: images/<id>.ppm, masks/<id>.pgm, matched by stem.
std::vector<Sample> load_dataset(const std::string& dir);
void save_dataset(const std::vector<Sample>& samples, const std::string& dir);

// Bilinear for the image, nearest-neighbor for the mask (keeps it binary).
Sample resize_sample(const Sample& sample, int size);
Tensor4 resize_mask_nearest(const Tensor4& mask, int out_h, int out_w);

// Uniformly picks a scale, multiplies the base size and snaps to a multiple
// of 32 (>= 32). An exact halfway point snaps away from the unscaled base,
// keeping the three training scales distinct.
int multiscale_pick(Prng& prng, int base, const std::vector<double>& scales = {0.75, 1.0, 1.25});
int snap_to_32(double value, int base);

}  // namespace odcsa

#endif
