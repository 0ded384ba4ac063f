#ifndef ODCSA_SYNTH_HPP
#define ODCSA_SYNTH_HPP

#include <cstdint>

#include "odcsa/dataset.hpp"

namespace odcsa {

// Synthetic polyp-like scenes: a textured background (low-frequency gradient
// plus seeded noise) with 1-3 filled rotated ellipses of elevated intensity
// and soft borders; the mask is the exact union of the ellipses. Samples are
// emitted in rotated pairs ("<stem>a", "<stem>b" = 90-degree twin) so
// direction consistency can be evaluated. Base samples are stratified so a
// set of a few dozen covers both area-fraction extremes.
struct SynthConfig {
  int count = 16;  // total samples, pairs included
  int size = 64;   // multiple of 32
  std::uint64_t seed = 1;
  int min_ellipses = 1;
  int max_ellipses = 3;
  double axis_min_frac = 0.06;
  double axis_max_frac = 0.45;
  double blur_radius = 1.5;  // boundary softness in pixels
  double noise_amp = 0.05;
};

std::vector<Sample> synth_generate(const SynthConfig& cfg);

// Clockwise quarter turn: out(y, x) = in(h-1-x, y).
Tensor4 rot90cw(const Tensor4& t);
Sample rot90_sample(const Sample& s, const std::string& id);

}  // namespace odcsa

#endif
