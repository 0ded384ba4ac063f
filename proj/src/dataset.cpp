#include "odcsa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include "odcsa/netpbm.hpp"
#include "odcsa/ops.hpp"

namespace fs = std::filesystem;

namespace odcsa {

std::vector<Sample> load_dataset(const std::string& dir) {
  const fs::path images = fs::path(dir) / "images";
  const fs::path masks = fs::path(dir) / "masks";
  if (!fs::is_directory(images) || !fs::is_directory(masks)) {
    throw std::runtime_error(dir + ": expected images/ and masks/ subdirectories");
  }
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (entry.path().extension() == ".ppm") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    throw std::runtime_error(dir + ": no .ppm images found");
  }

  std::vector<Sample> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const fs::path mask_path = masks / (id + ".pgm");
    if (!fs::exists(mask_path)) {
      throw std::runtime_error(mask_path.string() + ": missing mask for image '" + id + "'");
    }
    Sample s;
    s.id = id;
    s.image = image_from_netpbm(read_netpbm((images / (id + ".ppm")).string()));
    s.mask = mask_from_netpbm(read_netpbm(mask_path.string()));
    if (s.image.h() != s.mask.h() || s.image.w() != s.mask.w()) {
      throw std::runtime_error(dir + ": image/mask size mismatch for '" + id + "'");
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset(const std::vector<Sample>& samples, const std::string& dir) {
  const fs::path images = fs::path(dir) / "images";
  const fs::path masks = fs::path(dir) / "masks";
  fs::create_directories(images);
  fs::create_directories(masks);
  for (const auto& s : samples) {
    write_ppm(s.image, (images / (s.id + ".ppm")).string());
    write_pgm(s.mask, (masks / (s.id + ".pgm")).string());
  }
}

Tensor4 resize_mask_nearest(const Tensor4& mask, int out_h, int out_w) {
  const int H = mask.h(), W = mask.w();
  Tensor4 out(Shape4{mask.n(), mask.c(), out_h, out_w});
  for (int in = 0; in < mask.n(); ++in) {
    for (int ic = 0; ic < mask.c(); ++ic) {
      for (int y = 0; y < out_h; ++y) {
        const int sy = std::clamp(static_cast<int>(std::floor((y + 0.5) * H / out_h)), 0, H - 1);
        for (int x = 0; x < out_w; ++x) {
          const int sx = std::clamp(static_cast<int>(std::floor((x + 0.5) * W / out_w)), 0, W - 1);
          out.at(in, ic, y, x) = mask.at(in, ic, sy, sx);
        }
      }
    }
  }
  return out;
}

Sample resize_sample(const Sample& sample, int size) {
  Sample out;
  out.id = sample.id;
  out.image = (sample.image.h() == size && sample.image.w() == size)
                  ? sample.image
                  : bilinear_resize(sample.image, size, size);
  out.mask = (sample.mask.h() == size && sample.mask.w() == size)
                 ? sample.mask
                 : resize_mask_nearest(sample.mask, size, size);
  return out;
}

int snap_to_32(double value, int base) {
  const int rounded = static_cast<int>(std::floor(value + 0.5));
  const int lo = (rounded / 32) * 32;
  const int rem = rounded - lo;
  int snapped;
  if (rem < 16) {
    snapped = lo;
  } else if (rem > 16) {
    snapped = lo + 32;
  } else {
    snapped = (rounded > base) ? lo + 32 : lo;  // halfway: move away from base
  }
  return std::max(32, snapped);
}

int multiscale_pick(Prng& prng, int base, const std::vector<double>& scales) {
  if (scales.empty()) {
    throw std::invalid_argument("multiscale_pick: no scales configured");
  }
  const double s = scales[static_cast<std::size_t>(prng.next_below(scales.size()))];
  return snap_to_32(base * s, base);
}

}  // namespace odcsa
