#ifndef ODCSA_EDT_HPP
#define ODCSA_EDT_HPP

#include <cstdint>
#include <vector>

namespace odcsa {

// Exact Euclidean distance transform of a binary mask (row-major h*w,
// nonzero = site). dist2 is the exact integer squared distance to the
// nearest site; site_row/site_col identify that site, with ties resolved
// toward the smallest row, then the smallest column. Cells that are sites
// have distance 0 and point at themselves. If the mask has no sites, dist2
// is -1 and the site indices are -1 everywhere.
struct DistanceField {
  int h = 0, w = 0;
  std::vector<std::int64_t> dist2;
  std::vector<int> site_row;
  std::vector<int> site_col;

  double dist(int y, int x) const;
};

DistanceField distance_transform(const std::vector<std::uint8_t>& mask, int h, int w);

}  // namespace odcsa

#endif
