#include "odcsa/edt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace odcsa {

double DistanceField::dist(int y, int x) const {
  const std::int64_t d2 = dist2[static_cast<std::size_t>(y) * w + x];
  if (d2 < 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(static_cast<double>(d2));
}

DistanceField distance_transform(const std::vector<std::uint8_t>& mask, int h, int w) {
  if (static_cast<std::size_t>(h) * w != mask.size()) {
    throw std::invalid_argument("distance_transform: mask size does not match h*w");
  }
  DistanceField field;
  field.h = h;
  field.w = w;
  field.dist2.assign(mask.size(), -1);
  field.site_row.assign(mask.size(), -1);
  field.site_col.assign(mask.size(), -1);

  constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  // Column pass: nearest site row per column, ties toward the smaller row.
  std::vector<std::int64_t> col_d2(mask.size(), kInf);
  std::vector<int> col_row(mask.size(), -1);
  for (int x = 0; x < w; ++x) {
    int last = -1;
    for (int y = 0; y < h; ++y) {
      if (mask[static_cast<std::size_t>(y) * w + x]) last = y;
      if (last >= 0) {
        const std::int64_t d = y - last;
        col_d2[static_cast<std::size_t>(y) * w + x] = d * d;
        col_row[static_cast<std::size_t>(y) * w + x] = last;
      }
    }
    int next = -1;
    for (int y = h - 1; y >= 0; --y) {
      if (mask[static_cast<std::size_t>(y) * w + x]) next = y;
      if (next >= 0) {
        const std::int64_t d = next - y;
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (d * d < col_d2[i]) {  // equal distance keeps the smaller row
          col_d2[i] = d * d;
          col_row[i] = next;
        }
      }
    }
  }

  // Row pass: lower envelope of the column parabolas.
  std::vector<int> hull(static_cast<std::size_t>(w));
  std::vector<double> breaks(static_cast<std::size_t>(w) + 1);
  for (int y = 0; y < h; ++y) {
    const std::int64_t* f = col_d2.data() + static_cast<std::size_t>(y) * w;
    int k = -1;
    for (int q = 0; q < w; ++q) {
      if (f[q] >= kInf) continue;
      double s = 0.0;
      while (k >= 0) {
        const int p = hull[static_cast<std::size_t>(k)];
        s = (static_cast<double>(f[q] - f[p]) + static_cast<double>(q) * q -
             static_cast<double>(p) * p) /
            (2.0 * (q - p));
        if (s <= breaks[static_cast<std::size_t>(k)]) {
          --k;
        } else {
          break;
        }
      }
      ++k;
      hull[static_cast<std::size_t>(k)] = q;
      breaks[static_cast<std::size_t>(k)] = (k == 0) ? -std::numeric_limits<double>::infinity() : s;
      breaks[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    if (k < 0) continue;  // empty mask: every field entry stays -1

    int seg = 0;
    for (int x = 0; x < w; ++x) {
      while (breaks[static_cast<std::size_t>(seg) + 1] < x) ++seg;
      const int q = hull[static_cast<std::size_t>(seg)];
      const std::int64_t dx = x - q;
      field.dist2[static_cast<std::size_t>(y) * w + x] = dx * dx + f[q];
    }

    // Canonical site among equidistant candidates: smallest row, then column.
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const std::int64_t best = field.dist2[i];
      int br = -1, bc = -1;
      for (int q = 0; q < w; ++q) {
        if (f[q] >= kInf) continue;
        const std::int64_t dx = x - q;
        if (dx * dx + f[q] != best) continue;
        const int r = col_row[static_cast<std::size_t>(y) * w + q];
        if (br < 0 || r < br || (r == br && q < bc)) {
          br = r;
          bc = q;
        }
      }
      field.site_row[i] = br;
      field.site_col[i] = bc;
    }
  }
  return field;
}

}  // namespace odcsa
