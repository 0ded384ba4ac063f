#include "odcsa/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odcsa {

namespace {

struct Ellipse {
  double cx, cy;
  double a, b;
  double cos_t, sin_t;
  double bump[3];
};

double quantize8(double v) { return std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5) / 255.0; }

// 0 = area-fraction floor (small, corner-clipped), 1 = area-fraction
// ceiling (three large ellipses), otherwise fully random.
int regime_of(int base_index) {
  switch (base_index % 8) {
    case 0: return 0;
    case 1: return 1;
    default: return 2;
  }
}

Sample render(const SynthConfig& cfg, Prng& prng, int base_index, const std::string& id) {
  const int size = cfg.size;
  const double fsize = static_cast<double>(size);
  const int regime = regime_of(base_index);

  double base[3], gx[3], gy[3];
  for (int ch = 0; ch < 3; ++ch) {
    base[ch] = 0.30 + 0.25 * prng.next_double();
    gx[ch] = prng.uniform(-0.25, 0.25);
    gy[ch] = prng.uniform(-0.25, 0.25);
  }

  int n_ellipses;
  if (regime == 0) {
    n_ellipses = 1;
  } else if (regime == 1) {
    n_ellipses = cfg.max_ellipses;
  } else {
    n_ellipses = cfg.min_ellipses +
                 static_cast<int>(prng.next_below(
                     static_cast<std::uint64_t>(cfg.max_ellipses - cfg.min_ellipses + 1)));
  }

  std::vector<Ellipse> ellipses;
  for (int e = 0; e < n_ellipses; ++e) {
    Ellipse el;
    if (regime == 0) {
      // smallest admissible axes, center jittered onto a corner so most of
      // the ellipse falls outside the frame
      const int corner = static_cast<int>(prng.next_below(4));
      const double jx = prng.uniform(0.0, 1.5);
      const double jy = prng.uniform(0.0, 1.5);
      el.cx = (corner & 1) ? fsize - jx : jx;
      el.cy = (corner & 2) ? fsize - jy : jy;
      el.a = cfg.axis_min_frac * fsize * prng.uniform(1.0, 1.05);
      el.b = cfg.axis_min_frac * fsize * prng.uniform(1.0, 1.05);
    } else if (regime == 1) {
      el.cx = prng.uniform(0.3, 0.7) * fsize;
      el.cy = prng.uniform(0.3, 0.7) * fsize;
      el.a = prng.uniform(0.40, cfg.axis_max_frac) * fsize;
      el.b = prng.uniform(0.40, cfg.axis_max_frac) * fsize;
    } else {
      el.cx = prng.next_double() * fsize;
      el.cy = prng.next_double() * fsize;
      const double ua = prng.next_double();
      const double ub = prng.next_double();
      el.a = (cfg.axis_min_frac + (cfg.axis_max_frac - cfg.axis_min_frac) * ua * ua) * fsize;
      el.b = (cfg.axis_min_frac + (cfg.axis_max_frac - cfg.axis_min_frac) * ub * ub) * fsize;
    }
    el.a = std::max(2.0, el.a);
    el.b = std::max(2.0, el.b);
    const double theta = prng.uniform(0.0, std::numbers::pi);
    el.cos_t = std::cos(theta);
    el.sin_t = std::sin(theta);
    const double lift = prng.uniform(0.20, 0.45);
    for (int ch = 0; ch < 3; ++ch) el.bump[ch] = lift * prng.uniform(0.85, 1.15);
    ellipses.push_back(el);
  }

  Sample s;
  s.id = id;
  s.image = Tensor4(Shape4{1, 3, size, size});
  s.mask = Tensor4(Shape4{1, 1, size, size});

  for (int ch = 0; ch < 3; ++ch) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double v = base[ch] + gx[ch] * (x / fsize) + gy[ch] * (y / fsize) +
                   cfg.noise_amp * (2.0 * prng.next_double() - 1.0);
        for (const auto& el : ellipses) {
          const double px = (x + 0.5) - el.cx;
          const double py = (y + 0.5) - el.cy;
          const double rx = px * el.cos_t + py * el.sin_t;
          const double ry = -px * el.sin_t + py * el.cos_t;
          const double q = (rx / el.a) * (rx / el.a) + (ry / el.b) * (ry / el.b);
          const double sharpness = std::min(el.a, el.b) / std::max(cfg.blur_radius, 1e-6);
          const double alpha = 1.0 / (1.0 + std::exp(-(1.0 - q) * sharpness));
          v += alpha * el.bump[ch];
          if (ch == 0 && q <= 1.0) s.mask.at(0, 0, y, x) = 1.0;
        }
        s.image.at(0, ch, y, x) = quantize8(v);
      }
    }
  }
  return s;
}

}  // namespace

std::vector<Sample> synth_generate(const SynthConfig& cfg) {
  if (cfg.size < 32 || cfg.size % 32 != 0) {
    throw std::invalid_argument("synth_generate: size must be a multiple of 32");
  }
  if (cfg.count < 1) {
    throw std::invalid_argument("synth_generate: count must be >= 1");
  }
  if (cfg.min_ellipses < 1 || cfg.max_ellipses < cfg.min_ellipses) {
    throw std::invalid_argument("synth_generate: bad ellipse count range");
  }

  Prng prng(cfg.seed);
  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  char buf[32];
  for (int k = 0; k < cfg.count; ++k) {
    const int base_index = k / 2;
    if (k % 2 == 0) {
      std::snprintf(buf, sizeof(buf), "s%04da", base_index);
      out.push_back(render(cfg, prng, base_index, buf));
      if (out.back().mask.vec() == std::vector<double>(out.back().mask.numel(), 0.0)) {
        throw std::logic_error("synth_generate: produced an empty mask");
      }
    } else {
      std::snprintf(buf, sizeof(buf), "s%04db", base_index);
      out.push_back(rot90_sample(out.back(), buf));
    }
  }
  return out;
}

Tensor4 rot90cw(const Tensor4& t) {
  Tensor4 out(Shape4{t.n(), t.c(), t.w(), t.h()});
  for (int in = 0; in < t.n(); ++in) {
    for (int ic = 0; ic < t.c(); ++ic) {
      for (int y = 0; y < out.h(); ++y) {
        for (int x = 0; x < out.w(); ++x) {
          out.at(in, ic, y, x) = t.at(in, ic, t.h() - 1 - x, y);
        }
      }
    }
  }
  return out;
}

Sample rot90_sample(const Sample& s, const std::string& id) {
  Sample r;
  r.id = id;
  r.image = rot90cw(s.image);
  r.mask = rot90cw(s.mask);
  return r;
}

}  // namespace odcsa
