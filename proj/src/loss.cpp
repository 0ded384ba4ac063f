#include "odcsa/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "odcsa/ops.hpp"

namespace odcsa {

namespace {

constexpr double kProbLo = 1e-7;
constexpr double kProbHi = 1.0 - 1e-7;

double stable_sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

void check_binary(const Tensor4& gt, const char* where) {
  for (double v : gt.vec()) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument(std::string(where) + ": mask must be strictly binary");
    }
  }
}

void check_same_shape(const Tensor4& a, const Tensor4& b, const char* where) {
  if (!(a.shape() == b.shape())) {
    throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape().str() +
                                " vs " + b.shape().str());
  }
}

}  // namespace

Tensor4 weight_map(const Tensor4& gt, const WeightMapParams& params) {
  check_binary(gt, "weight_map");
  if (params.window < 1 || params.window % 2 == 0) {
    throw std::invalid_argument("weight_map: window must be a positive odd size");
  }
  const int N = gt.n(), C = gt.c(), H = gt.h(), W = gt.w();
  const int r = params.window / 2;
  const double denom = static_cast<double>(params.window) * params.window;
  Tensor4 out(gt.shape());

  // Clipped-window box sums via a summed-area table; zero padding stays in
  // the denominator.
  std::vector<double> sat(static_cast<std::size_t>(H + 1) * (W + 1), 0.0);
  for (int nc = 0; nc < N * C; ++nc) {
    const double* g = gt.data() + static_cast<std::size_t>(nc) * H * W;
    double* o = out.data() + static_cast<std::size_t>(nc) * H * W;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        sat[(y + 1) * static_cast<std::size_t>(W + 1) + (x + 1)] =
            g[y * W + x] + sat[y * static_cast<std::size_t>(W + 1) + (x + 1)] +
            sat[(y + 1) * static_cast<std::size_t>(W + 1) + x] -
            sat[y * static_cast<std::size_t>(W + 1) + x];
      }
    }
    for (int y = 0; y < H; ++y) {
      const int y0 = std::max(0, y - r), y1 = std::min(H - 1, y + r);
      for (int x = 0; x < W; ++x) {
        const int x0 = std::max(0, x - r), x1 = std::min(W - 1, x + r);
        const double box = sat[(y1 + 1) * static_cast<std::size_t>(W + 1) + (x1 + 1)] -
                           sat[y0 * static_cast<std::size_t>(W + 1) + (x1 + 1)] -
                           sat[(y1 + 1) * static_cast<std::size_t>(W + 1) + x0] +
                           sat[y0 * static_cast<std::size_t>(W + 1) + x0];
        o[y * W + x] = 1.0 + params.amplitude * std::abs(box / denom - g[y * W + x]);
      }
    }
  }
  return out;
}

Tensor4 weighted_bce(const Tensor4& logits, const Tensor4& gt, const Tensor4& w, Tape* tape) {
  check_same_shape(logits, gt, "weighted_bce");
  check_same_shape(logits, w, "weighted_bce");
  const int N = logits.n();
  const std::size_t per_image = logits.numel() / static_cast<std::size_t>(N);

  Tensor4 out(Shape4{1, 1, 1, 1});
  double total = 0.0;
  for (int in = 0; in < N; ++in) {
    const double* l = logits.data() + in * per_image;
    const double* g = gt.data() + in * per_image;
    const double* ww = w.data() + in * per_image;
    double acc = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < per_image; ++i) {
      const double p = std::clamp(stable_sigmoid(l[i]), kProbLo, kProbHi);
      acc += ww[i] * -(g[i] * std::log(p) + (1.0 - g[i]) * std::log(1.0 - p));
      wsum += ww[i];
    }
    total += acc / wsum;
  }
  out.data()[0] = total / N;

  if (tape && logits.node >= 0) {
    out.node = tape->alloc_slot(1);
    const Tensor4 lc = logits, gc = gt, wc = w;
    const int ln = logits.node, on = out.node;
    tape->record([lc, gc, wc, ln, on, N, per_image](Tape& t) {
      const double gy = t.grad(on)[0];
      auto& gl = t.grad(ln);
      for (int in = 0; in < N; ++in) {
        const double* l = lc.data() + in * per_image;
        const double* g = gc.data() + in * per_image;
        const double* ww = wc.data() + in * per_image;
        double wsum = 0.0;
        for (std::size_t i = 0; i < per_image; ++i) wsum += ww[i];
        double* gli = gl.data() + in * per_image;
        const double scale = gy / (N * wsum);
        for (std::size_t i = 0; i < per_image; ++i) {
          const double p = stable_sigmoid(l[i]);
          // The clamp freezes the loss outside [kProbLo, kProbHi], so the
          // gradient there is zero.
          if (p < kProbLo || p > kProbHi) continue;
          gli[i] += scale * ww[i] * (p - g[i]);
        }
      }
    });
  }
  return out;
}

Tensor4 weighted_iou(const Tensor4& logits, const Tensor4& gt, const Tensor4& w, Tape* tape) {
  check_same_shape(logits, gt, "weighted_iou");
  check_same_shape(logits, w, "weighted_iou");
  const int N = logits.n();
  const std::size_t per_image = logits.numel() / static_cast<std::size_t>(N);

  Tensor4 out(Shape4{1, 1, 1, 1});
  double total = 0.0;
  for (int in = 0; in < N; ++in) {
    const double* l = logits.data() + in * per_image;
    const double* g = gt.data() + in * per_image;
    const double* ww = w.data() + in * per_image;
    double inter = 0.0, uni = 0.0;
    for (std::size_t i = 0; i < per_image; ++i) {
      const double p = stable_sigmoid(l[i]);
      inter += ww[i] * p * g[i];
      uni += ww[i] * (p + g[i]);
    }
    total += 1.0 - (inter + 1.0) / (uni - inter + 1.0);
  }
  out.data()[0] = total / N;

  if (tape && logits.node >= 0) {
    out.node = tape->alloc_slot(1);
    const Tensor4 lc = logits, gc = gt, wc = w;
    const int ln = logits.node, on = out.node;
    tape->record([lc, gc, wc, ln, on, N, per_image](Tape& t) {
      const double gy = t.grad(on)[0];
      auto& gl = t.grad(ln);
      for (int in = 0; in < N; ++in) {
        const double* l = lc.data() + in * per_image;
        const double* g = gc.data() + in * per_image;
        const double* ww = wc.data() + in * per_image;
        double inter = 0.0, uni = 0.0;
        for (std::size_t i = 0; i < per_image; ++i) {
          const double p = stable_sigmoid(l[i]);
          inter += ww[i] * p * g[i];
          uni += ww[i] * (p + g[i]);
        }
        const double a = inter + 1.0, b = uni - inter + 1.0;
        double* gli = gl.data() + in * per_image;
        for (std::size_t i = 0; i < per_image; ++i) {
          const double p = stable_sigmoid(l[i]);
          const double da = ww[i] * g[i];
          const double db = ww[i] * (1.0 - g[i]);
          // d(1 - a/b)/dp = -(da*b - a*db)/b^2, chained with dp/dl.
          gli[i] += gy / N * -(da * b - a * db) / (b * b) * p * (1.0 - p);
        }
      }
    });
  }
  return out;
}

TotalLoss total_loss(const Tensor4& z_full, const Tensor4& p_full, const Tensor4& gt,
                     const WeightMapParams& params, Tape* tape) {
  check_same_shape(z_full, gt, "total_loss");
  check_same_shape(p_full, gt, "total_loss");
  const Tensor4 w = weight_map(gt, params);

  Tensor4 bce_p = weighted_bce(p_full, gt, w, tape);
  Tensor4 iou_p = weighted_iou(p_full, gt, w, tape);
  Tensor4 bce_z = weighted_bce(z_full, gt, w, tape);
  Tensor4 iou_z = weighted_iou(z_full, gt, w, tape);

  TotalLoss result;
  result.report.bce_p = bce_p.data()[0];
  result.report.iou_p = iou_p.data()[0];
  result.report.bce_z = bce_z.data()[0];
  result.report.iou_z = iou_z.data()[0];
  result.value = add(add(bce_p, iou_p, tape), add(bce_z, iou_z, tape), tape);
  return result;
}

}  // namespace odcsa
