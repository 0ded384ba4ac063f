#include "odcsa/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace odcsa {

namespace {

int ceil_div(int a, int b) {  // b > 0
  int q = a / b;
  return q + ((a % b != 0 && a > 0) ? 1 : 0);
}

int floor_div(int a, int b) {  // b > 0
  int q = a / b;
  return q - ((a % b != 0 && a < 0) ? 1 : 0);
}

double stable_sigmoid(double v) {
  if (v >= 0.0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  double e = std::exp(v);
  return e / (1.0 + e);
}

const char* dim_name(int d) {
  switch (d) {
    case 0: return "batch";
    case 1: return "channel";
    case 2: return "height";
    default: return "width";
  }
}

int dim_of(const Shape4& s, int d) {
  switch (d) {
    case 0: return s.n;
    case 1: return s.c;
    case 2: return s.h;
    default: return s.w;
  }
}

// Broadcast-combined shape; throws naming the first offending dimension.
Shape4 broadcast_shape(const Shape4& a, const Shape4& b, const char* op) {
  int out[4];
  for (int d = 0; d < 4; ++d) {
    int da = dim_of(a, d), db = dim_of(b, d);
    if (da == db || db == 1) {
      out[d] = da;
    } else if (da == 1) {
      out[d] = db;
    } else {
      throw std::invalid_argument(std::string(op) + ": " + dim_name(d) +
                                  " dimensions not broadcastable: " + a.str() + " vs " + b.str());
    }
  }
  return Shape4{out[0], out[1], out[2], out[3]};
}

struct BStrides {
  std::size_t n, c, h, w;
};

BStrides broadcast_strides(const Shape4& s) {
  std::size_t sw = (s.w == 1) ? 0 : 1;
  std::size_t sh = (s.h == 1) ? 0 : static_cast<std::size_t>(s.w);
  std::size_t sc = (s.c == 1) ? 0 : static_cast<std::size_t>(s.h) * s.w;
  std::size_t sn = (s.n == 1) ? 0 : static_cast<std::size_t>(s.c) * s.h * s.w;
  return {sn, sc, sh, sw};
}

}  // namespace

Shape4 conv2d_out_shape(const Shape4& x, const Shape4& weight, const ConvGeometry& g) {
  if (weight.c != x.c) {
    throw std::invalid_argument("conv2d: input channel dimension mismatch: x has " +
                                std::to_string(x.c) + " channels, weight expects " +
                                std::to_string(weight.c));
  }
  if (weight.h < 1 || weight.w < 1) {
    throw std::invalid_argument("conv2d: kernel height/width must be >= 1, got " + weight.str());
  }
  if (g.stride < 1 || g.dilation < 1) {
    throw std::invalid_argument("conv2d: stride and dilation must be >= 1");
  }
  int oh = (x.h + 2 * g.pad_h - g.dilation * (weight.h - 1) - 1) / g.stride + 1;
  int ow = (x.w + 2 * g.pad_w - g.dilation * (weight.w - 1) - 1) / g.stride + 1;
  if (oh < 1 || ow < 1) {
    throw std::invalid_argument("conv2d: output height/width would be empty for input " +
                                x.str() + " with kernel " + weight.str());
  }
  return Shape4{x.n, weight.n, oh, ow};
}

namespace {

// Lowered patch matrix: col[(ci*KH+kh)*KW+kw][oh*OW+ow], zero padded.
void im2col(const double* xplane, int Ci, int H, int W, int KH, int KW, const ConvGeometry& g,
            int OH, int OW, double* col) {
  const int s = g.stride, d = g.dilation;
  const std::size_t P = static_cast<std::size_t>(OH) * OW;
  std::size_t row = 0;
  for (int ci = 0; ci < Ci; ++ci) {
    const double* src = xplane + static_cast<std::size_t>(ci) * H * W;
    for (int kh = 0; kh < KH; ++kh) {
      const int ih_off = kh * d - g.pad_h;
      const int oh_lo = std::max(0, ceil_div(-ih_off, s));
      const int oh_hi = std::min(OH, floor_div(H - 1 - ih_off, s) + 1);
      for (int kw = 0; kw < KW; ++kw, ++row) {
        const int iw_off = kw * d - g.pad_w;
        const int ow_lo = std::max(0, ceil_div(-iw_off, s));
        const int ow_hi = std::min(OW, floor_div(W - 1 - iw_off, s) + 1);
        double* dst = col + row * P;
        std::fill(dst, dst + P, 0.0);
        if (ow_lo >= ow_hi) continue;  // kernel column never lands inside
        for (int oh = oh_lo; oh < oh_hi; ++oh) {
          const double* xrow = src + static_cast<std::size_t>(oh * s + ih_off) * W + iw_off;
          double* drow = dst + static_cast<std::size_t>(oh) * OW;
          if (s == 1) {
            std::copy(xrow + ow_lo, xrow + ow_hi, drow + ow_lo);
          } else {
            for (int ow = ow_lo; ow < ow_hi; ++ow) drow[ow] = xrow[ow * s];
          }
        }
      }
    }
  }
}

// Transpose of im2col: scatter-adds patch gradients back onto the image.
void col2im_add(const double* col, int Ci, int H, int W, int KH, int KW, const ConvGeometry& g,
                int OH, int OW, double* gxplane) {
  const int s = g.stride, d = g.dilation;
  const std::size_t P = static_cast<std::size_t>(OH) * OW;
  std::size_t row = 0;
  for (int ci = 0; ci < Ci; ++ci) {
    double* dst = gxplane + static_cast<std::size_t>(ci) * H * W;
    for (int kh = 0; kh < KH; ++kh) {
      const int ih_off = kh * d - g.pad_h;
      const int oh_lo = std::max(0, ceil_div(-ih_off, s));
      const int oh_hi = std::min(OH, floor_div(H - 1 - ih_off, s) + 1);
      for (int kw = 0; kw < KW; ++kw, ++row) {
        const int iw_off = kw * d - g.pad_w;
        const int ow_lo = std::max(0, ceil_div(-iw_off, s));
        const int ow_hi = std::min(OW, floor_div(W - 1 - iw_off, s) + 1);
        const double* srow = col + row * P;
        for (int oh = oh_lo; oh < oh_hi; ++oh) {
          double* xrow = dst + static_cast<std::size_t>(oh * s + ih_off) * W + iw_off;
          const double* crow = srow + static_cast<std::size_t>(oh) * OW;
          if (s == 1) {
            for (int ow = ow_lo; ow < ow_hi; ++ow) xrow[ow] += crow[ow];
          } else {
            for (int ow = ow_lo; ow < ow_hi; ++ow) xrow[ow * s] += crow[ow];
          }
        }
      }
    }
  }
}

// C[M x P] += A[M x K] * B[K x P], row-major; 4x16 register tiles with a
// generic tail path. Serial and order-fixed, so results are reproducible.
void gemm_acc(double* C, const double* A, const double* B, int M, int K, int P) {
  constexpr int MT = 4;
  constexpr int PT = 16;
  for (int m0 = 0; m0 < M; m0 += MT) {
    const int mt = std::min(MT, M - m0);
    for (int p0 = 0; p0 < P; p0 += PT) {
      const int pt = std::min(PT, P - p0);
      if (mt == MT && pt == PT) {
        double acc[MT][PT] = {};
        for (int k = 0; k < K; ++k) {
          const double* brow = B + static_cast<std::size_t>(k) * P + p0;
          const double a0 = A[static_cast<std::size_t>(m0 + 0) * K + k];
          const double a1 = A[static_cast<std::size_t>(m0 + 1) * K + k];
          const double a2 = A[static_cast<std::size_t>(m0 + 2) * K + k];
          const double a3 = A[static_cast<std::size_t>(m0 + 3) * K + k];
          for (int j = 0; j < PT; ++j) {
            const double b = brow[j];
            acc[0][j] += a0 * b;
            acc[1][j] += a1 * b;
            acc[2][j] += a2 * b;
            acc[3][j] += a3 * b;
          }
        }
        for (int i = 0; i < MT; ++i) {
          double* crow = C + static_cast<std::size_t>(m0 + i) * P + p0;
          for (int j = 0; j < PT; ++j) crow[j] += acc[i][j];
        }
      } else {
        double acc[MT][PT] = {};
        for (int k = 0; k < K; ++k) {
          const double* brow = B + static_cast<std::size_t>(k) * P + p0;
          for (int i = 0; i < mt; ++i) {
            const double a = A[static_cast<std::size_t>(m0 + i) * K + k];
            for (int j = 0; j < pt; ++j) acc[i][j] += a * brow[j];
          }
        }
        for (int i = 0; i < mt; ++i) {
          double* crow = C + static_cast<std::size_t>(m0 + i) * P + p0;
          for (int j = 0; j < pt; ++j) crow[j] += acc[i][j];
        }
      }
    }
  }
}

// C[M x N] += A[M x P] * B[N x P]^T: independent unit-stride dot products.
void gemm_abt(double* C, const double* A, const double* B, int M, int N, int P) {
  for (int m = 0; m < M; ++m) {
    const double* arow = A + static_cast<std::size_t>(m) * P;
    double* crow = C + static_cast<std::size_t>(m) * N;
    for (int n = 0; n < N; ++n) {
      const double* brow = B + static_cast<std::size_t>(n) * P;
      double acc = 0.0;
      for (int p = 0; p < P; ++p) acc += arow[p] * brow[p];
      crow[n] += acc;
    }
  }
}

}  // namespace

Tensor4 conv2d(const Tensor4& x, const Tensor4& weight, const Tensor4& bias,
               const ConvGeometry& g, Tape* tape) {
  const Shape4 os = conv2d_out_shape(x.shape(), weight.shape(), g);
  if (!bias.empty() && !(bias.shape() == Shape4{1, weight.n(), 1, 1})) {
    throw std::invalid_argument("conv2d: bias channel dimension must be (1," +
                                std::to_string(weight.n()) + ",1,1), got " + bias.shape().str());
  }

  const int N = x.n(), Ci = x.c(), H = x.h(), W = x.w();
  const int Co = os.c, OH = os.h, OW = os.w;
  const int KH = weight.h(), KW = weight.w();
  const int K = Ci * KH * KW;
  const std::size_t P = static_cast<std::size_t>(OH) * OW;

  Tensor4 out(os);
  std::vector<double> col(static_cast<std::size_t>(K) * P);
  for (int in = 0; in < N; ++in) {
    const double* xplane = x.data() + static_cast<std::size_t>(in) * Ci * H * W;
    double* oplane = out.data() + static_cast<std::size_t>(in) * Co * P;
    im2col(xplane, Ci, H, W, KH, KW, g, OH, OW, col.data());
    if (!bias.empty()) {
      for (int co = 0; co < Co; ++co) {
        std::fill(oplane + co * P, oplane + (co + 1) * P, bias.data()[co]);
      }
    }
    gemm_acc(oplane, weight.data(), col.data(), Co, K, P);
  }

  const bool needs_grad =
      tape != nullptr && (x.node >= 0 || weight.node >= 0 || bias.node >= 0);
  if (needs_grad) {
    out.node = tape->alloc_slot(out.numel());
    const Tensor4 xc = x, wc = weight;
    const int xn = x.node, wn = weight.node, bn = bias.node, on = out.node;
    const ConvGeometry gg = g;
    tape->record([xc, wc, xn, wn, bn, on, gg, N, Ci, Co, H, W, OH, OW, KH, KW, K, P](Tape& t) {
      const auto& gy = t.grad(on);
      double* gx = (xn >= 0) ? t.grad(xn).data() : nullptr;
      double* gw = (wn >= 0) ? t.grad(wn).data() : nullptr;
      double* gb = (bn >= 0) ? t.grad(bn).data() : nullptr;

      std::vector<double> col;
      if (gw) col.resize(static_cast<std::size_t>(K) * P);
      std::vector<double> wt;  // weight transpose, K x Co
      if (gx) {
        wt.resize(static_cast<std::size_t>(K) * Co);
        for (int co = 0; co < Co; ++co) {
          for (int k = 0; k < K; ++k) {
            wt[static_cast<std::size_t>(k) * Co + co] =
                wc.data()[static_cast<std::size_t>(co) * K + k];
          }
        }
      }
      std::vector<double> dcol;
      if (gx) dcol.resize(static_cast<std::size_t>(K) * P);

      for (int in = 0; in < N; ++in) {
        const double* gplane = gy.data() + static_cast<std::size_t>(in) * Co * P;
        if (gb) {
          for (int co = 0; co < Co; ++co) {
            double acc = 0.0;
            const double* grow = gplane + co * P;
            for (std::size_t i = 0; i < P; ++i) acc += grow[i];
            gb[co] += acc;
          }
        }
        if (gw) {
          const double* xplane = xc.data() + static_cast<std::size_t>(in) * Ci * H * W;
          im2col(xplane, Ci, H, W, KH, KW, gg, OH, OW, col.data());
          gemm_abt(gw, gplane, col.data(), Co, K, static_cast<int>(P));
        }
        if (gx) {
          std::fill(dcol.begin(), dcol.end(), 0.0);
          gemm_acc(dcol.data(), wt.data(), gplane, K, Co, static_cast<int>(P));
          col2im_add(dcol.data(), Ci, H, W, KH, KW, gg, OH, OW,
                     gx + static_cast<std::size_t>(in) * Ci * H * W);
        }
      }
    });
  }
  return out;
}

Tensor4 avg_pool2x2(const Tensor4& x, Tape* tape) {
  const int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  const int OH = (H + 1) / 2, OW = (W + 1) / 2;
  Tensor4 out(Shape4{N, C, OH, OW});
  const double* xd = x.data();
  double* od = out.data();
  for (int nc = 0; nc < N * C; ++nc) {
    const double* xp = xd + static_cast<std::size_t>(nc) * H * W;
    double* op = od + static_cast<std::size_t>(nc) * OH * OW;
    for (int oh = 0; oh < OH; ++oh) {
      const int y0 = 2 * oh, y1 = std::min(2 * oh + 1, H - 1);
      for (int ow = 0; ow < OW; ++ow) {
        const int x0 = 2 * ow, x1 = std::min(2 * ow + 1, W - 1);
        op[oh * OW + ow] =
            0.25 * (xp[y0 * W + x0] + xp[y0 * W + x1] + xp[y1 * W + x0] + xp[y1 * W + x1]);
      }
    }
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    tape->record([xn, on, N, C, H, W, OH, OW](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int nc = 0; nc < N * C; ++nc) {
        const double* gp = gy.data() + static_cast<std::size_t>(nc) * OH * OW;
        double* gxp = gx.data() + static_cast<std::size_t>(nc) * H * W;
        for (int oh = 0; oh < OH; ++oh) {
          const int y0 = 2 * oh, y1 = std::min(2 * oh + 1, H - 1);
          for (int ow = 0; ow < OW; ++ow) {
            const int x0 = 2 * ow, x1 = std::min(2 * ow + 1, W - 1);
            const double g = 0.25 * gp[oh * OW + ow];
            gxp[y0 * W + x0] += g;
            gxp[y0 * W + x1] += g;
            gxp[y1 * W + x0] += g;
            gxp[y1 * W + x1] += g;
          }
        }
      }
    });
  }
  return out;
}

Tensor4 global_avg_pool(const Tensor4& x, Tape* tape) {
  const int N = x.n(), C = x.c();
  const std::size_t hw = static_cast<std::size_t>(x.h()) * x.w();
  Tensor4 out(Shape4{N, C, 1, 1});
  const double* xd = x.data();
  for (int nc = 0; nc < N * C; ++nc) {
    const double* xp = xd + nc * hw;
    double acc = 0.0;
    for (std::size_t i = 0; i < hw; ++i) acc += xp[i];
    out.data()[nc] = acc / static_cast<double>(hw);
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    const int planes = N * C;
    tape->record([xn, on, planes, hw](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int nc = 0; nc < planes; ++nc) {
        const double g = gy[static_cast<std::size_t>(nc)] / static_cast<double>(hw);
        double* gxp = gx.data() + nc * hw;
        for (std::size_t i = 0; i < hw; ++i) gxp[i] += g;
      }
    });
  }
  return out;
}

Tensor4 global_max_pool(const Tensor4& x, Tape* tape) {
  const int N = x.n(), C = x.c();
  const std::size_t hw = static_cast<std::size_t>(x.h()) * x.w();
  Tensor4 out(Shape4{N, C, 1, 1});
  std::vector<std::size_t> argmax(static_cast<std::size_t>(N) * C, 0);
  const double* xd = x.data();
  for (int nc = 0; nc < N * C; ++nc) {
    const double* xp = xd + nc * hw;
    std::size_t best = 0;
    for (std::size_t i = 1; i < hw; ++i) {
      if (xp[i] > xp[best]) best = i;  // first maximum wins on ties
    }
    argmax[static_cast<std::size_t>(nc)] = best;
    out.data()[nc] = xp[best];
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    const int planes = N * C;
    tape->record([xn, on, planes, hw, argmax](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int nc = 0; nc < planes; ++nc) {
        gx[nc * hw + argmax[static_cast<std::size_t>(nc)]] += gy[static_cast<std::size_t>(nc)];
      }
    });
  }
  return out;
}

Tensor4 channel_mean(const Tensor4& x, Tape* tape) {
  const int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  Tensor4 out(Shape4{N, 1, H, W});
  const double* xd = x.data();
  for (int in = 0; in < N; ++in) {
    double* op = out.data() + in * hw;
    for (std::size_t i = 0; i < hw; ++i) {
      double acc = 0.0;
      for (int ci = 0; ci < C; ++ci) acc += xd[(static_cast<std::size_t>(in) * C + ci) * hw + i];
      op[i] = acc / C;
    }
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    tape->record([xn, on, N, C, hw](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int in = 0; in < N; ++in) {
        for (std::size_t i = 0; i < hw; ++i) {
          const double g = gy[in * hw + i] / C;
          for (int ci = 0; ci < C; ++ci) gx[(static_cast<std::size_t>(in) * C + ci) * hw + i] += g;
        }
      }
    });
  }
  return out;
}

Tensor4 channel_max(const Tensor4& x, Tape* tape) {
  const int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  Tensor4 out(Shape4{N, 1, H, W});
  std::vector<int> argmax(static_cast<std::size_t>(N) * hw, 0);
  const double* xd = x.data();
  for (int in = 0; in < N; ++in) {
    for (std::size_t i = 0; i < hw; ++i) {
      int best = 0;
      double bv = xd[static_cast<std::size_t>(in) * C * hw + i];
      for (int ci = 1; ci < C; ++ci) {
        double v = xd[(static_cast<std::size_t>(in) * C + ci) * hw + i];
        if (v > bv) {
          bv = v;
          best = ci;
        }
      }
      argmax[in * hw + i] = best;
      out.data()[in * hw + i] = bv;
    }
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    tape->record([xn, on, N, C, hw, argmax](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int in = 0; in < N; ++in) {
        for (std::size_t i = 0; i < hw; ++i) {
          gx[(static_cast<std::size_t>(in) * C + argmax[in * hw + i]) * hw + i] += gy[in * hw + i];
        }
      }
    });
  }
  return out;
}

namespace {

// Half-pixel source coordinates, split into base index, neighbor, and blend.
struct ResizeAxis {
  std::vector<int> i0, i1;
  std::vector<double> f;
};

ResizeAxis resize_axis(int in_dim, int out_dim) {
  ResizeAxis ax;
  ax.i0.resize(static_cast<std::size_t>(out_dim));
  ax.i1.resize(static_cast<std::size_t>(out_dim));
  ax.f.resize(static_cast<std::size_t>(out_dim));
  const double scale = static_cast<double>(in_dim) / out_dim;
  for (int o = 0; o < out_dim; ++o) {
    double s = (o + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(in_dim - 1));
    int i0 = static_cast<int>(std::floor(s));
    ax.i0[static_cast<std::size_t>(o)] = i0;
    ax.i1[static_cast<std::size_t>(o)] = std::min(i0 + 1, in_dim - 1);
    ax.f[static_cast<std::size_t>(o)] = s - i0;
  }
  return ax;
}

}  // namespace

Tensor4 bilinear_resize(const Tensor4& x, int out_h, int out_w, Tape* tape) {
  if (out_h < 1 || out_w < 1) {
    throw std::invalid_argument("bilinear_resize: target dimensions must be >= 1");
  }
  const int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  const ResizeAxis ay = resize_axis(H, out_h);
  const ResizeAxis axx = resize_axis(W, out_w);
  Tensor4 out(Shape4{N, C, out_h, out_w});
  const double* xd = x.data();
  for (int nc = 0; nc < N * C; ++nc) {
    const double* xp = xd + static_cast<std::size_t>(nc) * H * W;
    double* op = out.data() + static_cast<std::size_t>(nc) * out_h * out_w;
    for (int oy = 0; oy < out_h; ++oy) {
      const double fy = ay.f[static_cast<std::size_t>(oy)];
      const double* r0 = xp + static_cast<std::size_t>(ay.i0[static_cast<std::size_t>(oy)]) * W;
      const double* r1 = xp + static_cast<std::size_t>(ay.i1[static_cast<std::size_t>(oy)]) * W;
      for (int ox = 0; ox < out_w; ++ox) {
        const double fx = axx.f[static_cast<std::size_t>(ox)];
        const int x0 = axx.i0[static_cast<std::size_t>(ox)], x1 = axx.i1[static_cast<std::size_t>(ox)];
        op[oy * out_w + ox] = (1.0 - fy) * ((1.0 - fx) * r0[x0] + fx * r0[x1]) +
                              fy * ((1.0 - fx) * r1[x0] + fx * r1[x1]);
      }
    }
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    const int planes = N * C;
    tape->record([xn, on, planes, H, W, out_h, out_w, ay, axx](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int nc = 0; nc < planes; ++nc) {
        const double* gp = gy.data() + static_cast<std::size_t>(nc) * out_h * out_w;
        double* gxp = gx.data() + static_cast<std::size_t>(nc) * H * W;
        for (int oy = 0; oy < out_h; ++oy) {
          const double fy = ay.f[static_cast<std::size_t>(oy)];
          const int y0 = ay.i0[static_cast<std::size_t>(oy)], y1 = ay.i1[static_cast<std::size_t>(oy)];
          for (int ox = 0; ox < out_w; ++ox) {
            const double fx = axx.f[static_cast<std::size_t>(ox)];
            const int x0 = axx.i0[static_cast<std::size_t>(ox)], x1 = axx.i1[static_cast<std::size_t>(ox)];
            const double g = gp[oy * out_w + ox];
            gxp[y0 * W + x0] += (1.0 - fy) * (1.0 - fx) * g;
            gxp[y0 * W + x1] += (1.0 - fy) * fx * g;
            gxp[y1 * W + x0] += fy * (1.0 - fx) * g;
            gxp[y1 * W + x1] += fy * fx * g;
          }
        }
      }
    });
  }
  return out;
}

Tensor4 relu(const Tensor4& x, Tape* tape) {
  Tensor4 y(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) yd[i] = xd[i] > 0.0 ? xd[i] : 0.0;
  if (tape && x.node >= 0) {
    y.node = tape->alloc_slot(n);
    const Tensor4 xc = x;
    const int xn = x.node, yn = y.node;
    tape->record([xc, xn, yn, n](Tape& t) {
      const auto& gy = t.grad(yn);
      auto& gx = t.grad(xn);
      const double* xd = xc.data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += xd[i] > 0.0 ? gy[i] : 0.0;
    });
  }
  return y;
}

Tensor4 sigmoid(const Tensor4& x, Tape* tape) {
  Tensor4 y(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) yd[i] = stable_sigmoid(xd[i]);
  if (tape && x.node >= 0) {
    y.node = tape->alloc_slot(n);
    const Tensor4 yc = y;
    const int xn = x.node, yn = y.node;
    tape->record([yc, xn, yn, n](Tape& t) {
      const auto& gy = t.grad(yn);
      auto& gx = t.grad(xn);
      const double* yd = yc.data();
      for (std::size_t i = 0; i < n; ++i) gx[i] += yd[i] * (1.0 - yd[i]) * gy[i];
    });
  }
  return y;
}

Tensor4 affine(const Tensor4& x, double scale, double shift, Tape* tape) {
  Tensor4 y(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) yd[i] = scale * xd[i] + shift;
  if (tape && x.node >= 0) {
    y.node = tape->alloc_slot(n);
    const int xn = x.node, yn = y.node;
    tape->record([xn, yn, n, scale](Tape& t) {
      const auto& gy = t.grad(yn);
      auto& gx = t.grad(xn);
      for (std::size_t i = 0; i < n; ++i) gx[i] += scale * gy[i];
    });
  }
  return y;
}

namespace {

// Shared loop for broadcast add/mul forward and backward.
template <typename Fn>
void broadcast_walk(const Shape4& os, const BStrides& sa, const BStrides& sb, Fn&& fn) {
  std::size_t io = 0;
  for (int in = 0; in < os.n; ++in) {
    for (int ic = 0; ic < os.c; ++ic) {
      for (int iy = 0; iy < os.h; ++iy) {
        std::size_t ia = in * sa.n + ic * sa.c + iy * sa.h;
        std::size_t ib = in * sb.n + ic * sb.c + iy * sb.h;
        for (int ix = 0; ix < os.w; ++ix, ++io) {
          fn(io, ia + ix * sa.w, ib + ix * sb.w);
        }
      }
    }
  }
}

}  // namespace

Tensor4 add(const Tensor4& a, const Tensor4& b, Tape* tape) {
  const Shape4 os = broadcast_shape(a.shape(), b.shape(), "add");
  const BStrides sa = broadcast_strides(a.shape());
  const BStrides sb = broadcast_strides(b.shape());
  Tensor4 out(os);
  const double* ad = a.data();
  const double* bd = b.data();
  double* od = out.data();
  broadcast_walk(os, sa, sb, [&](std::size_t io, std::size_t ia, std::size_t ib) {
    od[io] = ad[ia] + bd[ib];
  });
  if (tape && (a.node >= 0 || b.node >= 0)) {
    out.node = tape->alloc_slot(out.numel());
    const int an = a.node, bn = b.node, on = out.node;
    tape->record([an, bn, on, os, sa, sb](Tape& t) {
      const auto& gy = t.grad(on);
      double* ga = an >= 0 ? t.grad(an).data() : nullptr;
      double* gb = bn >= 0 ? t.grad(bn).data() : nullptr;
      broadcast_walk(os, sa, sb, [&](std::size_t io, std::size_t ia, std::size_t ib) {
        if (ga) ga[ia] += gy[io];
        if (gb) gb[ib] += gy[io];
      });
    });
  }
  return out;
}

Tensor4 mul(const Tensor4& a, const Tensor4& b, Tape* tape) {
  const Shape4 os = broadcast_shape(a.shape(), b.shape(), "mul");
  const BStrides sa = broadcast_strides(a.shape());
  const BStrides sb = broadcast_strides(b.shape());
  Tensor4 out(os);
  const double* ad = a.data();
  const double* bd = b.data();
  double* od = out.data();
  broadcast_walk(os, sa, sb, [&](std::size_t io, std::size_t ia, std::size_t ib) {
    od[io] = ad[ia] * bd[ib];
  });
  if (tape && (a.node >= 0 || b.node >= 0)) {
    out.node = tape->alloc_slot(out.numel());
    const Tensor4 ac = a, bc = b;
    const int an = a.node, bn = b.node, on = out.node;
    tape->record([ac, bc, an, bn, on, os, sa, sb](Tape& t) {
      const auto& gy = t.grad(on);
      double* ga = an >= 0 ? t.grad(an).data() : nullptr;
      double* gb = bn >= 0 ? t.grad(bn).data() : nullptr;
      const double* ad = ac.data();
      const double* bd = bc.data();
      broadcast_walk(os, sa, sb, [&](std::size_t io, std::size_t ia, std::size_t ib) {
        if (ga) ga[ia] += gy[io] * bd[ib];
        if (gb) gb[ib] += gy[io] * ad[ia];
      });
    });
  }
  return out;
}

Tensor4 concat_channels(const std::vector<Tensor4>& parts, Tape* tape) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_channels: no inputs");
  }
  const int N = parts[0].n(), H = parts[0].h(), W = parts[0].w();
  int total_c = 0;
  bool any_tracked = false;
  for (const auto& p : parts) {
    if (p.n() != N || p.h() != H || p.w() != W) {
      throw std::invalid_argument("concat_channels: batch/height/width mismatch: " +
                                  parts[0].shape().str() + " vs " + p.shape().str());
    }
    total_c += p.c();
    any_tracked = any_tracked || p.node >= 0;
  }
  Tensor4 out(Shape4{N, total_c, H, W});
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  int c_off = 0;
  for (const auto& p : parts) {
    for (int in = 0; in < N; ++in) {
      const double* src = p.data() + static_cast<std::size_t>(in) * p.c() * hw;
      double* dst = out.data() + (static_cast<std::size_t>(in) * total_c + c_off) * hw;
      std::copy(src, src + static_cast<std::size_t>(p.c()) * hw, dst);
    }
    c_off += p.c();
  }
  if (tape && any_tracked) {
    out.node = tape->alloc_slot(out.numel());
    std::vector<int> nodes;
    std::vector<int> chans;
    for (const auto& p : parts) {
      nodes.push_back(p.node);
      chans.push_back(p.c());
    }
    const int on = out.node;
    tape->record([nodes, chans, on, N, total_c, hw](Tape& t) {
      const auto& gy = t.grad(on);
      int c_off = 0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] >= 0) {
          auto& gp = t.grad(nodes[k]);
          for (int in = 0; in < N; ++in) {
            const double* src = gy.data() + (static_cast<std::size_t>(in) * total_c + c_off) * hw;
            double* dst = gp.data() + static_cast<std::size_t>(in) * chans[k] * hw;
            for (std::size_t i = 0; i < static_cast<std::size_t>(chans[k]) * hw; ++i) dst[i] += src[i];
          }
        }
        c_off += chans[k];
      }
    });
  }
  return out;
}

Tensor4 slice_channels(const Tensor4& x, int c_begin, int c_end, Tape* tape) {
  if (c_begin < 0 || c_end > x.c() || c_begin >= c_end) {
    throw std::invalid_argument("slice_channels: invalid channel range [" +
                                std::to_string(c_begin) + "," + std::to_string(c_end) +
                                ") for " + std::to_string(x.c()) + " channels");
  }
  const int N = x.n(), C = x.c(), H = x.h(), W = x.w();
  const int SC = c_end - c_begin;
  const std::size_t hw = static_cast<std::size_t>(H) * W;
  Tensor4 out(Shape4{N, SC, H, W});
  for (int in = 0; in < N; ++in) {
    const double* src = x.data() + (static_cast<std::size_t>(in) * C + c_begin) * hw;
    double* dst = out.data() + static_cast<std::size_t>(in) * SC * hw;
    std::copy(src, src + static_cast<std::size_t>(SC) * hw, dst);
  }
  if (tape && x.node >= 0) {
    out.node = tape->alloc_slot(out.numel());
    const int xn = x.node, on = out.node;
    tape->record([xn, on, N, C, SC, c_begin, hw](Tape& t) {
      const auto& gy = t.grad(on);
      auto& gx = t.grad(xn);
      for (int in = 0; in < N; ++in) {
        const double* src = gy.data() + static_cast<std::size_t>(in) * SC * hw;
        double* dst = gx.data() + (static_cast<std::size_t>(in) * C + c_begin) * hw;
        for (std::size_t i = 0; i < static_cast<std::size_t>(SC) * hw; ++i) dst[i] += src[i];
      }
    });
  }
  return out;
}

Tensor4 softmax_spatial(const Tensor4& x, Tape* tape) {
  const int planes = x.n() * x.c();
  const std::size_t hw = static_cast<std::size_t>(x.h()) * x.w();
  Tensor4 y(x.shape());
  const double* xd = x.data();
  double* yd = y.data();
  for (int nc = 0; nc < planes; ++nc) {
    const double* xp = xd + nc * hw;
    double* yp = yd + nc * hw;
    double m = xp[0];
    for (std::size_t i = 1; i < hw; ++i) m = std::max(m, xp[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) {
      yp[i] = std::exp(xp[i] - m);
      s += yp[i];
    }
    const double inv = 1.0 / s;
    for (std::size_t i = 0; i < hw; ++i) yp[i] *= inv;
  }
  if (tape && x.node >= 0) {
    y.node = tape->alloc_slot(y.numel());
    const Tensor4 yc = y;
    const int xn = x.node, yn = y.node;
    tape->record([yc, xn, yn, planes, hw](Tape& t) {
      const auto& gy = t.grad(yn);
      auto& gx = t.grad(xn);
      const double* yd = yc.data();
      for (int nc = 0; nc < planes; ++nc) {
        const double* yp = yd + nc * hw;
        const double* gp = gy.data() + nc * hw;
        double* gxp = gx.data() + nc * hw;
        double dot = 0.0;
        for (std::size_t i = 0; i < hw; ++i) dot += gp[i] * yp[i];
        for (std::size_t i = 0; i < hw; ++i) gxp[i] += yp[i] * (gp[i] - dot);
      }
    });
  }
  return y;
}

Tensor4 sum_all(const Tensor4& x, Tape* tape) {
  Tensor4 y(Shape4{1, 1, 1, 1});
  const double* xd = x.data();
  double acc = 0.0;
  const std::size_t n = x.numel();
  for (std::size_t i = 0; i < n; ++i) acc += xd[i];
  y.data()[0] = acc;
  if (tape && x.node >= 0) {
    y.node = tape->alloc_slot(1);
    const int xn = x.node, yn = y.node;
    tape->record([xn, yn, n](Tape& t) {
      const double g = t.grad(yn)[0];
      auto& gx = t.grad(xn);
      for (std::size_t i = 0; i < n; ++i) gx[i] += g;
    });
  }
  return y;
}

}  // namespace odcsa
