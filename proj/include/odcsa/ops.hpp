#ifndef ODCSA_OPS_HPP
#define ODCSA_OPS_HPP

#include <vector>

#include "odcsa/tensor.hpp"

namespace odcsa {

struct ConvGeometry {
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;
  int dilation = 1;
};

// Correlation (no kernel flip), zero padding. weight is (c_out, c_in, kh, kw)
// carried in a Tensor4; bias is (1, c_out, 1, 1) and may be empty for a
// bias-free map. Differentiable w.r.t. x, weight, and bias.
Tensor4 conv2d(const Tensor4& x, const Tensor4& weight, const Tensor4& bias,
               const ConvGeometry& geom, Tape* tape = nullptr);

Shape4 conv2d_out_shape(const Shape4& x, const Shape4& weight, const ConvGeometry& geom);

// 2x2 mean pooling, stride 2. Odd inputs replicate the last row/column
// before pooling.
Tensor4 avg_pool2x2(const Tensor4& x, Tape* tape = nullptr);

Tensor4 global_avg_pool(const Tensor4& x, Tape* tape = nullptr);
Tensor4 global_max_pool(const Tensor4& x, Tape* tape = nullptr);

// Channel-dimension reductions to a single channel.
Tensor4 channel_mean(const Tensor4& x, Tape* tape = nullptr);
Tensor4 channel_max(const Tensor4& x, Tape* tape = nullptr);

// Half-pixel-center bilinear interpolation with edge clamping.
Tensor4 bilinear_resize(const Tensor4& x, int out_h, int out_w, Tape* tape = nullptr);

Tensor4 relu(const Tensor4& x, Tape* tape = nullptr);
Tensor4 sigmoid(const Tensor4& x, Tape* tape = nullptr);

// scale * x + shift, elementwise.
Tensor4 affine(const Tensor4& x, double scale, double shift, Tape* tape = nullptr);

// Elementwise with broadcasting: each dimension must match or be 1 on one
// side. Illegal broadcasts throw, naming the offending dimension.
Tensor4 add(const Tensor4& a, const Tensor4& b, Tape* tape = nullptr);
Tensor4 mul(const Tensor4& a, const Tensor4& b, Tape* tape = nullptr);

Tensor4 concat_channels(const std::vector<Tensor4>& parts, Tape* tape = nullptr);
Tensor4 slice_channels(const Tensor4& x, int c_begin, int c_end, Tape* tape = nullptr);

// Per-(n, c) softmax over all h*w positions, stabilized by max subtraction.
Tensor4 softmax_spatial(const Tensor4& x, Tape* tape = nullptr);

// Scalar (1,1,1,1) sum of all entries.
Tensor4 sum_all(const Tensor4& x, Tape* tape = nullptr);

}  // namespace odcsa

#endif
