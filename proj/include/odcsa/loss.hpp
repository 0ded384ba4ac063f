#ifndef ODCSA_LOSS_HPP
#define ODCSA_LOSS_HPP

#include "odcsa/tensor.hpp"

namespace odcsa {

struct WeightMapParams {
  int window = 31;       // odd stride-1 averaging window, zero padded
  double amplitude = 5.0;
};

// Boundary-emphasis weights: w = 1 + amplitude * |meanpool(G) - G|, so w is
// exactly 1 where the mask is locally constant (window fully inside) and at
// most 1 + amplitude. The pooled mean counts the zero padding, so borders of
// constant masks get w > 1. Throws on non-binary masks.
Tensor4 weight_map(const Tensor4& gt, const WeightMapParams& params = {});

// Pixel-weighted binary cross entropy on logits: per image
// sum(w*bce(sigmoid(l), g)) / sum(w), averaged over the batch.
// Probabilities are clamped to [1e-7, 1 - 1e-7].
Tensor4 weighted_bce(const Tensor4& logits, const Tensor4& gt, const Tensor4& w,
                     Tape* tape = nullptr);

// Pixel-weighted soft IoU on logits: with p = sigmoid(l),
// inter = sum(w*p*g), union = sum(w*(p+g)),
// loss = 1 - (inter+1)/(union-inter+1), averaged over the batch.
Tensor4 weighted_iou(const Tensor4& logits, const Tensor4& gt, const Tensor4& w,
                     Tape* tape = nullptr);

struct LossReport {
  double bce_p = 0.0, iou_p = 0.0;  // refined head
  double bce_z = 0.0, iou_z = 0.0;  // coarse head
  double bce_w() const { return bce_p + bce_z; }
  double iou_w() const { return iou_p + iou_z; }
  double total() const { return bce_p + iou_p + bce_z + iou_z; }
};

struct TotalLoss {
  LossReport report;
  Tensor4 value;  // scalar (1,1,1,1), differentiable through both heads
};

// Deep supervision: L(G, p) + L(G, z_up) where L = weighted_bce + weighted_iou
// with a weight map derived from G.
TotalLoss total_loss(const Tensor4& z_full, const Tensor4& p_full, const Tensor4& gt,
                     const WeightMapParams& params = {}, Tape* tape = nullptr);

}  // namespace odcsa

#endif
