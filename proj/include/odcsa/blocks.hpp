#ifndef ODCSA_BLOCKS_HPP
#define ODCSA_BLOCKS_HPP

#include <string>
#include <vector>

#include "odcsa/ops.hpp"
#include "odcsa/prng.hpp"
#include "odcsa/tensor.hpp"

namespace odcsa {

// Named handle to a parameter tensor owned by a block. Names are dotted
// paths, e.g. "odc.r_branch.0.weight".
struct ParamRef {
  std::string name;
  Tensor4* tensor = nullptr;
};

struct Conv2dLayer {
  Tensor4 weight;  // (c_out, c_in, kh, kw)
  Tensor4 bias;    // (1, c_out, 1, 1)
  ConvGeometry geom;

  static Conv2dLayer make(int c_in, int c_out, int kh, int kw, int pad_h, int pad_w,
                          int stride = 1, int dilation = 1);
  static Conv2dLayer pointwise(int c_in, int c_out) { return make(c_in, c_out, 1, 1, 0, 0); }

  Tensor4 forward(const Tensor4& x, Tape* tape) const {
    return conv2d(x, weight, bias, geom, tape);
  }
  Shape4 out_shape(const Shape4& in) const { return conv2d_out_shape(in, weight.shape(), geom); }

  std::size_t weight_count() const { return weight.numel(); }
  std::size_t param_count() const { return weight.numel() + bias.numel(); }
  std::size_t macs(const Shape4& in) const;

  void init(Prng& prng);
  void collect(const std::string& name, std::vector<ParamRef>& out);
};

// Ordered convolution chain; relu_after[i] controls the activation behind
// layer i.
struct ConvStack {
  std::vector<Conv2dLayer> layers;
  std::vector<bool> relu_after;

  Tensor4 forward(const Tensor4& x, Tape* tape) const;
  Shape4 out_shape(Shape4 in) const;
  std::size_t param_count() const;
  std::size_t macs(Shape4 in) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct EncoderOutputs {
  Tensor4 x1;  // (n,  64, H/4,  W/4)
  Tensor4 x2;  // (n, 128, H/8,  W/8)
  Tensor4 x3;  // (n, 320, H/16, W/16)
  Tensor4 x4;  // (n, 512, H/32, W/32)
};

// Small stand-in encoder with the stride-4/8/16/32 and 64/128/320/512
// channel contract: four stages of two 3x3 convs + relu, the first conv of
// each stage stride 2 (stage 1 uses two stride-2 convs to reach H/4).
struct ToyEncoder {
  ConvStack stage1, stage2, stage3, stage4;

  static ToyEncoder make();
  EncoderOutputs forward(const Tensor4& image, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Multi-branch receptive-field block: pointwise branch plus three
// rectangular-then-dilated branches (1x3/3x1 dil 3, 1x5/5x1 dil 5,
// 1x7/7x1 dil 7), concatenated, fused by a 3x3 conv, with a pointwise
// shortcut and a final relu. Branch convolutions are linear.
struct RfbBlock {
  Conv2dLayer b0;
  ConvStack b1, b2, b3;
  Conv2dLayer fuse;
  Conv2dLayer shortcut;

  static RfbBlock make(int c_in, int c_out);
  Tensor4 forward(const Tensor4& x, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Orthogonal-direction block: a row branch of three 1x3 convs and a column
// branch of three 3x1 convs (relu after each), whose concatenation is
// linearly recombined to 4C channels and then, with the block input, back to
// C channels. Both combinations are pure pointwise linear maps.
struct OdcBlock {
  ConvStack r_branch;      // 1x3 convs, pad (0,1)
  ConvStack c_branch;      // 3x1 convs, pad (1,0)
  Conv2dLayer combine_h;   // 2C -> 4C
  Conv2dLayer combine_q;   // 5C -> C
  int channels = 0;

  static OdcBlock make(int channels);
  Tensor4 forward(const Tensor4& f4, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Spatial dual-path enhancement: a three-conv local path plus a 2x2
// average-pool/upsample global path, summed.
struct S2eBlock {
  ConvStack path;

  static S2eBlock make(int channels);
  Tensor4 forward(const Tensor4& x, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Channel dual-path attention: pointwise local branch plus a global-average
// branch, summed and squashed to a gate in (0,1) that scales the value map.
struct CsaBlock {
  Conv2dLayer pw_local;
  Conv2dLayer pw_global;

  struct Out {
    Tensor4 attention;  // W, strictly in (0,1)
    Tensor4 value;      // W (*) v
  };

  static CsaBlock make(int channels);
  Out forward(const Tensor4& s, const Tensor4& v, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Cross-level residual fusion: the deep map is upsampled to the shallow
// level, fused, refined by a residual conv block, and reweighted by
// per-pixel softmax importance rescaled to mean 1.
struct RfaBlock {
  Conv2dLayer pw_up;
  ConvStack conv_block;  // pointwise + three 3x3 + pointwise

  static RfaBlock make(int channels);
  Tensor4 forward(const Tensor4& d, const Tensor4& f3, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct MsfaBlock {
  S2eBlock s2e;
  CsaBlock csa;
  RfaBlock rfa;

  static MsfaBlock make(int channels);
  Tensor4 forward(const Tensor4& q, const Tensor4& f3, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Channel attention (shared two-layer map over average- and max-pooled
// descriptors, reduction 8) followed by spatial attention (channel mean/max
// through a 7x7 conv).
struct CbamBlock {
  Conv2dLayer mlp1;     // C -> C/8
  Conv2dLayer mlp2;     // C/8 -> C
  Conv2dLayer spatial;  // 2 -> 1, 7x7, pad 3

  static CbamBlock make(int channels);
  Tensor4 forward(const Tensor4& x, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

struct EraBlock {
  S2eBlock s2e;
  CsaBlock csa;
  CbamBlock cbam;
  Conv2dLayer head;  // C -> 1 logits

  static EraBlock make(int channels);
  Tensor4 forward(const Tensor4& c_in, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

// Shallow reverse attention: (1 - sigmoid(prediction)) masks the shallowest
// feature level, a small refine stack extracts the boundary residual, and
// the residual is added back onto the upsampled prediction.
struct SraBlock {
  Conv2dLayer refine0;  // 3x3 C -> C
  Conv2dLayer refine1;  // 3x3 C -> C
  Conv2dLayer edge;     // pointwise C -> 1

  struct Out {
    Tensor4 z_up4;
    Tensor4 p_hat;
  };

  static SraBlock make(int channels);
  Out forward(const Tensor4& z, const Tensor4& f1, Tape* tape) const;
  void init(Prng& prng);
  void collect(const std::string& prefix, std::vector<ParamRef>& out);
};

}  // namespace odcsa

#endif
