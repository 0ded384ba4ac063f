#include "odcsa/blocks.hpp"

#include <stdexcept>

namespace odcsa {

namespace {

std::string idx_name(const std::string& prefix, std::size_t i) {
  return prefix + "." + std::to_string(i);
}

}  // namespace

Conv2dLayer Conv2dLayer::make(int c_in, int c_out, int kh, int kw, int pad_h, int pad_w,
                              int stride, int dilation) {
  Conv2dLayer layer;
  layer.weight = Tensor4(Shape4{c_out, c_in, kh, kw});
  layer.bias = Tensor4(Shape4{1, c_out, 1, 1});
  layer.geom = ConvGeometry{stride, pad_h, pad_w, dilation};
  return layer;
}

std::size_t Conv2dLayer::macs(const Shape4& in) const {
  const Shape4 os = out_shape(in);
  return weight.numel() * static_cast<std::size_t>(os.h) * os.w * os.n;
}

void Conv2dLayer::init(Prng& prng) {
  const std::size_t fan_in =
      static_cast<std::size_t>(weight.c()) * weight.h() * weight.w();
  weight.vec() = he_uniform_init(prng, fan_in, weight.numel());
  for (auto& b : bias.vec()) b = 0.0;
}

void Conv2dLayer::collect(const std::string& name, std::vector<ParamRef>& out) {
  out.push_back({name + ".weight", &weight});
  out.push_back({name + ".bias", &bias});
}

Tensor4 ConvStack::forward(const Tensor4& x, Tape* tape) const {
  Tensor4 cur = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    cur = layers[i].forward(cur, tape);
    if (relu_after[i]) cur = relu(cur, tape);
  }
  return cur;
}

Shape4 ConvStack::out_shape(Shape4 in) const {
  for (const auto& layer : layers) in = layer.out_shape(in);
  return in;
}

std::size_t ConvStack::param_count() const {
  std::size_t total = 0;
  for (const auto& layer : layers) total += layer.param_count();
  return total;
}

std::size_t ConvStack::macs(Shape4 in) const {
  std::size_t total = 0;
  for (const auto& layer : layers) {
    total += layer.macs(in);
    in = layer.out_shape(in);
  }
  return total;
}

void ConvStack::init(Prng& prng) {
  for (auto& layer : layers) layer.init(prng);
}

void ConvStack::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i].collect(idx_name(prefix, i), out);
}

ToyEncoder ToyEncoder::make() {
  ToyEncoder e;
  auto stage = [](int c_in, int c_out, int stride2nd) {
    ConvStack s;
    s.layers.push_back(Conv2dLayer::make(c_in, c_out, 3, 3, 1, 1, 2));
    s.layers.push_back(Conv2dLayer::make(c_out, c_out, 3, 3, 1, 1, stride2nd));
    s.relu_after = {true, true};
    return s;
  };
  e.stage1 = stage(3, 64, 2);  // two stride-2 convs: H -> H/4
  e.stage2 = stage(64, 128, 1);
  e.stage3 = stage(128, 320, 1);
  e.stage4 = stage(320, 512, 1);
  return e;
}

EncoderOutputs ToyEncoder::forward(const Tensor4& image, Tape* tape) const {
  if (image.h() % 32 != 0 || image.w() % 32 != 0) {
    throw std::invalid_argument("encoder: input height/width must be multiples of 32, got " +
                                image.shape().str());
  }
  if (image.c() != 3) {
    throw std::invalid_argument("encoder: expected a 3-channel image, got " +
                                image.shape().str());
  }
  EncoderOutputs out;
  out.x1 = stage1.forward(image, tape);
  out.x2 = stage2.forward(out.x1, tape);
  out.x3 = stage3.forward(out.x2, tape);
  out.x4 = stage4.forward(out.x3, tape);
  return out;
}

void ToyEncoder::init(Prng& prng) {
  stage1.init(prng);
  stage2.init(prng);
  stage3.init(prng);
  stage4.init(prng);
}

void ToyEncoder::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  stage1.collect(prefix + ".stage1", out);
  stage2.collect(prefix + ".stage2", out);
  stage3.collect(prefix + ".stage3", out);
  stage4.collect(prefix + ".stage4", out);
}

RfbBlock RfbBlock::make(int c_in, int c_out) {
  RfbBlock b;
  b.b0 = Conv2dLayer::pointwise(c_in, c_out);
  auto branch = [&](int k, int dil) {
    ConvStack s;
    s.layers.push_back(Conv2dLayer::pointwise(c_in, c_out));
    s.layers.push_back(Conv2dLayer::make(c_out, c_out, 1, k, 0, (k - 1) / 2));
    s.layers.push_back(Conv2dLayer::make(c_out, c_out, k, 1, (k - 1) / 2, 0));
    s.layers.push_back(Conv2dLayer::make(c_out, c_out, 3, 3, dil, dil, 1, dil));
    s.relu_after = {false, false, false, false};
    return s;
  };
  b.b1 = branch(3, 3);
  b.b2 = branch(5, 5);
  b.b3 = branch(7, 7);
  b.fuse = Conv2dLayer::make(4 * c_out, c_out, 3, 3, 1, 1);
  b.shortcut = Conv2dLayer::pointwise(c_in, c_out);
  return b;
}

Tensor4 RfbBlock::forward(const Tensor4& x, Tape* tape) const {
  std::vector<Tensor4> branches;
  branches.push_back(b0.forward(x, tape));
  branches.push_back(b1.forward(x, tape));
  branches.push_back(b2.forward(x, tape));
  branches.push_back(b3.forward(x, tape));
  Tensor4 fused = fuse.forward(concat_channels(branches, tape), tape);
  return relu(add(fused, shortcut.forward(x, tape), tape), tape);
}

void RfbBlock::init(Prng& prng) {
  b0.init(prng);
  b1.init(prng);
  b2.init(prng);
  b3.init(prng);
  fuse.init(prng);
  shortcut.init(prng);
}

void RfbBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  b0.collect(prefix + ".b0", out);
  b1.collect(prefix + ".b1", out);
  b2.collect(prefix + ".b2", out);
  b3.collect(prefix + ".b3", out);
  fuse.collect(prefix + ".fuse", out);
  shortcut.collect(prefix + ".shortcut", out);
}

OdcBlock OdcBlock::make(int channels) {
  OdcBlock b;
  b.channels = channels;
  auto branch = [&](int kh, int kw, int ph, int pw) {
    ConvStack s;
    for (int i = 0; i < 3; ++i) {
      s.layers.push_back(Conv2dLayer::make(channels, channels, kh, kw, ph, pw));
      s.relu_after.push_back(true);
    }
    return s;
  };
  b.r_branch = branch(1, 3, 0, 1);
  b.c_branch = branch(3, 1, 1, 0);
  b.combine_h = Conv2dLayer::pointwise(2 * channels, 4 * channels);
  b.combine_q = Conv2dLayer::pointwise(5 * channels, channels);
  return b;
}

Tensor4 OdcBlock::forward(const Tensor4& f4, Tape* tape) const {
  if (f4.c() != channels) {
    throw std::invalid_argument("odc: expected " + std::to_string(channels) +
                                " channels, got " + f4.shape().str());
  }
  Tensor4 r = r_branch.forward(f4, tape);
  Tensor4 c = c_branch.forward(f4, tape);
  Tensor4 h = combine_h.forward(concat_channels({r, c}, tape), tape);
  return combine_q.forward(concat_channels({h, f4}, tape), tape);
}

void OdcBlock::init(Prng& prng) {
  r_branch.init(prng);
  c_branch.init(prng);
  combine_h.init(prng);
  combine_q.init(prng);
}

void OdcBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  r_branch.collect(prefix + ".r_branch", out);
  c_branch.collect(prefix + ".c_branch", out);
  combine_h.collect(prefix + ".combine_h", out);
  combine_q.collect(prefix + ".combine_q", out);
}

S2eBlock S2eBlock::make(int channels) {
  S2eBlock b;
  for (int i = 0; i < 3; ++i) {
    b.path.layers.push_back(Conv2dLayer::make(channels, channels, 3, 3, 1, 1));
    b.path.relu_after.push_back(true);
  }
  return b;
}

Tensor4 S2eBlock::forward(const Tensor4& x, Tape* tape) const {
  Tensor4 local = path.forward(x, tape);
  Tensor4 pooled = avg_pool2x2(x, tape);
  Tensor4 global = bilinear_resize(pooled, x.h(), x.w(), tape);
  return add(local, global, tape);
}

void S2eBlock::init(Prng& prng) { path.init(prng); }

void S2eBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  path.collect(prefix + ".path", out);
}

CsaBlock CsaBlock::make(int channels) {
  CsaBlock b;
  b.pw_local = Conv2dLayer::pointwise(channels, channels);
  b.pw_global = Conv2dLayer::pointwise(channels, channels);
  return b;
}

CsaBlock::Out CsaBlock::forward(const Tensor4& s, const Tensor4& v, Tape* tape) const {
  if (s.c() != v.c()) {
    throw std::invalid_argument("csa: channel mismatch between attention source " +
                                s.shape().str() + " and value " + v.shape().str());
  }
  Tensor4 local = pw_local.forward(s, tape);
  Tensor4 global = pw_global.forward(global_avg_pool(s, tape), tape);
  Tensor4 w = sigmoid(add(local, global, tape), tape);
  return {w, mul(w, v, tape)};
}

void CsaBlock::init(Prng& prng) {
  pw_local.init(prng);
  pw_global.init(prng);
}

void CsaBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  pw_local.collect(prefix + ".pw_local", out);
  pw_global.collect(prefix + ".pw_global", out);
}

RfaBlock RfaBlock::make(int channels) {
  RfaBlock b;
  b.pw_up = Conv2dLayer::pointwise(channels, channels);
  b.conv_block.layers.push_back(Conv2dLayer::pointwise(channels, channels));
  for (int i = 0; i < 3; ++i) {
    b.conv_block.layers.push_back(Conv2dLayer::make(channels, channels, 3, 3, 1, 1));
  }
  b.conv_block.layers.push_back(Conv2dLayer::pointwise(channels, channels));
  b.conv_block.relu_after = {true, true, true, true, false};
  return b;
}

Tensor4 RfaBlock::forward(const Tensor4& d, const Tensor4& f3, Tape* tape) const {
  if (f3.h() != 2 * d.h() || f3.w() != 2 * d.w()) {
    throw std::invalid_argument("rfa: guide level must be exactly twice the deep level, got " +
                                d.shape().str() + " vs " + f3.shape().str());
  }
  Tensor4 up = pw_up.forward(bilinear_resize(d, f3.h(), f3.w(), tape), tape);
  Tensor4 fused = relu(add(up, f3, tape), tape);
  Tensor4 refined = add(conv_block.forward(fused, tape), fused, tape);
  // Spatial softmax rescaled to per-channel mean 1 so the weighting does not
  // shrink activations with the position count.
  const double positions = static_cast<double>(f3.h()) * f3.w();
  Tensor4 weights = affine(softmax_spatial(refined, tape), positions, 0.0, tape);
  return mul(weights, up, tape);
}

void RfaBlock::init(Prng& prng) {
  pw_up.init(prng);
  conv_block.init(prng);
}

void RfaBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  pw_up.collect(prefix + ".pw_up", out);
  conv_block.collect(prefix + ".conv_block", out);
}

MsfaBlock MsfaBlock::make(int channels) {
  MsfaBlock b;
  b.s2e = S2eBlock::make(channels);
  b.csa = CsaBlock::make(channels);
  b.rfa = RfaBlock::make(channels);
  return b;
}

Tensor4 MsfaBlock::forward(const Tensor4& q, const Tensor4& f3, Tape* tape) const {
  Tensor4 s = s2e.forward(q, tape);
  CsaBlock::Out csa_out = csa.forward(s, q, tape);
  return rfa.forward(csa_out.value, f3, tape);
}

void MsfaBlock::init(Prng& prng) {
  s2e.init(prng);
  csa.init(prng);
  rfa.init(prng);
}

void MsfaBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  s2e.collect(prefix + ".s2e", out);
  csa.collect(prefix + ".csa", out);
  rfa.collect(prefix + ".rfa", out);
}

CbamBlock CbamBlock::make(int channels) {
  CbamBlock b;
  const int reduced = std::max(1, channels / 8);
  b.mlp1 = Conv2dLayer::pointwise(channels, reduced);
  b.mlp2 = Conv2dLayer::pointwise(reduced, channels);
  b.spatial = Conv2dLayer::make(2, 1, 7, 7, 3, 3);
  return b;
}

Tensor4 CbamBlock::forward(const Tensor4& x, Tape* tape) const {
  Tensor4 avg_desc = mlp2.forward(relu(mlp1.forward(global_avg_pool(x, tape), tape), tape), tape);
  Tensor4 max_desc = mlp2.forward(relu(mlp1.forward(global_max_pool(x, tape), tape), tape), tape);
  Tensor4 channel_gate = sigmoid(add(avg_desc, max_desc, tape), tape);
  Tensor4 gated = mul(channel_gate, x, tape);

  Tensor4 stats = concat_channels({channel_mean(gated, tape), channel_max(gated, tape)}, tape);
  Tensor4 spatial_gate = sigmoid(spatial.forward(stats, tape), tape);
  return mul(spatial_gate, gated, tape);
}

void CbamBlock::init(Prng& prng) {
  mlp1.init(prng);
  mlp2.init(prng);
  spatial.init(prng);
}

void CbamBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  mlp1.collect(prefix + ".mlp1", out);
  mlp2.collect(prefix + ".mlp2", out);
  spatial.collect(prefix + ".spatial", out);
}

EraBlock EraBlock::make(int channels) {
  EraBlock b;
  b.s2e = S2eBlock::make(channels);
  b.csa = CsaBlock::make(channels);
  b.cbam = CbamBlock::make(channels);
  b.head = Conv2dLayer::pointwise(channels, 1);
  return b;
}

Tensor4 EraBlock::forward(const Tensor4& c_in, Tape* tape) const {
  Tensor4 t = s2e.forward(c_in, tape);
  CsaBlock::Out csa_out = csa.forward(t, t, tape);
  Tensor4 remined = cbam.forward(csa_out.value, tape);
  return head.forward(remined, tape);
}

void EraBlock::init(Prng& prng) {
  s2e.init(prng);
  csa.init(prng);
  cbam.init(prng);
  head.init(prng);
}

void EraBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  s2e.collect(prefix + ".s2e", out);
  csa.collect(prefix + ".csa", out);
  cbam.collect(prefix + ".cbam", out);
  head.collect(prefix + ".head", out);
}

SraBlock SraBlock::make(int channels) {
  SraBlock b;
  b.refine0 = Conv2dLayer::make(channels, channels, 3, 3, 1, 1);
  b.refine1 = Conv2dLayer::make(channels, channels, 3, 3, 1, 1);
  b.edge = Conv2dLayer::pointwise(channels, 1);
  return b;
}

SraBlock::Out SraBlock::forward(const Tensor4& z, const Tensor4& f1, Tape* tape) const {
  if (f1.h() != 4 * z.h() || f1.w() != 4 * z.w()) {
    throw std::invalid_argument("sra: shallow level must be exactly 4x the prediction, got " +
                                z.shape().str() + " vs " + f1.shape().str());
  }
  Tensor4 z_up4 = bilinear_resize(z, f1.h(), f1.w(), tape);
  Tensor4 reverse = affine(sigmoid(z_up4, tape), -1.0, 1.0, tape);  // 1 - sigmoid
  Tensor4 masked = mul(reverse, f1, tape);
  Tensor4 refined = relu(refine0.forward(masked, tape), tape);
  refined = relu(refine1.forward(refined, tape), tape);
  Tensor4 f_edge = edge.forward(refined, tape);
  return {z_up4, add(z_up4, f_edge, tape)};
}

void SraBlock::init(Prng& prng) {
  refine0.init(prng);
  refine1.init(prng);
  edge.init(prng);
}

void SraBlock::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  refine0.collect(prefix + ".refine.0", out);
  refine1.collect(prefix + ".refine.1", out);
  edge.collect(prefix + ".edge", out);
}

}  // namespace odcsa
