#include "odcsa/blockcheck.hpp"

#include <algorithm>
#include <stdexcept>

#include "odcsa/blocks.hpp"
#include "odcsa/gradcheck.hpp"
#include "odcsa/loss.hpp"
#include "odcsa/ops.hpp"

namespace odcsa {

namespace {

constexpr double kTolerance = 1e-4;

constexpr double kBlockEps = 1e-5;

double fdc(const ScalarFn& f, const Tensor4& x) { return finite_diff_check(f, x, kBlockEps); }

Tensor4 random_tensor(Prng& prng, Shape4 shape, double lo = -1.0, double hi = 1.0) {
  Tensor4 t(shape);
  for (auto& v : t.vec()) v = prng.uniform(lo, hi);
  return t;
}

Tensor4 random_mask(Prng& prng, Shape4 shape) {
  Tensor4 t(shape);
  for (auto& v : t.vec()) v = prng.next_double() < 0.5 ? 0.0 : 1.0;
  return t;
}

// Random-weighted sum: richer probe gradients than a plain sum.
Tensor4 wsum(const Tensor4& y, const Tensor4& weights, Tape* tape) {
  return sum_all(mul(y, weights, tape), tape);
}

double check_conv2d(Prng& prng) {
  const Tensor4 x = random_tensor(prng, {1, 2, 6, 6});
  Tensor4 weight = random_tensor(prng, {3, 2, 3, 3});
  Tensor4 bias = random_tensor(prng, {1, 3, 1, 1});
  const ConvGeometry geom{1, 1, 1, 1};
  const Tensor4 probe = random_tensor(prng, {1, 3, 6, 6});

  double worst = fdc(
      [&](const Tensor4& v, Tape* t) {
        return wsum(sigmoid(conv2d(v, weight, bias, geom, t), t), probe, t);
      },
      x);
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(sigmoid(conv2d(x, v, bias, geom, t), t), probe, t);
                              },
                              weight));
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(sigmoid(conv2d(x, weight, v, geom, t), t), probe, t);
                              },
                              bias));
  // strided + dilated rectangular kernel
  Tensor4 wrect = random_tensor(prng, {2, 2, 1, 3});
  const ConvGeometry rect_geom{2, 0, 2, 2};
  const Tensor4 probe2 = random_tensor(prng, conv2d_out_shape(x.shape(), wrect.shape(), rect_geom));
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(conv2d(v, wrect, Tensor4{}, rect_geom, t), probe2, t);
                              },
                              x));
  return worst;
}

double check_pool(Prng& prng) {
  const Tensor4 even = random_tensor(prng, {1, 2, 8, 8});
  const Tensor4 odd = random_tensor(prng, {1, 2, 7, 7});
  const Tensor4 pe = random_tensor(prng, {1, 2, 4, 4});
  const Tensor4 po = random_tensor(prng, {1, 2, 4, 4});
  const Tensor4 pv = random_tensor(prng, {1, 2, 1, 1});

  double worst = fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(avg_pool2x2(v, t), pe, t); }, even);
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(avg_pool2x2(v, t), po, t);
                              },
                              odd));
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(global_avg_pool(v, t), pv, t);
                              },
                              even));
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(global_max_pool(v, t), pv, t);
                              },
                              even));
  return worst;
}

double check_resize(Prng& prng) {
  const Tensor4 x = random_tensor(prng, {1, 2, 8, 8});
  const Tensor4 pu = random_tensor(prng, {1, 2, 13, 11});
  const Tensor4 pd = random_tensor(prng, {1, 2, 5, 3});
  double worst = fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(bilinear_resize(v, 13, 11, t), pu, t); }, x);
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return wsum(bilinear_resize(v, 5, 3, t), pd, t);
                              },
                              x));
  return worst;
}

double check_softmax(Prng& prng) {
  const Tensor4 x = random_tensor(prng, {1, 3, 8, 8});
  const Tensor4 probe = random_tensor(prng, {1, 3, 8, 8});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(softmax_spatial(v, t), probe, t); }, x);
}

double check_odc(Prng& prng) {
  OdcBlock block = OdcBlock::make(32);
  block.init(prng);
  const Tensor4 x = random_tensor(prng, {1, 32, 8, 8});
  const Tensor4 probe = random_tensor(prng, {1, 32, 8, 8});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(block.forward(v, t), probe, t); }, x);
}

double check_rfb(Prng& prng) {
  RfbBlock block = RfbBlock::make(8, 8);  // reduced width
  block.init(prng);
  const Tensor4 x = random_tensor(prng, {1, 8, 6, 6});
  const Tensor4 probe = random_tensor(prng, {1, 8, 6, 6});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(block.forward(v, t), probe, t); }, x);
}

double check_s2e(Prng& prng) {
  S2eBlock block = S2eBlock::make(32);
  block.init(prng);
  const Tensor4 x = random_tensor(prng, {1, 32, 8, 8});
  const Tensor4 probe = random_tensor(prng, {1, 32, 8, 8});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(block.forward(v, t), probe, t); }, x);
}

// Full S2E -> CSA chain with the value operand wired as in the fusion block.
double check_csa(Prng& prng) {
  S2eBlock s2e = S2eBlock::make(32);
  CsaBlock csa = CsaBlock::make(32);
  s2e.init(prng);
  csa.init(prng);
  const Tensor4 x = random_tensor(prng, {1, 32, 8, 8});
  const Tensor4 probe = random_tensor(prng, {1, 32, 8, 8});
  return fdc(
      [&](const Tensor4& v, Tape* t) {
        return wsum(csa.forward(s2e.forward(v, t), v, t).value, probe, t);
      },
      x);
}

double check_rfa(Prng& prng) {
  RfaBlock block = RfaBlock::make(32);
  block.init(prng);
  const Tensor4 d = random_tensor(prng, {1, 32, 8, 8});
  const Tensor4 f3 = random_tensor(prng, {1, 32, 16, 16});
  const Tensor4 probe = random_tensor(prng, {1, 32, 16, 16});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(block.forward(v, f3, t), probe, t); }, d);
}

double check_era(Prng& prng) {
  EraBlock block = EraBlock::make(32);
  block.init(prng);
  const Tensor4 x = random_tensor(prng, {1, 32, 8, 8});
  const Tensor4 probe = random_tensor(prng, {1, 1, 8, 8});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(block.forward(v, t), probe, t); }, x);
}

double check_sra(Prng& prng) {
  SraBlock block = SraBlock::make(32);
  block.init(prng);
  const Tensor4 z = random_tensor(prng, {1, 1, 8, 8});
  const Tensor4 f1 = random_tensor(prng, {1, 32, 32, 32});
  const Tensor4 probe = random_tensor(prng, {1, 1, 32, 32});
  return fdc(
      [&](const Tensor4& v, Tape* t) { return wsum(block.forward(v, f1, t).p_hat, probe, t); },
      z);
}

double check_loss(Prng& prng) {
  const Tensor4 gt = random_mask(prng, {1, 1, 8, 8});
  const Tensor4 z = random_tensor(prng, {1, 1, 8, 8}, -2.0, 2.0);
  const Tensor4 p = random_tensor(prng, {1, 1, 8, 8}, -2.0, 2.0);
  const WeightMapParams params{7, 5.0};  // small window so weights vary at 8x8
  const Tensor4 w = weight_map(gt, params);

  double worst = fdc(
      [&](const Tensor4& v, Tape* t) { return weighted_bce(v, gt, w, t); }, z);
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return weighted_iou(v, gt, w, t);
                              },
                              z));
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return total_loss(z, v, gt, params, t).value;
                              },
                              p));
  worst = std::max(worst, fdc(
                              [&](const Tensor4& v, Tape* t) {
                                return total_loss(v, p, gt, params, t).value;
                              },
                              z));
  return worst;
}

}  // namespace

std::vector<std::string> gradcheck_block_names() {
  return {"conv2d", "pool", "resize", "softmax", "odc", "rfb", "s2e", "csa", "rfa",
          "era", "sra", "loss"};
}

BlockCheckResult run_block_gradcheck(const std::string& name, std::uint64_t seed) {
  Prng prng(seed);
  double err;
  if (name == "conv2d") {
    err = check_conv2d(prng);
  } else if (name == "pool") {
    err = check_pool(prng);
  } else if (name == "resize") {
    err = check_resize(prng);
  } else if (name == "softmax") {
    err = check_softmax(prng);
  } else if (name == "odc") {
    err = check_odc(prng);
  } else if (name == "rfb") {
    err = check_rfb(prng);
  } else if (name == "s2e") {
    err = check_s2e(prng);
  } else if (name == "csa") {
    err = check_csa(prng);
  } else if (name == "rfa") {
    err = check_rfa(prng);
  } else if (name == "era") {
    err = check_era(prng);
  } else if (name == "sra") {
    err = check_sra(prng);
  } else if (name == "loss") {
    err = check_loss(prng);
  } else {
    throw std::invalid_argument("gradcheck: unknown block '" + name + "'");
  }
  return {name, err, err < kTolerance};
}

std::vector<BlockCheckResult> run_block_gradchecks(const std::string& which, std::uint64_t seed) {
  std::vector<BlockCheckResult> out;
  if (which == "all") {
    for (const auto& name : gradcheck_block_names()) {
      out.push_back(run_block_gradcheck(name, seed));
    }
  } else {
    out.push_back(run_block_gradcheck(which, seed));
  }
  return out;
}

}  // namespace odcsa
