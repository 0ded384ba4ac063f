#include "odcsa/net.hpp"

#include <stdexcept>

namespace odcsa {

OdcSaNet::OdcSaNet(AblationFlags flags) : flags_(flags) {
  encoder = ToyEncoder::make();
  rfb1 = RfbBlock::make(64, kRfbChannels);
  rfb3 = RfbBlock::make(320, kRfbChannels);
  rfb4 = RfbBlock::make(512, kRfbChannels);
  if (flags_.use_odc) odc = OdcBlock::make(kRfbChannels);
  if (flags_.use_msfa) {
    msfa = MsfaBlock::make(kRfbChannels);
  } else {
    bypass_msfa = Conv2dLayer::pointwise(kRfbChannels, kRfbChannels);
  }
  if (flags_.use_era) {
    era = EraBlock::make(kRfbChannels);
  } else {
    bypass_era = Conv2dLayer::pointwise(kRfbChannels, 1);
  }
  if (flags_.use_sra) sra = SraBlock::make(kRfbChannels);
}

void OdcSaNet::init_params(Prng& prng) {
  encoder.init(prng);
  rfb1.init(prng);
  rfb3.init(prng);
  rfb4.init(prng);
  if (odc) odc->init(prng);
  if (msfa) msfa->init(prng);
  if (bypass_msfa) bypass_msfa->init(prng);
  if (era) era->init(prng);
  if (bypass_era) bypass_era->init(prng);
  if (sra) sra->init(prng);
}

NetTrace OdcSaNet::forward(const Tensor4& image, Tape* tape) const {
  NetTrace tr;
  EncoderOutputs enc = encoder.forward(image, tape);
  tr.f1 = rfb1.forward(enc.x1, tape);
  tr.f3 = rfb3.forward(enc.x3, tape);
  tr.f4 = rfb4.forward(enc.x4, tape);

  tr.q = odc ? odc->forward(tr.f4, tape) : tr.f4;

  if (msfa) {
    tr.c = msfa->forward(tr.q, tr.f3, tape);
  } else {
    Tensor4 up = bilinear_resize(tr.q, 2 * tr.q.h(), 2 * tr.q.w(), tape);
    tr.c = bypass_msfa->forward(up, tape);
  }

  tr.z_native = era ? era->forward(tr.c, tape) : bypass_era->forward(tr.c, tape);

  if (sra) {
    SraBlock::Out out = sra->forward(tr.z_native, tr.f1, tape);
    tr.p_native = out.p_hat;
  } else {
    tr.p_native = tr.z_native;
  }

  tr.z_full = bilinear_resize(tr.z_native, image.h(), image.w(), tape);
  tr.p_full = bilinear_resize(tr.p_native, image.h(), image.w(), tape);
  return tr;
}

std::vector<ParamRef> OdcSaNet::params() {
  std::vector<ParamRef> out;
  encoder.collect("encoder", out);
  rfb1.collect("rfb1", out);
  rfb3.collect("rfb3", out);
  rfb4.collect("rfb4", out);
  if (odc) odc->collect("odc", out);
  if (msfa) msfa->collect("msfa", out);
  if (bypass_msfa) bypass_msfa->collect("bypass_msfa", out);
  if (era) era->collect("era", out);
  if (bypass_era) bypass_era->collect("bypass_era", out);
  if (sra) sra->collect("sra", out);
  return out;
}

void OdcSaNet::bind(Tape& tape) {
  for (auto& p : params()) tape.track(*p.tensor);
}

void OdcSaNet::unbind() {
  for (auto& p : params()) p.tensor->node = -1;
}

std::size_t OdcSaNet::param_count() const {
  std::size_t total = 0;
  for (auto& p : const_cast<OdcSaNet*>(this)->params()) total += p.tensor->numel();
  return total;
}

}  // namespace odcsa
