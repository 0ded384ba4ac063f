#ifndef ODCSA_NET_HPP
#define ODCSA_NET_HPP

#include <optional>
#include <string>
#include <vector>

#include "odcsa/blocks.hpp"

namespace odcsa {

// Structural toggles; a disabled block is replaced by the corresponding
// bypass and its parameters are not created.
struct AblationFlags {
  bool use_odc = true;
  bool use_msfa = true;
  bool use_era = true;
  bool use_sra = true;

  bool operator==(const AblationFlags&) const = default;
};

// Forward intermediates alongside the two full-resolution logit heads.
struct NetTrace {
  Tensor4 f1, f3, f4;
  Tensor4 q;         // after the direction block (or f4 when bypassed)
  Tensor4 c;         // after fusion attention (or the bypass)
  Tensor4 z_native;  // coarse head, H/16
  Tensor4 p_native;  // refined head, H/4 (equals z when the reverse stage is off)
  Tensor4 z_full;    // logits at H x W
  Tensor4 p_full;    // logits at H x W
};

class OdcSaNet {
 public:
  explicit OdcSaNet(AblationFlags flags = {});

  void init_params(Prng& prng);

  NetTrace forward(const Tensor4& image, Tape* tape = nullptr) const;

  // Dotted-name parameter registry in a fixed order.
  std::vector<ParamRef> params();

  // Track every parameter as a tape leaf. unbind() clears the node ids.
  void bind(Tape& tape);
  void unbind();

  std::size_t param_count() const;
  const AblationFlags& flags() const { return flags_; }
  static constexpr int kRfbChannels = 32;

  ToyEncoder encoder;
  RfbBlock rfb1, rfb3, rfb4;
  std::optional<OdcBlock> odc;
  std::optional<MsfaBlock> msfa;
  std::optional<EraBlock> era;
  std::optional<SraBlock> sra;
  std::optional<Conv2dLayer> bypass_msfa;  // pointwise 32->32 on the upsampled q
  std::optional<Conv2dLayer> bypass_era;   // pointwise 32->1 head

 private:
  AblationFlags flags_;
};

}  // namespace odcsa

#endif
