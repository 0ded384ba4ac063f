#include "odcsa/accounting.hpp"

#include <iomanip>
#include <sstream>

namespace odcsa {

namespace {

std::size_t rfb_macs(const RfbBlock& b, const Shape4& in) {
  const Shape4 branch_out = b.b0.out_shape(in);
  const Shape4 cat{in.n, 4 * branch_out.c, branch_out.h, branch_out.w};
  return b.b0.macs(in) + b.b1.macs(in) + b.b2.macs(in) + b.b3.macs(in) + b.fuse.macs(cat) +
         b.shortcut.macs(in);
}

std::size_t rfb_params(const RfbBlock& b) {
  return b.b0.param_count() + b.b1.param_count() + b.b2.param_count() + b.b3.param_count() +
         b.fuse.param_count() + b.shortcut.param_count();
}

std::size_t odc_macs(const OdcBlock& b, const Shape4& in) {
  const Shape4 cat2{in.n, 2 * in.c, in.h, in.w};
  const Shape4 cat5{in.n, 5 * in.c, in.h, in.w};
  return b.r_branch.macs(in) + b.c_branch.macs(in) + b.combine_h.macs(cat2) +
         b.combine_q.macs(cat5);
}

std::size_t odc_params(const OdcBlock& b) {
  return b.r_branch.param_count() + b.c_branch.param_count() + b.combine_h.param_count() +
         b.combine_q.param_count();
}

std::size_t csa_macs(const CsaBlock& b, const Shape4& in) {
  return b.pw_local.macs(in) + b.pw_global.macs(Shape4{in.n, in.c, 1, 1});
}

std::size_t csa_params(const CsaBlock& b) {
  return b.pw_local.param_count() + b.pw_global.param_count();
}

std::size_t msfa_macs(const MsfaBlock& b, const Shape4& q, const Shape4& f3) {
  return b.s2e.path.macs(q) + csa_macs(b.csa, q) + b.rfa.pw_up.macs(f3) +
         b.rfa.conv_block.macs(f3);
}

std::size_t msfa_params(const MsfaBlock& b) {
  return b.s2e.path.param_count() + csa_params(b.csa) + b.rfa.pw_up.param_count() +
         b.rfa.conv_block.param_count();
}

std::size_t cbam_macs(const CbamBlock& b, const Shape4& in) {
  const Shape4 vec{in.n, in.c, 1, 1};
  const Shape4 reduced = b.mlp1.out_shape(vec);
  const Shape4 stats{in.n, 2, in.h, in.w};
  return 2 * (b.mlp1.macs(vec) + b.mlp2.macs(reduced)) + b.spatial.macs(stats);
}

std::size_t cbam_params(const CbamBlock& b) {
  return b.mlp1.param_count() + b.mlp2.param_count() + b.spatial.param_count();
}

std::size_t era_macs(const EraBlock& b, const Shape4& in) {
  return b.s2e.path.macs(in) + csa_macs(b.csa, in) + cbam_macs(b.cbam, in) + b.head.macs(in);
}

std::size_t era_params(const EraBlock& b) {
  return b.s2e.path.param_count() + csa_params(b.csa) + cbam_params(b.cbam) +
         b.head.param_count();
}

std::size_t sra_macs(const SraBlock& b, const Shape4& f1) {
  return b.refine0.macs(f1) + b.refine1.macs(f1) + b.edge.macs(f1);
}

std::size_t sra_params(const SraBlock& b) {
  return b.refine0.param_count() + b.refine1.param_count() + b.edge.param_count();
}

}  // namespace

std::size_t CostReport::total_params() const {
  std::size_t t = 0;
  for (const auto& b : blocks) t += b.params;
  return t;
}

std::size_t CostReport::total_macs() const {
  std::size_t t = 0;
  for (const auto& b : blocks) t += b.macs;
  return t;
}

CostReport count_params_flops(const OdcSaNet& net, int input_size) {
  if (input_size % 32 != 0 || input_size <= 0) {
    throw std::invalid_argument("count_params_flops: input size must be a positive multiple of 32");
  }
  CostReport rep;
  rep.input_size = input_size;
  const int C = OdcSaNet::kRfbChannels;
  const int s = input_size;

  const Shape4 img{1, 3, s, s};
  const Shape4 x1{1, 64, s / 4, s / 4};
  const Shape4 x2{1, 128, s / 8, s / 8};
  const Shape4 x3{1, 320, s / 16, s / 16};
  const Shape4 x4{1, 512, s / 32, s / 32};
  const Shape4 f1{1, C, s / 4, s / 4};
  const Shape4 f3{1, C, s / 16, s / 16};
  const Shape4 f4{1, C, s / 32, s / 32};

  const auto& enc = net.encoder;
  rep.blocks.push_back({"encoder",
                        enc.stage1.param_count() + enc.stage2.param_count() +
                            enc.stage3.param_count() + enc.stage4.param_count(),
                        enc.stage1.macs(img) + enc.stage2.macs(x1) + enc.stage3.macs(x2) +
                            enc.stage4.macs(x3)});
  rep.blocks.push_back({"rfb1", rfb_params(net.rfb1), rfb_macs(net.rfb1, x1)});
  rep.blocks.push_back({"rfb3", rfb_params(net.rfb3), rfb_macs(net.rfb3, x3)});
  rep.blocks.push_back({"rfb4", rfb_params(net.rfb4), rfb_macs(net.rfb4, x4)});
  if (net.odc) {
    rep.blocks.push_back({"odc", odc_params(*net.odc), odc_macs(*net.odc, f4)});
  }
  if (net.msfa) {
    rep.blocks.push_back({"msfa", msfa_params(*net.msfa), msfa_macs(*net.msfa, f4, f3)});
  }
  if (net.bypass_msfa) {
    rep.blocks.push_back({"bypass_msfa", net.bypass_msfa->param_count(),
                          net.bypass_msfa->macs(f3)});
  }
  if (net.era) {
    rep.blocks.push_back({"era", era_params(*net.era), era_macs(*net.era, f3)});
  }
  if (net.bypass_era) {
    rep.blocks.push_back({"bypass_era", net.bypass_era->param_count(),
                          net.bypass_era->macs(f3)});
  }
  if (net.sra) {
    rep.blocks.push_back({"sra", sra_params(*net.sra), sra_macs(*net.sra, f1)});
  }

  const int oc = net.odc ? net.odc->channels : C;
  rep.odc_channels = oc;
  if (net.odc) {
    rep.odc_branch_weights = net.odc->r_branch.layers[0].weight_count() * 3 +
                             net.odc->c_branch.layers[0].weight_count() * 3;
  } else {
    rep.odc_branch_weights = 18ULL * oc * oc;
  }
  rep.dense3x3_weights = 27ULL * static_cast<std::size_t>(oc) * oc;
  return rep;
}

std::string format_cost_table(const CostReport& rep) {
  std::ostringstream os;
  os << "input size " << rep.input_size << "x" << rep.input_size << "\n";
  os << std::left << std::setw(14) << "block" << std::right << std::setw(12) << "params"
     << std::setw(16) << "macs" << "\n";
  for (const auto& b : rep.blocks) {
    os << std::left << std::setw(14) << b.name << std::right << std::setw(12) << b.params
       << std::setw(16) << b.macs << "\n";
  }
  os << std::left << std::setw(14) << "total" << std::right << std::setw(12)
     << rep.total_params() << std::setw(16) << rep.total_macs() << "\n";
  os << "odc 1x3/3x1 branch weights: " << rep.odc_branch_weights << " (18*C^2, C="
     << rep.odc_channels << ")\n";
  os << "dense 3-layer 3x3 weights:  " << rep.dense3x3_weights << " (27*C^2)\n";
  os << "branch weight ratio:        " << std::fixed << std::setprecision(4)
     << rep.branch_ratio() << "\n";
  return os.str();
}

}  // namespace odcsa
