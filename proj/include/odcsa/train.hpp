#ifndef ODCSA_TRAIN_HPP
#define ODCSA_TRAIN_HPP

#include <iosfwd>
#include <vector>

#include "odcsa/config.hpp"
#include "odcsa/dataset.hpp"
#include "odcsa/loss.hpp"
#include "odcsa/metrics.hpp"
#include "odcsa/net.hpp"

namespace odcsa {

struct StepLog {
  int epoch = 0;
  long step = 0;
  double lr = 0.0;
  double bce_w = 0.0;
  double iou_w = 0.0;
  double total = 0.0;
};

// Deterministic training loop: per-epoch shuffle, one multiscale size pick
// per batch, full forward/backward and an Adam update per step. Stops after
// max_steps when >= 0. When runlog is given, one CSV row is written per step
// and the stream is flushed at each epoch end.
std::vector<StepLog> train_model(OdcSaNet& net, const std::vector<Sample>& data,
                                 const Config& cfg, long max_steps = -1,
                                 std::ostream* runlog = nullptr);

void write_runlog_header(std::ostream& os);
void write_runlog_row(std::ostream& os, const StepLog& row);

// sigmoid(p_full) at the configured size, resized back to the sample's
// native resolution.
Tensor4 predict_prob(const OdcSaNet& net, const Sample& sample, int size);

PredPair pair_from(const Tensor4& prob, const Tensor4& mask);

MetricReport evaluate_model(const OdcSaNet& net, const std::vector<Sample>& data, int size);

}  // namespace odcsa

#endif
