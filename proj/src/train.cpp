#include "odcsa/train.hpp"

#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "odcsa/optim.hpp"
#include "odcsa/ops.hpp"

namespace odcsa {

namespace {

// One batch at a common size; masks stay binary via nearest-neighbor.
void stack_batch(const std::vector<Sample>& data, const std::vector<std::size_t>& ids, int size,
                 Tensor4& images, Tensor4& masks) {
  const int b = static_cast<int>(ids.size());
  images = Tensor4(Shape4{b, 3, size, size});
  masks = Tensor4(Shape4{b, 1, size, size});
  for (int k = 0; k < b; ++k) {
    const Sample s = resize_sample(data[ids[static_cast<std::size_t>(k)]], size);
    const std::size_t img_elems = s.image.numel();
    std::copy(s.image.data(), s.image.data() + img_elems, images.data() + k * img_elems);
    const std::size_t mask_elems = s.mask.numel();
    std::copy(s.mask.data(), s.mask.data() + mask_elems, masks.data() + k * mask_elems);
  }
}

}  // namespace

void write_runlog_header(std::ostream& os) { os << "epoch,step,lr,bce_w,iou_w,total\n"; }

void write_runlog_row(std::ostream& os, const StepLog& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%ld,%.8g,%.10e,%.10e,%.10e\n", row.epoch, row.step, row.lr,
                row.bce_w, row.iou_w, row.total);
  os << buf;
}

std::vector<StepLog> train_model(OdcSaNet& net, const std::vector<Sample>& data,
                                 const Config& cfg, long max_steps, std::ostream* runlog) {
  if (data.empty()) {
    throw std::invalid_argument("train_model: empty dataset");
  }
  Prng order_rng(cfg.seed + 0x9E3779B9ULL);  // ordering/scale stream, separate from init
  Adam adam({cfg.lr, 0.9, 0.999, 1e-8});
  const WeightMapParams wparams{cfg.loss_weight_window, cfg.loss_weight_amp};

  std::vector<StepLog> logs;
  if (runlog) write_runlog_header(*runlog);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_at(epoch, cfg.lr, cfg.lr_decay_every, cfg.lr_decay);
    adam.set_lr(lr);
    order_rng.shuffle(order);

    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch));
      const std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      const int size = multiscale_pick(order_rng, cfg.size, cfg.scales);

      Tensor4 images, masks;
      stack_batch(data, ids, size, images, masks);

      Tape tape;
      net.bind(tape);
      const NetTrace trace = net.forward(images, &tape);
      const TotalLoss loss = total_loss(trace.z_full, trace.p_full, masks, wparams, &tape);
      tape.backward(loss.value);
      adam.step(net.params(), tape);
      net.unbind();

      StepLog row{epoch, step, lr, loss.report.bce_w(), loss.report.iou_w(),
                  loss.report.total()};
      logs.push_back(row);
      if (runlog) write_runlog_row(*runlog, row);

      ++step;
      if (max_steps >= 0 && step >= max_steps) {
        if (runlog) runlog->flush();
        return logs;
      }
    }
    if (runlog) runlog->flush();
  }
  return logs;
}

Tensor4 predict_prob(const OdcSaNet& net, const Sample& sample, int size) {
  const Sample resized = resize_sample(sample, size);
  const NetTrace trace = net.forward(resized.image, nullptr);
  Tensor4 prob = sigmoid(trace.p_full, nullptr);
  if (prob.h() != sample.image.h() || prob.w() != sample.image.w()) {
    prob = bilinear_resize(prob, sample.image.h(), sample.image.w(), nullptr);
  }
  return prob;
}

PredPair pair_from(const Tensor4& prob, const Tensor4& mask) {
  if (prob.h() != mask.h() || prob.w() != mask.w()) {
    throw std::invalid_argument("pair_from: prediction/mask size mismatch");
  }
  PredPair pair;
  pair.h = prob.h();
  pair.w = prob.w();
  pair.pred.assign(prob.data(), prob.data() + prob.numel());
  pair.gt.resize(mask.numel());
  for (std::size_t i = 0; i < mask.numel(); ++i) {
    pair.gt[i] = mask.data()[i] != 0.0 ? 1 : 0;
  }
  return pair;
}

MetricReport evaluate_model(const OdcSaNet& net, const std::vector<Sample>& data, int size) {
  std::vector<PredPair> pairs;
  pairs.reserve(data.size());
  for (const auto& sample : data) {
    pairs.push_back(pair_from(predict_prob(net, sample, size), sample.mask));
  }
  return evaluate_dataset(pairs);
}

}  // namespace odcsa
