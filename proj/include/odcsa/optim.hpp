#ifndef ODCSA_OPTIM_HPP
#define ODCSA_OPTIM_HPP

#include <vector>

#include "odcsa/blocks.hpp"
#include "odcsa/tensor.hpp"

namespace odcsa {

// Step-decayed schedule: lr0 * decay^floor(epoch / every).
double lr_at(int epoch, double lr0 = 1e-4, int decay_every = 30, double decay = 0.1);

class Adam {
 public:
  struct Hyper {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  explicit Adam(Hyper hyper) : hyper_(hyper) {}

  // Bias-corrected moment update. Parameters must be bound to the tape the
  // gradients were accumulated on; throws when a parameter has no gradient.
  // The param list must keep a stable order across steps.
  void step(const std::vector<ParamRef>& params, const Tape& tape);

  void set_lr(double lr) { hyper_.lr = lr; }
  double lr() const { return hyper_.lr; }
  long step_count() const { return t_; }

 private:
  Hyper hyper_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace odcsa

#endif
