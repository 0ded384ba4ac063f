#include "odcsa/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace odcsa {

double lr_at(int epoch, double lr0, int decay_every, double decay) {
  if (decay_every < 1) {
    throw std::invalid_argument("lr_at: decay interval must be >= 1 epoch");
  }
  return lr0 * std::pow(decay, epoch / decay_every);
}

void Adam::step(const std::vector<ParamRef>& params, const Tape& tape) {
  if (params.empty()) {
    throw std::invalid_argument("adam: no parameters to update");
  }
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k].assign(params[k].tensor->numel(), 0.0);
      v_[k].assign(params[k].tensor->numel(), 0.0);
    }
  } else if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter list changed size between steps");
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(hyper_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(hyper_.beta2, static_cast<double>(t_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamRef& p = params[k];
    if (p.tensor->node < 0) {
      throw std::invalid_argument("adam: parameter '" + p.name +
                                  "' has no gradient; bind the model and run backward first");
    }
    const std::vector<double>& g = tape.grad(p.tensor->node);
    double* value = p.tensor->data();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = hyper_.beta1 * m[i] + (1.0 - hyper_.beta1) * g[i];
      v[i] = hyper_.beta2 * v[i] + (1.0 - hyper_.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= hyper_.lr * mhat / (std::sqrt(vhat) + hyper_.eps);
    }
  }
}

}  // namespace odcsa
