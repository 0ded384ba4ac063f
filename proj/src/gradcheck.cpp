#include "odcsa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odcsa {

double finite_diff_check(const ScalarFn& f, const Tensor4& x, double eps) {
  Tape tape;
  Tensor4 xt = x.clone();
  tape.track(xt);
  Tensor4 y = f(xt, &tape);
  if (!(y.shape() == Shape4{1, 1, 1, 1})) {
    throw std::invalid_argument("finite_diff_check: f must return a scalar, got " +
                                y.shape().str());
  }
  tape.backward(y);
  const std::vector<double> analytic = tape.grad(xt.node);

  Tensor4 probe = x.clone();
  double max_rel = 0.0;
  for (std::size_t i = 0; i < probe.numel(); ++i) {
    const double saved = probe.data()[i];
    probe.data()[i] = saved + eps;
    const double fp = f(probe, nullptr).data()[0];
    probe.data()[i] = saved - eps;
    const double fm = f(probe, nullptr).data()[0];
    probe.data()[i] = saved;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

}  // namespace odcsa
