#include "odcsa/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace odcsa {

std::string Shape4::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

Tensor4 Tensor4::full(Shape4 s, double value) {
  Tensor4 t(s);
  for (auto& v : t.vec()) v = value;
  return t;
}

Tensor4 Tensor4::from(Shape4 s, std::vector<double> values) {
  if (values.size() != s.numel()) {
    throw std::invalid_argument("Tensor4::from: got " + std::to_string(values.size()) +
                                " values for shape " + s.str());
  }
  Tensor4 t(s);
  t.vec() = std::move(values);
  return t;
}

Tensor4 Tensor4::clone() const {
  Tensor4 t(shape_);
  t.vec() = vec();
  return t;
}

bool Tensor4::all_finite() const {
  for (double v : vec()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

int Tape::alloc_slot(std::size_t size) {
  grads_.emplace_back(size, 0.0);
  return static_cast<int>(grads_.size()) - 1;
}

int Tape::track(Tensor4& t) {
  t.node = alloc_slot(t.numel());
  return t.node;
}

void Tape::record(std::function<void(Tape&)> backward_step) {
  steps_.push_back(std::move(backward_step));
}

void Tape::backward(const Tensor4& loss) {
  if (loss.node < 0) {
    throw std::invalid_argument("Tape::backward: loss tensor is not recorded on a tape");
  }
  if (!(loss.shape() == Shape4{1, 1, 1, 1})) {
    throw std::invalid_argument("Tape::backward: loss must have shape (1,1,1,1), got " +
                                loss.shape().str());
  }
  grads_[static_cast<std::size_t>(loss.node)][0] = 1.0;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    (*it)(*this);
  }
}

std::vector<double>& Tape::grad(int node) {
  if (node < 0 || static_cast<std::size_t>(node) >= grads_.size()) {
    throw std::out_of_range("Tape::grad: invalid node id " + std::to_string(node));
  }
  return grads_[static_cast<std::size_t>(node)];
}

const std::vector<double>& Tape::grad(int node) const {
  return const_cast<Tape*>(this)->grad(node);
}

}  // namespace odcsa
