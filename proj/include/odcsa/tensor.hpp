#ifndef ODCSA_TENSOR_HPP
#define ODCSA_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace odcsa {

struct Shape4 {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  bool operator==(const Shape4&) const = default;
  std::string str() const;
};

// Rank-4 tensor (batch, channel, height, width), double precision.
// Handle semantics: copies share the underlying buffer. Operations never
// mutate their inputs; the only sanctioned in-place writes are parameter
// updates between training steps and explicit fills before an op graph is
// built.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 s)
      : shape_(s), buf_(std::make_shared<std::vector<double>>(s.numel(), 0.0)) {}

  static Tensor4 full(Shape4 s, double value);
  static Tensor4 from(Shape4 s, std::vector<double> values);

  const Shape4& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t numel() const { return shape_.numel(); }
  bool empty() const { return buf_ == nullptr; }

  double* data() { return buf_->data(); }
  const double* data() const { return buf_->data(); }
  std::vector<double>& vec() { return *buf_; }
  const std::vector<double>& vec() const { return *buf_; }

  double& at(int in, int ic, int iy, int ix) {
    return (*buf_)[idx(in, ic, iy, ix)];
  }
  double at(int in, int ic, int iy, int ix) const {
    return (*buf_)[idx(in, ic, iy, ix)];
  }

  std::size_t idx(int in, int ic, int iy, int ix) const {
    return ((static_cast<std::size_t>(in) * shape_.c + ic) * shape_.h + iy) * shape_.w + ix;
  }

  // Deep copy of the buffer (new storage, untracked).
  Tensor4 clone() const;

  bool all_finite() const;

  // Tape slot for reverse-mode differentiation; -1 when untracked.
  int node = -1;

 private:
  Shape4 shape_;
  std::shared_ptr<std::vector<double>> buf_;
};

// Reverse-mode tape. Operations are recorded in execution order, which is a
// topological order by construction; backward() replays them in reverse and
// sums gradients of shared inputs. Single-threaded per instance.
class Tape {
 public:
  // Allocates a zero-initialized gradient slot.
  int alloc_slot(std::size_t size);

  // Marks t as a leaf (input or parameter); returns its node id.
  int track(Tensor4& t);

  void record(std::function<void(Tape&)> backward_step);

  // loss must be a (1,1,1,1) tensor recorded on this tape.
  void backward(const Tensor4& loss);

  std::vector<double>& grad(int node);
  const std::vector<double>& grad(int node) const;

  std::size_t num_slots() const { return grads_.size(); }
  std::size_t num_steps() const { return steps_.size(); }

 private:
  std::vector<std::vector<double>> grads_;
  std::vector<std::function<void(Tape&)>> steps_;
};

}  // namespace odcsa

#endif
