#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace sdts {

/// All numeric work runs in 64-bit floats.
using Scalar = double;

/// Flat dense storage. Layout is row-major NCHW with W fastest.
using Array = Eigen::ArrayX<Scalar>;

struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::int64_t elems() const {
    return std::int64_t(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

inline std::int64_t flat_index(const Shape& s, int n, int c, int y, int x) {
  return ((std::int64_t(n) * s.c + c) * s.h + y) * s.w + x;
}

namespace detail {

struct Node {
  Shape shape;
  Array value;
  Array grad;  // empty until a backward pass accumulates into it
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != value.size()) grad = Array::Zero(value.size());
  }
};

}  // namespace detail

/// Shared handle to one value (and, during training, its gradient).
/// Copies alias the same storage; ops never mutate their inputs.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor constant(const Shape& shape, Scalar v, bool requires_grad = false);
  static Tensor from_data(const Shape& shape, Array data, bool requires_grad = false);
  static Tensor scalar(Scalar v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::int64_t size() const { return node_->shape.elems(); }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  const Array& value() const { return node_->value; }
  Array& mutable_value() { return node_->value; }

  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  const Array& grad() const;
  void zero_grad();

  /// Value of a single-element tensor.
  Scalar item() const;
  Scalar at(int n, int c, int y, int x) const {
    return node_->value[flat_index(node_->shape, n, c, y, x)];
  }
  void set(int n, int c, int y, int x, Scalar v) {
    node_->value[flat_index(node_->shape, n, c, y, x)] = v;
  }

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

/// Named parameter list used when walking a model for checkpointing.
using NamedParams = std::vector<std::pair<std::string, Tensor>>;

/// Reverse-mode tape. While an instance is alive it is the active graph of
/// its thread and every op records one backward step onto it, in execution
/// order. backward() replays the steps in exact reverse and then clears the
/// tape; a graph supports exactly one backward pass. With no active graph,
/// ops run forward-only.
class Graph {
 public:
  Graph();
  ~Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  static Graph* active();

  void record(std::function<void()> step);
  void backward(const Tensor& loss);
  std::size_t recorded_steps() const { return tape_.size(); }

 private:
  std::vector<std::function<void()>> tape_;
  bool consumed_ = false;
  Graph* prev_ = nullptr;
};

}  // namespace sdts
