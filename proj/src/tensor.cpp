#include "sdts/tensor.hpp"

#include <sstream>
#include <stdexcept>

namespace sdts {

namespace {
thread_local Graph* g_active_graph = nullptr;
}

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return constant(shape, 0.0, requires_grad);
}

Tensor Tensor::constant(const Shape& shape, Scalar v, bool requires_grad) {
  return from_data(shape, Array::Constant(shape.elems(), v), requires_grad);
}

Tensor Tensor::from_data(const Shape& shape, Array data, bool requires_grad) {
  if (shape.n <= 0 || shape.c <= 0 || shape.h <= 0 || shape.w <= 0)
    throw std::invalid_argument("tensor shape must be positive, got " + shape.str());
  if (data.size() != shape.elems())
    throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                " does not match shape " + shape.str());
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->value = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::scalar(Scalar v) {
  return constant(Shape{1, 1, 1, 1}, v);
}

const Array& Tensor::grad() const {
  if (!has_grad()) throw std::runtime_error("tensor has no gradient buffer");
  return node_->grad;
}

void Tensor::zero_grad() {
  node_->ensure_grad();
  node_->grad.setZero();
}

Scalar Tensor::item() const {
  if (size() != 1)
    throw std::invalid_argument("item() requires a single-element tensor, got shape " +
                                shape().str());
  return node_->value[0];
}

Graph::Graph() {
  prev_ = g_active_graph;
  g_active_graph = this;
}

Graph::~Graph() {
  g_active_graph = prev_;
}

Graph* Graph::active() {
  return g_active_graph;
}

void Graph::record(std::function<void()> step) {
  tape_.push_back(std::move(step));
}

void Graph::backward(const Tensor& loss) {
  if (consumed_) throw std::runtime_error("graph already consumed by a backward pass");
  if (!loss.defined() || loss.size() != 1)
    throw std::invalid_argument("backward requires a scalar loss");
  auto& node = *loss.node();
  node.ensure_grad();
  node.grad[0] += 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
  tape_.clear();
  consumed_ = true;
}

}  // namespace sdts
