#include "radgest/tensor.hpp"

#include <cmath>
#include <sstream>

#include "radgest/error.hpp"

namespace radgest {

namespace {

thread_local GradTape* g_active_tape = nullptr;

void check_finite([[maybe_unused]] const std::vector<double>& data) {
#ifndef NDEBUG
  for (double v : data) {
    if (!std::isfinite(v)) throw StateError("non-finite value produced by a tensor op");
  }
#endif
}

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : node_(std::make_shared<TensorNode>()) {
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 0) throw DimensionError("tensor axis " + std::to_string(i) + " has size 0");
  }
  node_->data.assign(shape_numel(shape), fill);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : node_(std::make_shared<TensorNode>()) {
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == 0) throw DimensionError("tensor axis " + std::to_string(i) + " has size 0");
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_to_string(shape) + " does not match " +
                         std::to_string(data.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->data = std::move(data);
}

Tensor make_result(Shape shape, std::vector<double> data, bool requires_grad) {
  check_finite(data);
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

const Shape& Tensor::shape() const {
  if (!node_) throw StateError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for rank " +
                         std::to_string(s.size()));
  }
  return s[axis];
}

std::size_t Tensor::numel() const { return node_ ? node_->data.size() : 0; }

std::span<const double> Tensor::data() const {
  if (!node_) throw StateError("use of an undefined tensor");
  return node_->data;
}

std::span<double> Tensor::mutable_data() {
  if (!node_) throw StateError("use of an undefined tensor");
  return node_->data;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->data.size(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw StateError("tensor has no gradient");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  if (!node_) throw StateError("use of an undefined tensor");
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.assign(node_->data.size(), 0.0);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
  if (!node_) throw StateError("use of an undefined tensor");
  node_->requires_grad = flag;
  return *this;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
  }
  return node_->data[0];
}

Tensor Tensor::detach() const { return Tensor(shape(), node_->data); }

GradTape::GradTape() : previous_(g_active_tape) { g_active_tape = this; }

GradTape::~GradTape() {
  if (g_active_tape == this) g_active_tape = previous_;
}

GradTape* GradTape::active() { return g_active_tape; }

void GradTape::record(std::function<void()> backward_fn) {
  if (consumed_) throw StateError("recording onto a consumed tape");
  nodes_.push_back(std::move(backward_fn));
}

void GradTape::backward(const Tensor& loss) {
  if (consumed_) throw StateError("backward called on a consumed tape");
  if (loss.numel() != 1) {
    throw ArgumentError("backward requires a scalar loss, got shape " +
                        shape_to_string(loss.shape()));
  }
  consumed_ = true;
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  nodes_.clear();
  nodes_.shrink_to_fit();
}

NoGradScope::NoGradScope() : saved_(g_active_tape) { g_active_tape = nullptr; }
NoGradScope::~NoGradScope() { g_active_tape = saved_; }

bool should_record(std::initializer_list<const Tensor*> inputs) {
  if (!g_active_tape) return false;
  for (const Tensor* t : inputs) {
    if (t && t->requires_grad()) return true;
  }
  return false;
}

bool should_record(std::span<const Tensor> inputs) {
  if (!g_active_tape) return false;
  for (const Tensor& t : inputs) {
    if (t.requires_grad()) return true;
  }
  return false;
}

}  // namespace radgest
