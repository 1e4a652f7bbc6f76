#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace radgest {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Storage shared by every handle to the same tensor value.
struct TensorNode {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a backward pass reaches the node
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

// Dense row-major real tensor with optional gradient. Copies are shallow:
// two Tensor handles may refer to the same node (this is how parameters are
// shared between a ParamStore and the ops that read them).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor scalar(double value) { return Tensor(Shape{1}, value); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct mutable access. Only meaningful for leaves (parameters, inputs);
  // mutating a recorded intermediate invalidates its gradient.
  std::span<double> mutable_data();

  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  bool requires_grad() const;
  Tensor& set_requires_grad(bool flag);

  // Value of a single-element tensor.
  double item() const;

  // Deep copy of the data, detached from any gradient bookkeeping.
  Tensor detach() const;

  const std::shared_ptr<TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<TensorNode> node_;

  friend Tensor make_result(Shape shape, std::vector<double> data, bool requires_grad);
};

// Creates an op output node. requires_grad is set when the op is recorded.
Tensor make_result(Shape shape, std::vector<double> data, bool requires_grad);

// Records backward closures in execution order. Constructing a tape makes it
// the active tape of the calling thread until it is destroyed; ops executed
// while a tape is active and any input requires a gradient are recorded.
class GradTape {
 public:
  GradTape();
  ~GradTape();
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  // Seeds d(loss)/d(loss) = 1 and runs the recorded closures in strict reverse
  // order. Gradients accumulate into every reachable requires_grad node.
  // Throws ArgumentError for a non-scalar loss and StateError when called twice.
  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

  void record(std::function<void()> backward_fn);

  static GradTape* active();

 private:
  std::vector<std::function<void()>> nodes_;
  bool consumed_ = false;
  GradTape* previous_ = nullptr;
};

// Disables recording on this thread for its lifetime.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  GradTape* saved_;
};

// True when an active tape exists and at least one input requires a gradient.
bool should_record(std::initializer_list<const Tensor*> inputs);
bool should_record(std::span<const Tensor> inputs);

}  // namespace radgest
