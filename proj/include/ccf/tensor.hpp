#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ccf {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One vertex of the define-by-run graph. Non-leaf nodes own a backward
// closure that reads `grad` and accumulates into the grads of `inputs`.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward_fn;

  std::vector<double>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

// Dense row-major float64 array with reverse-mode autodiff. Copies share the
// underlying node; values are immutable once recorded, except that leaves
// (parameters) may be updated in place by an optimizer between steps.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor parameter(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> data() const { return node_->value; }
  // For leaves only: optimizer updates and test perturbations.
  std::span<double> mutable_data() { return node_->value; }
  double item() const;
  double operator[](std::size_t flat_index) const { return node_->value[flat_index]; }

  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  // Zeros of the right size when no gradient has been accumulated.
  std::vector<double> grad() const;
  void zero_grad() { node_->grad.clear(); }

  // Same values, no history.
  Tensor detach() const;

  // Seeds d(this)/d(this) = 1 and propagates to every requires_grad ancestor.
  // Leaf gradients accumulate across calls; intermediate gradients do not.
  void backward() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<detail::Node> node_;
};

// While alive on the current thread, ops record no history.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

namespace detail {

// Builds an op result. The closure is dropped when no input needs a gradient.
Tensor record(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
              std::function<void(Node&)> backward_fn);

// Accumulation target for input i, or nullptr if it does not need a gradient.
double* grad_target(Node& self, std::size_t input_index);

}  // namespace detail

}  // namespace ccf
