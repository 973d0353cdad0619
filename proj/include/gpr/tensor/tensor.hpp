#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gpr/tensor/types.hpp"

namespace gpr {

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows into it
  bool requires_grad = false;
  std::string name;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  void accumulate(const Matrix& g);
  template <typename Derived>
  void accumulate(const Eigen::MatrixBase<Derived>& g) {
    accumulate(Matrix(g));
  }
  Matrix& grad_buffer();
};

}  // namespace detail

/// Disables graph recording on the current thread for its lifetime.
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

/// A 2-D dense value that is also a node of a reverse-mode computation graph.
/// Vectors are 1 x N rows. Copies share the underlying node.
class Tensor {
 public:
  using BackwardFn = std::function<void(detail::Node&)>;

  Tensor() = default;
  explicit Tensor(Matrix value, bool requires_grad = false);

  /// Trainable leaf.
  static Tensor parameter(Matrix value, std::string name);

  /// Result of an operation over `parents`. `backward` receives the result
  /// node; its grad is populated and it must accumulate into every parent
  /// that requires grad. Recording is skipped when grad is disabled or no
  /// parent requires it.
  static Tensor from_op(Matrix value, const std::vector<Tensor>& parents, BackwardFn backward);

  bool defined() const { return node_ != nullptr; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Index size() const { return node_->value.size(); }
  std::vector<Index> shape() const { return {rows(), cols()}; }

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  double item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() > 0; }
  const Matrix& grad() const { return node_->grad; }
  Matrix& mutable_grad() { return node_->grad_buffer(); }
  void zero_grad();
  void clear_grad() { node_->grad.resize(0, 0); }

  const std::string& name() const { return node_->name; }
  void set_name(std::string name) { node_->name = std::move(name); }

  /// Reverse sweep from this scalar through the recorded graph.
  void backward() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Ordered name -> parameter registry.
class ParamSet {
 public:
  void add(const std::string& name, Tensor param);
  void append(const std::string& prefix, const ParamSet& other);

  const std::vector<std::pair<std::string, Tensor>>& entries() const { return entries_; }
  std::vector<std::pair<std::string, Tensor>>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const;

  void zero_grad();
  std::size_t element_count() const;

  /// Deep copy of all values (an immutable snapshot).
  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix>& values);

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

}  // namespace gpr
