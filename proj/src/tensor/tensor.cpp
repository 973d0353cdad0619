#include "gpr/tensor/tensor.hpp"

#include <unordered_set>

#include "gpr/tensor/errors.hpp"

namespace gpr {

namespace {
thread_local bool g_grad_enabled = true;
}

namespace detail {

Matrix& Node::grad_buffer() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) grad = Matrix::Zero(value.rows(), value.cols());
  return grad;
}

void Node::accumulate(const Matrix& g) {
  if (!requires_grad) return;
  if (g.rows() != value.rows() || g.cols() != value.cols()) {
    throw DimensionError("gradient shape " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                         " does not match value shape " + std::to_string(value.rows()) + "x" +
                         std::to_string(value.cols()) + (name.empty() ? "" : " of " + name));
  }
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

}  // namespace detail

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor::Tensor(Matrix value, bool requires_grad) : node_(std::make_shared<detail::Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::parameter(Matrix value, std::string name) {
  Tensor t(std::move(value), true);
  t.node_->name = std::move(name);
  return t;
}

Tensor Tensor::from_op(Matrix value, const std::vector<Tensor>& parents, BackwardFn backward) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (const auto& p : parents) node->parents.push_back(p.node_);
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError("item() on tensor of shape " + std::to_string(rows()) + "x" + std::to_string(cols()));
  }
  return node_->value(0, 0);
}

void Tensor::zero_grad() { node_->grad = Matrix::Zero(rows(), cols()); }

void Tensor::backward() const {
  if (size() != 1) {
    throw DimensionError("backward() requires a scalar output, got " + std::to_string(rows()) + "x" +
                         std::to_string(cols()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && !parent->parents.empty() && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (node->backward && node->grad.size() > 0) node->backward(*node);
  }
  // Interior gradients are no longer needed; leaves keep theirs.
  for (detail::Node* node : order) {
    if (!node->parents.empty()) node->grad.resize(0, 0);
  }
}

void ParamSet::add(const std::string& name, Tensor param) {
  if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  if (param.name().empty()) param.set_name(name);
  entries_.emplace_back(name, std::move(param));
}

void ParamSet::append(const std::string& prefix, const ParamSet& other) {
  for (const auto& [name, t] : other.entries_) add(prefix + name, t);
}

Tensor& ParamSet::at(const std::string& name) {
  for (auto& [n, t] : entries_)
    if (n == name) return t;
  throw LookupError("no parameter named '" + name + "'");
}

const Tensor& ParamSet::at(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw LookupError("no parameter named '" + name + "'");
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return true;
  return false;
}

void ParamSet::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

std::size_t ParamSet::element_count() const {
  std::size_t total = 0;
  for (const auto& [n, t] : entries_) total += static_cast<std::size_t>(t.size());
  return total;
}

std::vector<Matrix> ParamSet::snapshot() const {
  std::vector<Matrix> out;
  out.reserve(entries_.size());
  for (const auto& [n, t] : entries_) out.push_back(t.value());
  return out;
}

void ParamSet::restore(const std::vector<Matrix>& values) {
  if (values.size() != entries_.size()) throw DimensionError("snapshot size does not match parameter set");
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& t = entries_[i].second;
    if (values[i].rows() != t.rows() || values[i].cols() != t.cols())
      throw DimensionError("snapshot shape mismatch for " + entries_[i].first);
    t.mutable_value() = values[i];
  }
}

}  // namespace gpr
