#include "gpr/tensor/optim.hpp"

#include <cmath>
#include <utility>

#include "gpr/tensor/errors.hpp"

namespace gpr {

Adam::Adam(const ParamSet& params, AdamConfig config) : config_(config) {
  if (config.learning_rate < 0 || config.beta1 < 0 || config.beta1 >= 1 || config.beta2 < 0 || config.beta2 >= 1 ||
      config.epsilon <= 0 || config.weight_decay < 0) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  for (const auto& [name, t] : params.entries()) {
    first_.push_back(Matrix::Zero(t.rows(), t.cols()));
    second_.push_back(Matrix::Zero(t.rows(), t.cols()));
  }
}

void Adam::step(ParamSet& params) {
  if (params.size() != first_.size()) throw DimensionError("optimizer state does not match parameter set");
  for (const auto& [name, t] : std::as_const(params).entries()) {
    if (!t.has_grad()) throw LookupError("parameter '" + name + "' has no gradient");
  }
  ++step_;
  const double correction1 = config_.bias_correction ? 1.0 - std::pow(config_.beta1, static_cast<double>(step_)) : 1.0;
  const double correction2 = config_.bias_correction ? 1.0 - std::pow(config_.beta2, static_cast<double>(step_)) : 1.0;
  const double lr = config_.learning_rate;
  std::size_t i = 0;
  for (auto& entry : params.entries()) {
    Tensor& param = entry.second;
    const Matrix& grad = param.grad();
    first_[i] = config_.beta1 * first_[i] + (1.0 - config_.beta1) * grad;
    second_[i] = config_.beta2 * second_[i] + (1.0 - config_.beta2) * grad.cwiseAbs2();
    Matrix& value = param.mutable_value();
    const auto m_hat = first_[i].array() / correction1;
    const auto v_hat = second_[i].array() / correction2;
    value.array() -= lr * (m_hat / (v_hat.sqrt() + config_.epsilon)) + lr * config_.weight_decay * value.array();
    ++i;
  }
}

}  // namespace gpr
