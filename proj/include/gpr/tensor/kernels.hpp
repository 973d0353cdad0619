#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/types.hpp"

// Plain (non-differentiable) numeric kernels shared by the autodiff ops and by
// evaluation-only code paths. All are templated on the Eigen expression type.

namespace gpr::kernels {

template <typename Derived>
std::string shape_string(const Eigen::DenseBase<Derived>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

/// Max-stabilized softmax of each row. Positions where `mask` is false get
/// exactly zero. `mask` may be empty (all positions participate), the same
/// shape as `x`, or a single row broadcast to every row.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x, const Mask& mask = Mask()) {
  using Scalar = typename Derived::Scalar;
  const bool broadcast = mask.size() > 0 && mask.rows() == 1;
  if (mask.size() > 0 && (mask.cols() != x.cols() || !(broadcast || mask.rows() == x.rows()))) {
    throw DimensionError("softmax mask shape " + shape_string(mask) + " does not cover input " + shape_string(x));
  }
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const Index mr = broadcast ? 0 : r;
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    bool any = false;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask.size() > 0 && !mask(mr, c)) continue;
      any = true;
      best = std::max<Scalar>(best, x(r, c));
    }
    if (!any) throw DegenerateMaskError("softmax row " + std::to_string(r) + " is fully masked");
    Scalar total = 0;
    for (Index c = 0; c < x.cols(); ++c) {
      if (mask.size() > 0 && !mask(mr, c)) continue;
      out(r, c) = std::exp(x(r, c) - best);
      total += out(r, c);
    }
    out.row(r) /= total;
  }
  return out;
}

/// Mean of -ln p[gold] with probabilities clipped to [eps, 1-eps].
template <typename Derived, typename Labels>
double mean_negative_log_likelihood(const Eigen::MatrixBase<Derived>& probs, const Labels& gold, double eps = 1e-15) {
  double total = 0;
  for (Index r = 0; r < probs.rows(); ++r) {
    const double p = std::clamp<double>(probs(r, gold[static_cast<std::size_t>(r)]), eps, 1.0 - eps);
    total -= std::log(p);
  }
  return probs.rows() == 0 ? 0.0 : total / static_cast<double>(probs.rows());
}

template <typename Scalar>
Scalar gelu(Scalar x) {
  constexpr Scalar kAlpha = 0.7978845608028654;  // sqrt(2/pi)
  const Scalar inner = kAlpha * (x + Scalar(0.044715) * x * x * x);
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(inner));
}

template <typename Scalar>
Scalar gelu_derivative(Scalar x) {
  constexpr Scalar kAlpha = 0.7978845608028654;
  const Scalar inner = kAlpha * (x + Scalar(0.044715) * x * x * x);
  const Scalar t = std::tanh(inner);
  return Scalar(0.5) * (Scalar(1) + t) + Scalar(0.5) * x * (Scalar(1) - t * t) * kAlpha *
                                                 (Scalar(1) + Scalar(3) * Scalar(0.044715) * x * x);
}

}  // namespace gpr::kernels
