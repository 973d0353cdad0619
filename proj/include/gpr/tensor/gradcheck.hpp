#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gpr/tensor/tensor.hpp"

namespace gpr {

struct GradCheckOptions {
  /// Central-difference half step.
  double step = 1e-3;
  /// Above this many total elements, each parameter is checked on a random
  /// subsample proportional to its size (at least a few elements each).
  std::size_t max_elements = 1000;
  std::uint64_t seed = 0;
  /// Denominator floor of the relative error, so that gradients that are
  /// zero up to round-off do not blow the ratio up.
  double scale_floor = 1e-6;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t elements_checked = 0;
};

/// Compares reverse-mode gradients of the scalar returned by `loss` against
/// central differences (Richardson-extrapolated from steps h and h/2),
/// element by element:
///   err = |analytic - numeric| / max(|analytic|, |numeric|, scale_floor).
/// `loss` must be deterministic and rebuild its graph on every call.
GradCheckReport grad_check(const std::function<Tensor()>& loss, std::vector<Tensor> params,
                           const GradCheckOptions& options = {});

}  // namespace gpr
