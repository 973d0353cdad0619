#include "gpr/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/rng.hpp"

namespace gpr {

GradCheckReport grad_check(const std::function<Tensor()>& loss, std::vector<Tensor> params,
                           const GradCheckOptions& options) {
  for (auto& p : params) {
    p.set_requires_grad(true);
    p.zero_grad();
  }
  const Tensor out = loss();
  if (out.size() != 1) {
    throw DimensionError("grad_check needs a scalar output, got " + std::to_string(out.rows()) + "x" +
                         std::to_string(out.cols()));
  }
  out.backward();

  std::size_t total = 0;
  for (const auto& p : params) total += static_cast<std::size_t>(p.size());

  Rng rng(options.seed);
  GradCheckReport report;
  report.worst_index = -1;
  auto evaluate = [&]() {
    NoGradGuard no_grad;
    return loss().item();
  };

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    const Index n = p.size();
    std::vector<Index> indices(static_cast<std::size_t>(n));
    std::iota(indices.begin(), indices.end(), Index{0});
    if (total > options.max_elements) {
      const auto share = static_cast<std::size_t>(
          std::ceil(static_cast<double>(options.max_elements) * static_cast<double>(n) / static_cast<double>(total)));
      const std::size_t keep = std::min<std::size_t>(indices.size(), std::max<std::size_t>(share, 4));
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(keep);
    }
    const Matrix analytic = p.grad();
    for (Index idx : indices) {
      double& slot = p.mutable_value().data()[idx];
      const double saved = slot;
      auto central = [&](double h) {
        slot = saved + h;
        const double up = evaluate();
        slot = saved - h;
        const double down = evaluate();
        slot = saved;
        return (up - down) / (2.0 * h);
      };
      // Richardson extrapolation cancels the O(h^2) truncation term.
      const double numeric = (4.0 * central(0.5 * options.step) - central(options.step)) / 3.0;
      const double a = analytic.data()[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.scale_floor});
      const double err = std::abs(a - numeric) / denom;
      ++report.elements_checked;
      if (err > report.max_relative_error || report.worst_index < 0) {
        report.max_relative_error = err;
        report.worst_parameter = p.name().empty() ? "param#" + std::to_string(pi) : p.name();
        report.worst_index = idx;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace gpr
