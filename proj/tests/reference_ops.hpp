#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gpr/tensor/attention.hpp"

namespace gpr::testing {

// Straight-line per-head reference, written without the autodiff ops.
inline Matrix reference_attention(const Matrix& query, const Matrix& key, const Matrix& value, const AttentionParams& p) {
  const Index hidden = p.hidden();
  const Index d = hidden / p.heads;
  auto project = [](const Matrix& x, const Tensor& w, const Tensor& b) {
    Matrix out(x.rows(), w.cols());
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) {
        double acc = b.value()(0, j);
        for (Index k = 0; k < x.cols(); ++k) acc += x(i, k) * w.value()(k, j);
        out(i, j) = acc;
      }
    return out;
  };
  Matrix q = project(query, p.query_weight, p.query_bias);
  Matrix k = project(key, p.key_weight, p.key_bias);
  Matrix v = project(value, p.value_weight, p.value_bias);
  Matrix concat(query.rows(), hidden);
  for (int h = 0; h < p.heads; ++h) {
    for (Index i = 0; i < query.rows(); ++i) {
      std::vector<double> scores(static_cast<std::size_t>(key.rows()));
      for (Index j = 0; j < key.rows(); ++j) {
        double s = 0;
        for (Index t = 0; t < d; ++t) s += q(i, h * d + t) * k(j, h * d + t);
        scores[static_cast<std::size_t>(j)] = s / std::sqrt(static_cast<double>(d));
      }
      const double mx = *std::max_element(scores.begin(), scores.end());
      double z = 0;
      for (double& s : scores) z += (s = std::exp(s - mx));
      for (Index t = 0; t < d; ++t) {
        double acc = 0;
        for (Index j = 0; j < key.rows(); ++j) acc += scores[static_cast<std::size_t>(j)] / z * v(j, h * d + t);
        concat(i, h * d + t) = acc;
      }
    }
  }
  return project(concat, p.output_weight, p.output_bias);
}


/// Per-head weights of the same loop (head x query x key).
inline std::vector<Matrix> reference_attention_weights(const Matrix& query, const Matrix& key,
                                                       const AttentionParams& p) {
  const Index d = p.hidden() / p.heads;
  Matrix q = (query * p.query_weight.value()).rowwise() + p.query_bias.value().row(0);
  Matrix k = (key * p.key_weight.value()).rowwise() + p.key_bias.value().row(0);
  std::vector<Matrix> out;
  for (int h = 0; h < p.heads; ++h) {
    Matrix w(query.rows(), key.rows());
    for (Index i = 0; i < query.rows(); ++i) {
      double z = 0;
      for (Index j = 0; j < key.rows(); ++j) {
        double s = 0;
        for (Index t = 0; t < d; ++t) s += q(i, h * d + t) * k(j, h * d + t);
        z += (w(i, j) = std::exp(s / std::sqrt(static_cast<double>(d))));
      }
      w.row(i) /= z;
    }
    out.push_back(w);
  }
  return out;
}

}  // namespace gpr::testing
