#include "gpr/tensor/ops.hpp"

#include <algorithm>
#include <cmath>

#include "gpr/tensor/errors.hpp"
#include "gpr/tensor/kernels.hpp"

namespace gpr {

using kernels::shape_string;

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.value()) + " vs " +
                         shape_string(b.value()));
  }
}

detail::Node& parent(detail::Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_string(a.value()) + " * " +
                         shape_string(b.value()));
  }
  return Tensor::from_op(a.value() * b.value(), {a, b}, [](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad * pb.value.transpose());
    if (pb.requires_grad) pb.accumulate(pa.value.transpose() * self.grad);
  });
}

Tensor transpose(const Tensor& x) {
  return Tensor::from_op(x.value().transpose(), {x},
                         [](detail::Node& self) { parent(self, 0).accumulate(self.grad.transpose()); });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  return Tensor::from_op(a.value() + b.value(), {a, b}, [](detail::Node& self) {
    parent(self, 0).accumulate(self.grad);
    parent(self, 1).accumulate(self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  return Tensor::from_op(a.value() - b.value(), {a, b}, [](detail::Node& self) {
    parent(self, 0).accumulate(self.grad);
    parent(self, 1).accumulate(-self.grad);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Matrix out = a.value().cwiseProduct(b.value());
  return Tensor::from_op(std::move(out), {a, b}, [](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    if (pa.requires_grad) pa.accumulate(self.grad.cwiseProduct(pb.value));
    if (pb.requires_grad) pb.accumulate(self.grad.cwiseProduct(pa.value));
  });
}

Tensor scale(const Tensor& x, double factor) {
  return Tensor::from_op(x.value() * factor, {x},
                         [factor](detail::Node& self) { parent(self, 0).accumulate(self.grad * factor); });
}

Tensor add_row(const Tensor& x, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != x.cols()) {
    throw DimensionError("add_row: bias " + shape_string(row.value()) + " does not broadcast over " +
                         shape_string(x.value()));
  }
  Matrix out = x.value().rowwise() + row.value().row(0);
  return Tensor::from_op(std::move(out), {x, row}, [](detail::Node& self) {
    parent(self, 0).accumulate(self.grad);
    auto& pr = parent(self, 1);
    if (pr.requires_grad) pr.accumulate(self.grad.colwise().sum());
  });
}

Tensor tanh(const Tensor& x) {
  Matrix out = x.value().array().tanh().matrix();
  return Tensor::from_op(std::move(out), {x}, [](detail::Node& self) {
    Matrix local = (1.0 - self.value.array().square()).matrix();
    parent(self, 0).accumulate(self.grad.cwiseProduct(local));
  });
}

Tensor gelu(const Tensor& x) {
  Matrix out = x.value().unaryExpr([](double v) { return kernels::gelu(v); });
  return Tensor::from_op(std::move(out), {x}, [](detail::Node& self) {
    auto& px = parent(self, 0);
    Matrix local = px.value.unaryExpr([](double v) { return kernels::gelu_derivative(v); });
    px.accumulate(self.grad.cwiseProduct(local));
  });
}

Tensor log(const Tensor& x) {
  Matrix out = x.value().array().log().matrix();
  return Tensor::from_op(std::move(out), {x}, [](detail::Node& self) {
    auto& px = parent(self, 0);
    px.accumulate(self.grad.cwiseQuotient(px.value));
  });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add_row(matmul(x, weight), bias);
}

Tensor tanh_affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return tanh(affine(x, weight, bias));
}

Tensor softmax(const Tensor& x, Axis axis, const Mask& mask) {
  Matrix out;
  if (axis == Axis::kCols) {
    out = kernels::softmax_rows(x.value(), mask);
  } else {
    Mask mask_t;
    if (mask.size() > 0) mask_t = mask.transpose();
    out = kernels::softmax_rows(x.value().transpose(), mask_t).transpose();
  }
  return Tensor::from_op(std::move(out), {x}, [axis](detail::Node& self) {
    const Matrix& y = self.value;
    Matrix dx;
    if (axis == Axis::kCols) {
      Vector dots = self.grad.cwiseProduct(y).rowwise().sum();
      dx = y.cwiseProduct(self.grad - dots.replicate(1, y.cols()));
    } else {
      RowVector dots = self.grad.cwiseProduct(y).colwise().sum();
      dx = y.cwiseProduct(self.grad - dots.replicate(y.rows(), 1));
    }
    parent(self, 0).accumulate(dx);
  });
}

Tensor sum(const Tensor& x) {
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  return Tensor::from_op(std::move(out), {x}, [](detail::Node& self) {
    auto& px = parent(self, 0);
    px.accumulate(Matrix::Constant(px.value.rows(), px.value.cols(), self.grad(0, 0)));
  });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor slice_rows(const Tensor& x, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > x.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(start) + ", +" + std::to_string(count) + ") out of " +
                         shape_string(x.value()));
  }
  return Tensor::from_op(x.value().middleRows(start, count), {x}, [start, count](detail::Node& self) {
    auto& px = parent(self, 0);
    px.grad_buffer().middleRows(start, count) += self.grad;
  });
}

Tensor slice_cols(const Tensor& x, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > x.cols()) {
    throw DimensionError("slice_cols [" + std::to_string(start) + ", +" + std::to_string(count) + ") out of " +
                         shape_string(x.value()));
  }
  return Tensor::from_op(x.value().middleCols(start, count), {x}, [start, count](detail::Node& self) {
    auto& px = parent(self, 0);
    px.grad_buffer().middleCols(start, count) += self.grad;
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows of no tensors");
  Index rows = 0;
  const Index cols = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " + shape_string(parts.front().value()) + " vs " +
                           shape_string(p.value()));
    }
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return Tensor::from_op(std::move(out), parts, [](detail::Node& self) {
    Index at = 0;
    for (auto& p : self.parents) {
      const Index r = p->value.rows();
      if (p->requires_grad) p->grad_buffer() += self.grad.middleRows(at, r);
      at += r;
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols of no tensors");
  Index cols = 0;
  const Index rows = parts.front().rows();
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_string(parts.front().value()) + " vs " +
                           shape_string(p.value()));
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return Tensor::from_op(std::move(out), parts, [](detail::Node& self) {
    Index at = 0;
    for (auto& p : self.parents) {
      const Index c = p->value.cols();
      if (p->requires_grad) p->grad_buffer() += self.grad.middleCols(at, c);
      at += c;
    }
  });
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
  Matrix out(static_cast<Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw DimensionError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                           std::to_string(table.rows()) + " rows");
    }
    out.row(static_cast<Index>(i)) = table.value().row(ids[i]);
  }
  return Tensor::from_op(std::move(out), {table}, [ids](detail::Node& self) {
    Matrix& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < ids.size(); ++i) g.row(ids[i]) += self.grad.row(static_cast<Index>(i));
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (gain.rows() != 1 || gain.cols() != x.cols() || bias.rows() != 1 || bias.cols() != x.cols()) {
    throw DimensionError("layer_norm: gain/bias " + shape_string(gain.value()) + " incompatible with " +
                         shape_string(x.value()));
  }
  const Index n = x.cols();
  Matrix xhat(x.rows(), n);
  Vector inv_std(x.rows());
  for (Index r = 0; r < x.rows(); ++r) {
    const double mu = x.value().row(r).mean();
    const double var = (x.value().row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.value().row(r).array() - mu) * inv_std(r);
  }
  Matrix out = (xhat.array().rowwise() * gain.value().row(0).array()).rowwise() + bias.value().row(0).array();
  return Tensor::from_op(std::move(out), {x, gain, bias}, [xhat, inv_std, n](detail::Node& self) {
    auto& px = parent(self, 0);
    auto& pg = parent(self, 1);
    auto& pb = parent(self, 2);
    if (pg.requires_grad) pg.accumulate(self.grad.cwiseProduct(xhat).colwise().sum());
    if (pb.requires_grad) pb.accumulate(self.grad.colwise().sum());
    if (px.requires_grad) {
      Matrix dxhat = self.grad.array().rowwise() * pg.value.row(0).array();
      Matrix dx(dxhat.rows(), n);
      for (Index r = 0; r < dxhat.rows(); ++r) {
        const double m1 = dxhat.row(r).mean();
        const double m2 = dxhat.row(r).cwiseProduct(xhat.row(r)).mean();
        dx.row(r) = (dxhat.row(r).array() - m1 - xhat.row(r).array() * m2) * inv_std(r);
      }
      px.accumulate(dx);
    }
  });
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix keep(x.rows(), x.cols());
  for (Index i = 0; i < keep.size(); ++i) keep.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  return mul(x, Tensor(std::move(keep)));
}

Tensor cross_entropy(const Tensor& probs, const std::vector<int>& gold) {
  if (static_cast<Index>(gold.size()) != probs.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(gold.size()) + " labels for " +
                         shape_string(probs.value()) + " probabilities");
  }
  constexpr double kEps = 1e-15;
  const Index batch = probs.rows();
  double total = 0;
  for (Index r = 0; r < batch; ++r) {
    const int g = gold[static_cast<std::size_t>(r)];
    if (g < 0 || g >= probs.cols()) {
      throw DimensionError("cross_entropy: gold index " + std::to_string(g) + " outside {0.." +
                           std::to_string(probs.cols() - 1) + "}");
    }
    const double row_sum = probs.value().row(r).sum();
    if (std::abs(row_sum - 1.0) > 1e-6) {
      throw DimensionError("cross_entropy: probability row " + std::to_string(r) + " sums to " +
                           std::to_string(row_sum));
    }
    total -= std::log(std::clamp(probs.value()(r, g), kEps, 1.0 - kEps));
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(batch);
  return Tensor::from_op(std::move(out), {probs}, [gold, batch](detail::Node& self) {
    auto& pp = parent(self, 0);
    Matrix g = Matrix::Zero(pp.value.rows(), pp.value.cols());
    for (Index r = 0; r < batch; ++r) {
      const int c = gold[static_cast<std::size_t>(r)];
      const double p = pp.value(r, c);
      if (p > kEps && p < 1.0 - kEps) g(r, c) = -self.grad(0, 0) / (static_cast<double>(batch) * p);
    }
    pp.accumulate(g);
  });
}

}  // namespace gpr
