#pragma once

#include <vector>

#include "gpr/tensor/rng.hpp"
#include "gpr/tensor/tensor.hpp"

namespace gpr {

/// Axis along which a reduction/normalization runs. kCols normalizes each row
/// across its columns; kRows normalizes each column across its rows.
enum class Axis { kRows = 0, kCols = 1 };

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// x (M x N) plus a 1 x N row broadcast to every row.
Tensor add_row(const Tensor& x, const Tensor& row);

Tensor tanh(const Tensor& x);
Tensor gelu(const Tensor& x);
Tensor log(const Tensor& x);

/// x W + b, with b a 1 x N row.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// tanh(x W + b).
Tensor tanh_affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// Numerically stable softmax along `axis`. Masked-out entries are exactly 0.
/// `mask` is empty, full-shape, or broadcastable along the normalized axis
/// (a 1 x N row for kCols, an M x 1 column for kRows).
Tensor softmax(const Tensor& x, Axis axis = Axis::kCols, const Mask& mask = Mask());

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

Tensor slice_rows(const Tensor& x, Index start, Index count);
Tensor slice_cols(const Tensor& x, Index start, Index count);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);

/// Rows of `table` at `ids` (embedding lookup); backward scatter-adds.
Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);

/// Per-row layer normalization with learned 1 x N gain and bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-12);

/// Inverted dropout. In evaluation mode, or with rate 0, returns `x` itself.
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

/// Mean over rows of -ln probs[r, gold[r]], probabilities clipped to
/// [1e-15, 1 - 1e-15]. Rows of `probs` must sum to 1 within 1e-6.
Tensor cross_entropy(const Tensor& probs, const std::vector<int>& gold);

}  // namespace gpr
