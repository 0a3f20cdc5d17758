#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccf/tensor.hpp"

namespace ccf {

// Elementwise arithmetic with numpy-style broadcasting.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return scale(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// Matrix product of operands of rank 2 or 3. A rank-3 operand carries a batch
// dimension; a rank-2 operand is shared across the batch.
Tensor matmul(const Tensor& a, const Tensor& b);

// x[..., in] * weight[in, out] + bias[out]. bias may be undefined.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);

// Normalizes over the last axis, then applies gain and shift of that width.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps = 1e-5);

// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor reshape(const Tensor& x, Shape shape);

// out[b, ...] = x[b, indices[b], ...] for x of rank >= 2.
Tensor pick(const Tensor& x, std::span<const std::size_t> indices);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Mean over elements of the Huber penalty on e = pred - target.
Tensor huber(const Tensor& pred, const Tensor& target, double delta = 1.0);
// Mean over elements of (pred - target)^2.
Tensor mse(const Tensor& pred, const Tensor& target);

inline constexpr double kLogEpsilon = 1e-12;

// Rows along the last axis are probability vectors; returns the mean over rows
// of -sum_j target_j * log(pred_j + 1e-12). Soft targets are allowed.
Tensor cross_entropy(const Tensor& pred, const Tensor& target);

// Multi-head scaled dot-product attention on already-projected q [B, Lq, D],
// k and v [B, Lk, D]. `key_valid`, when non-empty, holds B*Lk flags; invalid
// keys get -inf logits. A query whose keys are all invalid attends to nothing
// and its output row is zero.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                 std::span<const std::uint8_t> key_valid = {});

// Sinusoidal table: row p, column 2i -> sin(p / 10000^(2i/d)), column 2i+1 -> cos(...).
Tensor positional_encoding(std::size_t rows, std::size_t width);

}  // namespace ccf
