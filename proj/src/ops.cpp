#include "ccf/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccf/errors.hpp"
#include "ccf/kernels.hpp"

namespace ccf {

using detail::grad_target;
using detail::Node;
using detail::record;

namespace {

const std::vector<double>& in_value(const Node& self, std::size_t i) { return self.inputs[i]->value; }

// Maps every output element of a broadcast binary op back to its operands.
// Identical shapes and trailing-suffix operands avoid the index tables.
struct BroadcastPlan {
  enum class Mode { same, b_suffix, a_suffix, general };
  Mode mode = Mode::same;
  Shape out;
  std::size_t a_size = 0;
  std::size_t b_size = 0;
  std::vector<std::size_t> a_index;
  std::vector<std::size_t> b_index;

  std::size_t ai(std::size_t i) const {
    switch (mode) {
      case Mode::same:
      case Mode::b_suffix:
        return i;
      case Mode::a_suffix:
        return i % a_size;
      case Mode::general:
        return a_index[i];
    }
    return 0;
  }
  std::size_t bi(std::size_t i) const {
    switch (mode) {
      case Mode::same:
      case Mode::a_suffix:
        return i;
      case Mode::b_suffix:
        return i % b_size;
      case Mode::general:
        return b_index[i];
    }
    return 0;
  }
};

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

BroadcastPlan plan_broadcast(const Shape& a, const Shape& b, const char* op) {
  BroadcastPlan plan;
  plan.a_size = numel(a);
  plan.b_size = numel(b);
  if (a == b) {
    plan.out = a;
    return plan;
  }
  if (is_suffix(b, a)) {
    plan.mode = BroadcastPlan::Mode::b_suffix;
    plan.out = a;
    return plan;
  }
  if (is_suffix(a, b)) {
    plan.mode = BroadcastPlan::Mode::a_suffix;
    plan.out = b;
    return plan;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  Shape pa(rank, 1), pb(rank, 1);
  std::copy(a.begin(), a.end(), pa.begin() + static_cast<std::ptrdiff_t>(rank - a.size()));
  std::copy(b.begin(), b.end(), pb.begin() + static_cast<std::ptrdiff_t>(rank - b.size()));
  plan.out.resize(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    if (pa[d] != pb[d] && pa[d] != 1 && pb[d] != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + shape_str(a) + " with " +
                           shape_str(b));
    }
    plan.out[d] = std::max(pa[d], pb[d]);
  }
  std::vector<std::size_t> sa(rank, 0), sb(rank, 0);
  std::size_t stride_a = 1, stride_b = 1;
  for (std::size_t d = rank; d-- > 0;) {
    sa[d] = pa[d] == 1 ? 0 : stride_a;
    sb[d] = pb[d] == 1 ? 0 : stride_b;
    stride_a *= pa[d];
    stride_b *= pb[d];
  }
  const std::size_t n = numel(plan.out);
  plan.mode = BroadcastPlan::Mode::general;
  plan.a_index.resize(n);
  plan.b_index.resize(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    plan.a_index[i] = ia;
    plan.b_index[i] = ib;
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      ia += sa[d];
      ib += sb[d];
      if (counter[d] < plan.out[d]) break;
      ia -= sa[d] * counter[d];
      ib -= sb[d] * counter[d];
      counter[d] = 0;
    }
  }
  return plan;
}

enum class BinaryKind { add, sub, mul };

Tensor binary(const Tensor& a, const Tensor& b, BinaryKind kind, const char* name) {
  auto plan = std::make_shared<BroadcastPlan>(plan_broadcast(a.shape(), b.shape(), name));
  const auto& av = a.data();
  const auto& bv = b.data();
  const std::size_t n = numel(plan->out);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[plan->ai(i)];
    const double y = bv[plan->bi(i)];
    out[i] = kind == BinaryKind::add ? x + y : kind == BinaryKind::sub ? x - y : x * y;
  }
  return record(plan->out, std::move(out), {a, b}, [plan, kind](Node& self) {
    const auto& g = self.grad;
    double* ga = grad_target(self, 0);
    double* gb = grad_target(self, 1);
    const auto& av = in_value(self, 0);
    const auto& bv = in_value(self, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t ia = plan->ai(i);
      const std::size_t ib = plan->bi(i);
      switch (kind) {
        case BinaryKind::add:
          if (ga) ga[ia] += g[i];
          if (gb) gb[ib] += g[i];
          break;
        case BinaryKind::sub:
          if (ga) ga[ia] += g[i];
          if (gb) gb[ib] -= g[i];
          break;
        case BinaryKind::mul:
          if (ga) ga[ia] += g[i] * bv[ib];
          if (gb) gb[ib] += g[i] * av[ia];
          break;
      }
    }
  });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::add, "add"); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::sub, "sub"); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary(a, b, BinaryKind::mul, "mul"); }

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& x : out) x *= factor;
  return record(a.shape(), std::move(out), {a}, [factor](Node& self) {
    double* ga = grad_target(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += factor * self.grad[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const auto& as = a.shape();
  const auto& bs = b.shape();
  auto mismatch = [&] {
    return DimensionError("matmul: incompatible shapes " + shape_str(as) + " and " + shape_str(bs));
  };
  if (as.size() < 2 || as.size() > 3 || bs.size() < 2 || bs.size() > 3) throw mismatch();
  const std::size_t m = as[as.size() - 2];
  const std::size_t k = as.back();
  const std::size_t kb = bs[bs.size() - 2];
  const std::size_t n = bs.back();
  if (k != kb) throw mismatch();
  const bool a_batched = as.size() == 3;
  const bool b_batched = bs.size() == 3;
  std::size_t batch = 1;
  if (a_batched && b_batched && as[0] != bs[0]) throw mismatch();
  if (a_batched) batch = as[0];
  if (b_batched) batch = bs[0];

  Shape out_shape = (a_batched || b_batched) ? Shape{batch, m, n} : Shape{m, n};
  std::vector<double> out(batch * m * n, 0.0);
  const std::size_t a_stride = a_batched ? m * k : 0;
  const std::size_t b_stride = b_batched ? k * n : 0;
  if (!b_batched) {
    // Shared right operand: one tall product over all batch rows.
    kernels::gemm_nn((a_batched ? batch : 1) * m, n, k, a.data().data(), b.data().data(),
                     out.data());
  } else {
    for (std::size_t bi = 0; bi < batch; ++bi) {
      kernels::gemm_nn(m, n, k, a.data().data() + bi * a_stride, b.data().data() + bi * b_stride,
                       out.data() + bi * m * n);
    }
  }
  return record(std::move(out_shape), std::move(out), {a, b},
                [batch, m, n, k, a_stride, b_stride, a_batched, b_batched](Node& self) {
                  const double* g = self.grad.data();
                  const double* av = in_value(self, 0).data();
                  const double* bv = in_value(self, 1).data();
                  double* ga = grad_target(self, 0);
                  double* gb = grad_target(self, 1);
                  if (!b_batched) {
                    const std::size_t rows = (a_batched ? batch : 1) * m;
                    if (ga) kernels::gemm_nt(rows, k, n, g, bv, ga);
                    if (gb) kernels::gemm_tn(k, n, rows, av, g, gb);
                    return;
                  }
                  for (std::size_t bi = 0; bi < batch; ++bi) {
                    const double* gi = g + bi * m * n;
                    if (ga) kernels::gemm_nt(m, k, n, gi, bv + bi * b_stride, ga + bi * a_stride);
                    if (gb) kernels::gemm_tn(k, n, m, av + bi * a_stride, gi, gb + bi * b_stride);
                  }
                });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() < 1 || weight.rank() != 2 || x.shape().back() != weight.dim(0)) {
    throw DimensionError("linear: input " + shape_str(x.shape()) + " incompatible with weight " +
                         shape_str(weight.shape()));
  }
  const std::size_t in = weight.dim(0);
  const std::size_t out_width = weight.dim(1);
  const bool has_bias = bias.defined();
  if (has_bias && (bias.rank() != 1 || bias.dim(0) != out_width)) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " does not match weight " +
                         shape_str(weight.shape()));
  }
  const std::size_t rows = in == 0 ? 0 : x.size() / in;
  Shape out_shape = x.shape();
  out_shape.back() = out_width;
  std::vector<double> out(rows * out_width, 0.0);
  if (has_bias) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(bias.data().begin(), bias.data().end(), out.begin() + static_cast<std::ptrdiff_t>(r * out_width));
    }
  }
  kernels::gemm_nn(rows, out_width, in, x.data().data(), weight.data().data(), out.data());
  std::vector<Tensor> inputs{x, weight};
  if (has_bias) inputs.push_back(bias);
  return record(std::move(out_shape), std::move(out), std::move(inputs),
                [rows, in, out_width, has_bias](Node& self) {
                  const double* g = self.grad.data();
                  double* gx = grad_target(self, 0);
                  double* gw = grad_target(self, 1);
                  if (gx) kernels::gemm_nt(rows, in, out_width, g, in_value(self, 1).data(), gx);
                  if (gw) kernels::gemm_tn(in, out_width, rows, in_value(self, 0).data(), g, gw);
                  if (has_bias) {
                    if (double* gb = grad_target(self, 2)) {
                      for (std::size_t r = 0; r < rows; ++r) {
                        for (std::size_t j = 0; j < out_width; ++j) gb[j] += g[r * out_width + j];
                      }
                    }
                  }
                });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return record(x.shape(), std::move(out), {x}, [](Node& self) {
    double* gx = grad_target(self, 0);
    const auto& xv = in_value(self, 0);
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += self.grad[i];
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  if (x.rank() < 1) throw DimensionError("layer_norm: scalar input");
  const std::size_t width = x.shape().back();
  if (gain.shape() != Shape{width} || shift.shape() != Shape{width}) {
    throw DimensionError("layer_norm: gain " + shape_str(gain.shape()) + " / shift " +
                         shape_str(shift.shape()) + " do not match input " + shape_str(x.shape()));
  }
  const std::size_t rows = x.size() / width;
  auto normalized = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  std::vector<double> out(x.size());
  const auto& xv = x.data();
  const auto& gv = gain.data();
  const auto& sv = shift.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * width;
    double mu = 0.0;
    for (std::size_t j = 0; j < width; ++j) mu += row[j];
    mu /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(width);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < width; ++j) {
      const double h = (row[j] - mu) * inv;
      (*normalized)[r * width + j] = h;
      out[r * width + j] = h * gv[j] + sv[j];
    }
  }
  return record(x.shape(), std::move(out), {x, gain, shift},
                [rows, width, normalized, inv_std](Node& self) {
                  const auto& g = self.grad;
                  const auto& gv = in_value(self, 1);
                  double* gx = grad_target(self, 0);
                  double* gg = grad_target(self, 1);
                  double* gs = grad_target(self, 2);
                  const auto& h = *normalized;
                  for (std::size_t r = 0; r < rows; ++r) {
                    const std::size_t base = r * width;
                    if (gg || gs) {
                      for (std::size_t j = 0; j < width; ++j) {
                        if (gg) gg[j] += g[base + j] * h[base + j];
                        if (gs) gs[j] += g[base + j];
                      }
                    }
                    if (!gx) continue;
                    double mean_dh = 0.0;
                    double mean_dh_h = 0.0;
                    for (std::size_t j = 0; j < width; ++j) {
                      const double dh = g[base + j] * gv[j];
                      mean_dh += dh;
                      mean_dh_h += dh * h[base + j];
                    }
                    mean_dh /= static_cast<double>(width);
                    mean_dh_h /= static_cast<double>(width);
                    const double inv = (*inv_std)[r];
                    for (std::size_t j = 0; j < width; ++j) {
                      const double dh = g[base + j] * gv[j];
                      gx[base + j] += inv * (dh - mean_dh - h[base + j] * mean_dh_h);
                    }
                  }
                });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(x.shape()));
  }
  const auto& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= s[d];
  for (std::size_t d = axis + 1; d < s.size(); ++d) inner *= s[d];
  const std::size_t len = s[axis];
  std::vector<double> out(x.size());
  const auto& xv = x.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < len; ++j) mx = std::max(mx, xv[base + j * inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < len; ++j) {
        const double e = std::exp(xv[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= total;
    }
  }
  auto y = std::make_shared<std::vector<double>>(out);
  return record(s, std::move(out), {x}, [outer, inner, len, y](Node& self) {
    double* gx = grad_target(self, 0);
    const auto& g = self.grad;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < len; ++j) dot += (*y)[base + j * inner] * g[base + j * inner];
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t idx = base + j * inner;
          gx[idx] += (*y)[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range for " + shape_str(first));
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t d = 0; ok && d < s.size(); ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw DimensionError("concat: shape " + shape_str(s) + " incompatible with " +
                           shape_str(first) + " along axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  for (const auto& p : parts) widths.push_back(p.shape()[axis] * inner);
  const std::size_t row = out_shape[axis] * inner;
  std::vector<double> out(outer * row);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& pv = parts[i].data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(pv.data() + o * widths[i], widths[i], out.data() + o * row + offset);
    }
    offset += widths[i];
  }
  return record(std::move(out_shape), std::move(out), parts, [outer, row, widths](Node& self) {
    std::size_t offset = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) {
      if (double* gp = grad_target(self, i)) {
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t j = 0; j < widths[i]; ++j) {
            gp[o * widths[i] + j] += self.grad[o * row + offset + j];
          }
        }
      }
      offset += widths[i];
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  return record(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()), {x},
                [](Node& self) {
                  double* gx = grad_target(self, 0);
                  for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
                });
}

Tensor pick(const Tensor& x, std::span<const std::size_t> indices) {
  if (x.rank() < 2 || indices.size() != x.dim(0)) {
    throw DimensionError("pick: " + std::to_string(indices.size()) + " indices for tensor " +
                         shape_str(x.shape()));
  }
  const std::size_t batch = x.dim(0);
  const std::size_t choices = x.dim(1);
  const std::size_t inner = x.size() / (batch * std::max<std::size_t>(choices, 1));
  Shape out_shape{batch};
  out_shape.insert(out_shape.end(), x.shape().begin() + 2, x.shape().end());
  std::vector<double> out(batch * inner);
  std::vector<std::size_t> offsets(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    if (indices[b] >= choices) {
      throw DimensionError("pick: index " + std::to_string(indices[b]) + " out of range " +
                           std::to_string(choices));
    }
    offsets[b] = (b * choices + indices[b]) * inner;
    std::copy_n(x.data().data() + offsets[b], inner, out.data() + b * inner);
  }
  return record(std::move(out_shape), std::move(out), {x}, [offsets, inner](Node& self) {
    double* gx = grad_target(self, 0);
    for (std::size_t b = 0; b < offsets.size(); ++b) {
      for (std::size_t j = 0; j < inner; ++j) gx[offsets[b] + j] += self.grad[b * inner + j];
    }
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return record({}, {total}, {x}, [](Node& self) {
    double* gx = grad_target(self, 0);
    const double g = self.grad[0];
    for (std::size_t i = 0; i < self.inputs[0]->value.size(); ++i) gx[i] += g;
  });
}

Tensor mean(const Tensor& x) {
  if (x.size() == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor huber(const Tensor& pred, const Tensor& target, double delta) {
  require_same_shape(pred, target, "huber");
  if (!(delta > 0.0)) throw ValidationError("huber: delta must be positive");
  const std::size_t n = pred.size();
  if (n == 0) throw DimensionError("huber: empty input");
  const auto& pv = pred.data();
  const auto& tv = target.data();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = pv[i] - tv[i];
    const double ae = std::abs(e);
    total += ae <= delta ? 0.5 * e * e : delta * (ae - 0.5 * delta);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return record({}, {total * inv_n}, {pred, target}, [delta, inv_n](Node& self) {
    const auto& pv = in_value(self, 0);
    const auto& tv = in_value(self, 1);
    double* gp = grad_target(self, 0);
    double* gt = grad_target(self, 1);
    const double g = self.grad[0] * inv_n;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double e = pv[i] - tv[i];
      const double d = std::abs(e) <= delta ? e : (e > 0.0 ? delta : -delta);
      if (gp) gp[i] += g * d;
      if (gt) gt[i] -= g * d;
    }
  });
}

Tensor mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  const std::size_t n = pred.size();
  if (n == 0) throw DimensionError("mse: empty input");
  const auto& pv = pred.data();
  const auto& tv = target.data();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (pv[i] - tv[i]) * (pv[i] - tv[i]);
  const double inv_n = 1.0 / static_cast<double>(n);
  return record({}, {total * inv_n}, {pred, target}, [inv_n](Node& self) {
    const auto& pv = in_value(self, 0);
    const auto& tv = in_value(self, 1);
    double* gp = grad_target(self, 0);
    double* gt = grad_target(self, 1);
    const double g = 2.0 * self.grad[0] * inv_n;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double e = pv[i] - tv[i];
      if (gp) gp[i] += g * e;
      if (gt) gt[i] -= g * e;
    }
  });
}

Tensor cross_entropy(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "cross_entropy");
  if (pred.rank() < 1 || pred.size() == 0) throw DimensionError("cross_entropy: empty input");
  const std::size_t classes = pred.shape().back();
  const std::size_t rows = pred.size() / classes;
  const auto& pv = pred.data();
  const auto& tv = target.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double ps = 0.0, ts = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      ps += pv[r * classes + j];
      ts += tv[r * classes + j];
    }
    if (std::abs(ps - 1.0) > 1e-6 || std::abs(ts - 1.0) > 1e-6) {
      throw ValidationError("cross_entropy: row " + std::to_string(r) +
                            " is not a probability vector (pred sum " + std::to_string(ps) +
                            ", target sum " + std::to_string(ts) + ")");
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) total -= tv[i] * std::log(pv[i] + kLogEpsilon);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  return record({}, {total * inv_rows}, {pred, target}, [inv_rows](Node& self) {
    const auto& pv = in_value(self, 0);
    const auto& tv = in_value(self, 1);
    double* gp = grad_target(self, 0);
    double* gt = grad_target(self, 1);
    const double g = self.grad[0] * inv_rows;
    for (std::size_t i = 0; i < pv.size(); ++i) {
      if (gp) gp[i] -= g * tv[i] / (pv[i] + kLogEpsilon);
      if (gt) gt[i] -= g * std::log(pv[i] + kLogEpsilon);
    }
  });
}

Tensor positional_encoding(std::size_t rows, std::size_t width) {
  std::vector<double> table(rows * width);
  for (std::size_t p = 0; p < rows; ++p) {
    for (std::size_t c = 0; c < width; ++c) {
      const double exponent = static_cast<double>(c - c % 2) / static_cast<double>(width);
      const double angle = static_cast<double>(p) / std::pow(10000.0, exponent);
      table[p * width + c] = c % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return Tensor::constant({rows, width}, std::move(table));
}

}  // namespace ccf
