#include <cmath>
#include <limits>

#include "ccf/errors.hpp"
#include "ccf/kernels.hpp"
#include "ccf/ops.hpp"

namespace ccf {

using detail::grad_target;
using detail::Node;

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads,
                 std::span<const std::uint8_t> key_valid) {
  if (q.rank() != 3 || k.rank() != 3 || v.rank() != 3 || k.shape() != v.shape() ||
      q.dim(0) != k.dim(0) || q.dim(2) != k.dim(2)) {
    throw DimensionError("attention: incompatible q " + shape_str(q.shape()) + ", k " +
                         shape_str(k.shape()) + ", v " + shape_str(v.shape()));
  }
  const std::size_t batch = q.dim(0);
  const std::size_t lq = q.dim(1);
  const std::size_t lk = k.dim(1);
  const std::size_t width = q.dim(2);
  if (heads == 0 || width % heads != 0) {
    throw DimensionError("attention: " + std::to_string(heads) + " heads do not divide width " +
                         std::to_string(width));
  }
  if (!key_valid.empty() && key_valid.size() != batch * lk) {
    throw DimensionError("attention: key mask has " + std::to_string(key_valid.size()) +
                         " entries, expected " + std::to_string(batch * lk));
  }
  const std::size_t head_width = width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_width));
  auto valid = std::make_shared<std::vector<std::uint8_t>>(key_valid.begin(), key_valid.end());
  auto is_valid = [valid, lk](std::size_t b, std::size_t j) {
    return valid->empty() || (*valid)[b * lk + j] != 0;
  };

  // probs[b, h, i, j]; masked keys keep probability exactly zero and are
  // never read, so their values cannot influence the output.
  auto probs = std::make_shared<std::vector<double>>(batch * heads * lq * lk, 0.0);
  std::vector<double> out(batch * lq * width, 0.0);
  const double* qv = q.data().data();
  const double* kv = k.data().data();
  const double* vv = v.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t col = h * head_width;
      for (std::size_t i = 0; i < lq; ++i) {
        double* p = probs->data() + ((b * heads + h) * lq + i) * lk;
        const double* qi = qv + (b * lq + i) * width + col;
        double mx = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (std::size_t j = 0; j < lk; ++j) {
          if (!is_valid(b, j)) continue;
          p[j] = scale * kernels::dot(qi, kv + (b * lk + j) * width + col, head_width);
          mx = any ? std::max(mx, p[j]) : p[j];
          any = true;
        }
        if (!any) continue;
        double total = 0.0;
        for (std::size_t j = 0; j < lk; ++j) {
          if (!is_valid(b, j)) continue;
          p[j] = std::exp(p[j] - mx);
          total += p[j];
        }
        double* oi = out.data() + (b * lq + i) * width + col;
        for (std::size_t j = 0; j < lk; ++j) {
          if (!is_valid(b, j)) continue;
          p[j] /= total;
          kernels::axpy(p[j], vv + (b * lk + j) * width + col, oi, head_width);
        }
      }
    }
  }

  return detail::record(
      q.shape(), std::move(out), {q, k, v},
      [=](Node& self) {
        const double* g = self.grad.data();
        const double* qv = self.inputs[0]->value.data();
        const double* kv = self.inputs[1]->value.data();
        const double* vv = self.inputs[2]->value.data();
        double* gq = grad_target(self, 0);
        double* gk = grad_target(self, 1);
        double* gv = grad_target(self, 2);
        std::vector<double> dp(lk);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t col = h * head_width;
            for (std::size_t i = 0; i < lq; ++i) {
              const double* p = probs->data() + ((b * heads + h) * lq + i) * lk;
              const double* gi = g + (b * lq + i) * width + col;
              double weighted = 0.0;
              for (std::size_t j = 0; j < lk; ++j) {
                if (!is_valid(b, j) || p[j] == 0.0) {
                  dp[j] = 0.0;
                  continue;
                }
                const std::size_t row = (b * lk + j) * width + col;
                dp[j] = kernels::dot(gi, vv + row, head_width);
                weighted += p[j] * dp[j];
                if (gv) kernels::axpy(p[j], gi, gv + row, head_width);
              }
              const std::size_t qrow = (b * lq + i) * width + col;
              for (std::size_t j = 0; j < lk; ++j) {
                if (!is_valid(b, j) || p[j] == 0.0) continue;
                const double ds = p[j] * (dp[j] - weighted) * scale;
                const std::size_t row = (b * lk + j) * width + col;
                if (gq) kernels::axpy(ds, kv + row, gq + qrow, head_width);
                if (gk) kernels::axpy(ds, qv + qrow, gk + row, head_width);
              }
            }
          }
        }
      });
}

}  // namespace ccf
