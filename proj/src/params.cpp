#include "ccf/params.hpp"

#include <algorithm>
#include <cmath>

#include "ccf/errors.hpp"

namespace ccf {

Tensor xavier_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(numel(shape));
  for (auto& v : values) v = rng.uniform(-limit, limit);
  return Tensor::parameter(std::move(shape), std::move(values));
}

void zero_grads(const ParamList& params) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

std::size_t parameter_count(const ParamList& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.size();
  return n;
}

void copy_values(const ParamList& from, const ParamList& to) {
  if (from.size() != to.size()) throw DimensionError("copy_values: parameter lists differ in length");
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i].name != to[i].name || from[i].tensor.shape() != to[i].tensor.shape()) {
      throw DimensionError("copy_values: parameter " + from[i].name + " does not match " + to[i].name);
    }
    Tensor dst = to[i].tensor;
    std::copy(from[i].tensor.data().begin(), from[i].tensor.data().end(), dst.mutable_data().begin());
  }
}

}  // namespace ccf
