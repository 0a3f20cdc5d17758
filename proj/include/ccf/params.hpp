#pragma once

#include <string>
#include <vector>

#include "ccf/rng.hpp"
#include "ccf/tensor.hpp"

namespace ccf {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

using ParamList = std::vector<NamedParam>;

// Uniform in +/- sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

void zero_grads(const ParamList& params);
std::size_t parameter_count(const ParamList& params);

// Copies values between identically shaped lists (names must match).
void copy_values(const ParamList& from, const ParamList& to);

}  // namespace ccf
