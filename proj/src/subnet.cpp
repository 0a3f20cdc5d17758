#include "ccf/subnet.hpp"

#include <algorithm>

#include "ccf/errors.hpp"
#include "ccf/ops.hpp"

namespace ccf {

SubnetShape SubnetShape::from_config(const CcfConfig& config) {
  SubnetShape s;
  s.t_ob = config.t_ob;
  s.t_pred = config.t_pred;
  s.k = config.k;
  s.d = config.d;
  s.heads = config.heads;
  s.ff_width = config.ff_width();
  s.l_e = config.l_e;
  s.l_d = config.l_d;
  return s;
}

SubnetBatch make_batch(std::span<const TrajectoryWindow> windows) {
  if (windows.empty()) throw ValidationError("make_batch: empty batch");
  const auto& first = windows.front();
  const std::size_t b = windows.size();
  const std::size_t n = first.neighbor_count();
  std::vector<double> past, future, neighbor;
  past.reserve(b * first.past.size());
  future.reserve(b * first.future.size());
  neighbor.reserve(b * first.neighbors.size());
  SubnetBatch batch;
  batch.size = b;
  batch.neighbors = n;
  for (const auto& w : windows) {
    if (w.t_ob != first.t_ob || w.t_pred != first.t_pred || w.neighbor_count() != n ||
        w.past.size() != w.t_ob * 2 || w.future.size() != w.t_pred * 2 ||
        w.neighbors.size() != n * w.t_ob * 2) {
      throw DimensionError("make_batch: windows have inconsistent dimensions");
    }
    past.insert(past.end(), w.past.begin(), w.past.end());
    future.insert(future.end(), w.future.begin(), w.future.end());
    neighbor.insert(neighbor.end(), w.neighbors.begin(), w.neighbors.end());
    batch.neighbor_valid.insert(batch.neighbor_valid.end(), w.neighbor_valid.begin(),
                                w.neighbor_valid.end());
  }
  batch.past = Tensor::constant({b, first.t_ob * 2}, std::move(past));
  batch.future = Tensor::constant({b, first.t_pred, 2}, std::move(future));
  batch.neighbor = Tensor::constant({b, n, first.t_ob * 2}, std::move(neighbor));
  return batch;
}

Subnet::Subnet(const SubnetShape& shape, Rng& rng) : shape_(shape) {
  if (shape.heads == 0 || shape.d % shape.heads != 0) {
    throw ValidationError("subnet: " + std::to_string(shape.heads) + " heads do not divide d = " +
                          std::to_string(shape.d));
  }
  const std::size_t d = shape.d;
  const std::size_t past_width = shape.t_ob * 2;
  const std::size_t class_width = shape.t_pred * 2;
  // The input map acts on concat(past, anchor); its weight is stored as the
  // two row blocks so the past half is computed once per window.
  in_past_w_ = xavier_uniform({past_width, d}, past_width + class_width, d, rng);
  in_class_w_ = xavier_uniform({class_width, d}, past_width + class_width, d, rng);
  in_b_ = Tensor::zeros({d}, true);
  position_ = positional_encoding(shape.k, d);
  for (std::size_t l = 0; l < shape.l_e; ++l) encoder_.push_back(make_block(true, rng));
  cls_w_ = xavier_uniform({d, 1}, d, 1, rng);
  cls_b_ = Tensor::zeros({1}, true);
  nbr_w_ = xavier_uniform({past_width, d}, past_width, d, rng);
  nbr_b_ = Tensor::zeros({d}, true);
  for (std::size_t l = 0; l < shape.l_d; ++l) decoder_.push_back(make_block(false, rng));
  reg_w_ = xavier_uniform({d, class_width}, d, class_width, rng);
  reg_b_ = Tensor::zeros({class_width}, true);
}

Subnet::Block Subnet::make_block(bool output_bias, Rng& rng) const {
  const std::size_t d = shape_.d;
  const std::size_t f = shape_.ff_width;
  Block b;
  b.norm1_gain = Tensor::parameter({d}, std::vector<double>(d, 1.0));
  b.norm1_shift = Tensor::zeros({d}, true);
  b.wq = xavier_uniform({d, d}, d, d, rng);
  b.bq = Tensor::zeros({d}, true);
  b.wk = xavier_uniform({d, d}, d, d, rng);
  b.bk = Tensor::zeros({d}, true);
  b.wv = xavier_uniform({d, d}, d, d, rng);
  b.bv = Tensor::zeros({d}, true);
  b.wo = xavier_uniform({d, d}, d, d, rng);
  // Cross-attention has no output bias so that a token with no valid
  // neighbor receives exactly zero from the attention branch.
  if (output_bias) b.bo = Tensor::zeros({d}, true);
  b.norm2_gain = Tensor::parameter({d}, std::vector<double>(d, 1.0));
  b.norm2_shift = Tensor::zeros({d}, true);
  b.ff1_w = xavier_uniform({d, f}, d, f, rng);
  b.ff1_b = Tensor::zeros({f}, true);
  b.ff2_w = xavier_uniform({f, d}, f, d, rng);
  b.ff2_b = Tensor::zeros({d}, true);
  return b;
}

Tensor Subnet::feed_forward(const Block& block, const Tensor& x) const {
  Tensor h = layer_norm(x, block.norm2_gain, block.norm2_shift);
  h = linear(relu(linear(h, block.ff1_w, block.ff1_b)), block.ff2_w, block.ff2_b);
  return x + h;
}

Tensor Subnet::embed_inputs(const Tensor& past, const TrajectoryClassSet& classes) const {
  if (classes.k != shape_.k || classes.t_pred != shape_.t_pred) {
    throw ValidationError("subnet expects " + std::to_string(shape_.k) + " classes of " +
                          std::to_string(shape_.t_pred) + " steps, got " +
                          std::to_string(classes.k) + " of " + std::to_string(classes.t_pred));
  }
  if (past.rank() != 2 || past.dim(1) != shape_.t_ob * 2) {
    throw DimensionError("embed_inputs: past must be [B, " + std::to_string(shape_.t_ob * 2) +
                         "], got " + shape_str(past.shape()));
  }
  const std::size_t b = past.dim(0);
  Tensor anchors = Tensor::constant({shape_.k, classes.width()}, classes.means);
  Tensor per_class = linear(anchors, in_class_w_, in_b_) + position_;       // [K, D]
  Tensor per_window = reshape(linear(past, in_past_w_, Tensor()), {b, 1, shape_.d});  // [B, 1, D]
  return per_window + per_class;
}

EncoderOutput Subnet::encode(const Tensor& tokens) const {
  if (tokens.rank() != 3 || tokens.dim(2) != shape_.d) {
    throw DimensionError("encode: tokens must be [B, K, " + std::to_string(shape_.d) + "], got " +
                         shape_str(tokens.shape()));
  }
  Tensor x = tokens;
  for (const auto& block : encoder_) {
    Tensor h = layer_norm(x, block.norm1_gain, block.norm1_shift);
    Tensor attended = attention(linear(h, block.wq, block.bq), linear(h, block.wk, block.bk),
                                linear(h, block.wv, block.bv), shape_.heads);
    x = x + linear(attended, block.wo, block.bo);
    x = feed_forward(block, x);
  }
  const std::size_t b = x.dim(0);
  const std::size_t k = x.dim(1);
  Tensor logits = reshape(linear(x, cls_w_, cls_b_), {b, k});
  return {x, softmax(logits, 1)};
}

Tensor Subnet::embed_neighbors(const Tensor& neighbors) const {
  if (neighbors.rank() != 3 || neighbors.dim(2) != shape_.t_ob * 2) {
    throw DimensionError("embed_neighbors: expected [B, N, " + std::to_string(shape_.t_ob * 2) +
                         "], got " + shape_str(neighbors.shape()));
  }
  return linear(neighbors, nbr_w_, nbr_b_);
}

Tensor Subnet::decode(const Tensor& encoded, const Tensor& neighbor_embedding,
                      std::span<const std::uint8_t> neighbor_valid) const {
  const std::size_t b = encoded.dim(0);
  const std::size_t k = encoded.dim(1);
  const std::size_t n = neighbor_embedding.dim(1);
  if (neighbor_embedding.dim(0) != b || neighbor_valid.size() != b * n) {
    throw DimensionError("decode: neighbor embedding " + shape_str(neighbor_embedding.shape()) +
                         " / mask of " + std::to_string(neighbor_valid.size()) +
                         " do not match batch " + std::to_string(b));
  }
  const bool any_valid =
      std::any_of(neighbor_valid.begin(), neighbor_valid.end(), [](auto v) { return v != 0; });
  Tensor x = encoded;
  for (const auto& block : decoder_) {
    if (n > 0 && any_valid) {
      Tensor h = layer_norm(x, block.norm1_gain, block.norm1_shift);
      Tensor attended = attention(linear(h, block.wq, block.bq),
                                  linear(neighbor_embedding, block.wk, block.bk),
                                  linear(neighbor_embedding, block.wv, block.bv), shape_.heads,
                                  neighbor_valid);
      x = x + linear(attended, block.wo, Tensor());
    }
    x = feed_forward(block, x);
  }
  return reshape(linear(x, reg_w_, reg_b_), {b, k, shape_.t_pred, 2});
}

SubnetBatchOutput Subnet::forward(const Tensor& past, const Tensor& neighbors,
                                  std::span<const std::uint8_t> neighbor_valid,
                                  const TrajectoryClassSet& classes) const {
  EncoderOutput enc = encode(embed_inputs(past, classes));
  Tensor candidates = decode(enc.tokens, embed_neighbors(neighbors), neighbor_valid);
  return {candidates, enc.class_probs};
}

SubnetBatchOutput Subnet::forward(const SubnetBatch& batch, const TrajectoryClassSet& classes) const {
  return forward(batch.past, batch.neighbor, batch.neighbor_valid, classes);
}

SubnetOutput Subnet::forward(const TrajectoryWindow& window, const TrajectoryClassSet& classes) const {
  NoGradGuard no_grad;
  SubnetBatchOutput out = forward(make_batch(std::span(&window, 1)), classes);
  SubnetOutput result;
  result.candidates.assign(out.candidates.data().begin(), out.candidates.data().end());
  result.class_probs.assign(out.class_probs.data().begin(), out.class_probs.data().end());
  result.selected_index = static_cast<std::size_t>(
      std::max_element(result.class_probs.begin(), result.class_probs.end()) -
      result.class_probs.begin());
  const std::size_t width = shape_.t_pred * 2;
  result.selected.assign(result.candidates.begin() + static_cast<std::ptrdiff_t>(result.selected_index * width),
                         result.candidates.begin() + static_cast<std::ptrdiff_t>((result.selected_index + 1) * width));
  return result;
}

void Subnet::append_block(ParamList& out, const std::string& prefix, const Block& block) {
  out.push_back({prefix + ".norm1_gain", block.norm1_gain});
  out.push_back({prefix + ".norm1_shift", block.norm1_shift});
  out.push_back({prefix + ".wq", block.wq});
  out.push_back({prefix + ".bq", block.bq});
  out.push_back({prefix + ".wk", block.wk});
  out.push_back({prefix + ".bk", block.bk});
  out.push_back({prefix + ".wv", block.wv});
  out.push_back({prefix + ".bv", block.bv});
  out.push_back({prefix + ".wo", block.wo});
  if (block.bo.defined()) out.push_back({prefix + ".bo", block.bo});
  out.push_back({prefix + ".norm2_gain", block.norm2_gain});
  out.push_back({prefix + ".norm2_shift", block.norm2_shift});
  out.push_back({prefix + ".ff1_w", block.ff1_w});
  out.push_back({prefix + ".ff1_b", block.ff1_b});
  out.push_back({prefix + ".ff2_w", block.ff2_w});
  out.push_back({prefix + ".ff2_b", block.ff2_b});
}

ParamList Subnet::params() const {
  ParamList out{{"input.past_w", in_past_w_}, {"input.class_w", in_class_w_}, {"input.b", in_b_}};
  for (std::size_t l = 0; l < encoder_.size(); ++l) append_block(out, "encoder" + std::to_string(l), encoder_[l]);
  out.push_back({"cls.w", cls_w_});
  out.push_back({"cls.b", cls_b_});
  out.push_back({"neighbor.w", nbr_w_});
  out.push_back({"neighbor.b", nbr_b_});
  for (std::size_t l = 0; l < decoder_.size(); ++l) append_block(out, "decoder" + std::to_string(l), decoder_[l]);
  out.push_back({"reg.w", reg_w_});
  out.push_back({"reg.b", reg_b_});
  return out;
}

}  // namespace ccf
