#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccf/clustering.hpp"
#include "ccf/config.hpp"
#include "ccf/data.hpp"
#include "ccf/params.hpp"
#include "ccf/tensor.hpp"

namespace ccf {

struct SubnetShape {
  std::size_t t_ob = 8;
  std::size_t t_pred = 12;
  std::size_t k = 20;
  std::size_t d = 64;
  std::size_t heads = 4;
  std::size_t ff_width = 256;
  std::size_t l_e = 1;
  std::size_t l_d = 1;

  static SubnetShape from_config(const CcfConfig& config);
};

// Stacked batch of windows in the layout the subnet consumes.
struct SubnetBatch {
  std::size_t size = 0;
  std::size_t neighbors = 0;
  Tensor past;       // [B, t_ob * 2]
  Tensor future;     // [B, t_pred, 2]
  Tensor neighbor;   // [B, N, t_ob * 2]
  std::vector<std::uint8_t> neighbor_valid;  // B * N
};

SubnetBatch make_batch(std::span<const TrajectoryWindow> windows);

struct EncoderOutput {
  Tensor tokens;       // [B, K, D]
  Tensor class_probs;  // [B, K]
};

struct SubnetBatchOutput {
  Tensor candidates;   // [B, K, t_pred, 2]
  Tensor class_probs;  // [B, K]
};

// Predictions for one window.
struct SubnetOutput {
  std::vector<double> candidates;   // K * t_pred * 2
  std::vector<double> class_probs;  // K
  std::vector<double> selected;     // t_pred * 2, candidate at argmax(class_probs)
  std::size_t selected_index = 0;
};

// Transformer encoder-decoder. Each of the K class tokens embeds the observed
// trajectory paired with one anchor future; the encoder relates the tokens
// and scores them, and the decoder lets every token attend to the neighbors
// before a regression head turns it into that class's candidate future.
// Blocks are pre-norm: x + f(LayerNorm(x)).
class Subnet {
 public:
  Subnet(const SubnetShape& shape, Rng& rng);

  const SubnetShape& shape() const { return shape_; }

  // past [B, t_ob * 2] -> tokens [B, K, D]
  Tensor embed_inputs(const Tensor& past, const TrajectoryClassSet& classes) const;
  EncoderOutput encode(const Tensor& tokens) const;
  // neighbors [B, N, t_ob * 2] -> [B, N, D]
  Tensor embed_neighbors(const Tensor& neighbors) const;
  // -> candidates [B, K, t_pred, 2]
  Tensor decode(const Tensor& encoded, const Tensor& neighbor_embedding,
                std::span<const std::uint8_t> neighbor_valid) const;

  SubnetBatchOutput forward(const Tensor& past, const Tensor& neighbors,
                            std::span<const std::uint8_t> neighbor_valid,
                            const TrajectoryClassSet& classes) const;
  SubnetBatchOutput forward(const SubnetBatch& batch, const TrajectoryClassSet& classes) const;
  // Single window without recording history.
  SubnetOutput forward(const TrajectoryWindow& window, const TrajectoryClassSet& classes) const;

  ParamList params() const;

 private:
  struct Block {
    Tensor norm1_gain, norm1_shift;
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor norm2_gain, norm2_shift;
    Tensor ff1_w, ff1_b, ff2_w, ff2_b;
  };

  Block make_block(bool output_bias, Rng& rng) const;
  Tensor feed_forward(const Block& block, const Tensor& x) const;
  static void append_block(ParamList& out, const std::string& prefix, const Block& block);

  SubnetShape shape_;
  Tensor in_past_w_, in_class_w_, in_b_;
  Tensor position_;
  std::vector<Block> encoder_;
  Tensor cls_w_, cls_b_;
  Tensor nbr_w_, nbr_b_;
  std::vector<Block> decoder_;
  Tensor reg_w_, reg_b_;
};

}  // namespace ccf
