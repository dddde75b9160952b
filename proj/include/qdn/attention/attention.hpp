#pragma once

#include <stdexcept>
#include <string>

#include "qdn/autodiff/graph.hpp"
#include "qdn/autodiff/kernels.hpp"

namespace qdn {

// ---------------------------------------------------------------------------
// Direct evaluation (no graph). These share kernels with the graph
// primitives.
// ---------------------------------------------------------------------------

/// w_i = exp(k_i . q) / sum_j exp(k_j . q). No 1/sqrt(d) scaling.
template <typename Scalar>
RowVector<Scalar> dot_attention_weights(const DenseArray<Scalar>& keys,
                                        const RowVector<Scalar>& query) {
  if (keys.rows() == 0) throw std::invalid_argument("dot_attention_weights: empty key set");
  if (keys.cols() != query.cols()) {
    throw ShapeError("dot_attention_weights: key width " + std::to_string(keys.cols()) +
                     " != query width " + std::to_string(query.cols()));
  }
  DenseArray<Scalar> logits = query * keys.transpose();
  return kernels::softmax_rows(logits).row(0);
}

/// Euclidean soft-kNN weights: w_i = exp(-alpha |k_i - q|) / sum_j (...).
template <typename Scalar>
RowVector<Scalar> soft_knn_weights(const DenseArray<Scalar>& keys,
                                   const RowVector<Scalar>& query, Scalar alpha) {
  if (keys.rows() == 0) throw std::invalid_argument("soft_knn: empty memory");
  if (!(alpha > 0)) throw std::invalid_argument("soft_knn: alpha must be positive");
  if (keys.cols() != query.cols()) {
    throw ShapeError("soft_knn: key width " + std::to_string(keys.cols()) +
                     " != query width " + std::to_string(query.cols()));
  }
  const DenseArray<Scalar> q = query;
  const DenseArray<Scalar> logits = -alpha * kernels::row_distances(q, keys);
  return kernels::softmax_rows(logits).row(0);
}

/// Soft-kNN readout sum_i w_i v_i.
template <typename Scalar>
RowVector<Scalar> soft_knn(const DenseArray<Scalar>& keys, const DenseArray<Scalar>& values,
                           const RowVector<Scalar>& query, Scalar alpha) {
  if (values.rows() != keys.rows()) {
    throw ShapeError("soft_knn: " + std::to_string(keys.rows()) + " keys but " +
                     std::to_string(values.rows()) + " values");
  }
  return soft_knn_weights(keys, query, alpha) * values;
}

/// Per-row zero mean, unit population standard deviation. Constant rows map
/// to zeros (a small variance offset sits under the root).
template <typename Scalar>
DenseArray<Scalar> layer_normalize(const DenseArray<Scalar>& rows) {
  if (rows.cols() < 2) throw ShapeError("layer_normalize: rows need at least 2 features");
  return kernels::layer_normalize_rows(rows);
}

// ---------------------------------------------------------------------------
// Graph builders
// ---------------------------------------------------------------------------

/// Soft-kNN over graph nodes: queries (m x d), keys (n x d), values (n x v).
/// Returns the m x v readout; writes the m x n weight node if requested.
template <typename Scalar>
NodeId soft_knn(BasicGraph<Scalar>& g, NodeId queries, NodeId keys, NodeId values,
                Scalar alpha, NodeId* weights_out = nullptr) {
  if (!(alpha > 0)) throw std::invalid_argument("soft_knn: alpha must be positive");
  if (g.rows(keys) == 0) throw std::invalid_argument("soft_knn: empty memory");
  if (g.rows(values) != g.rows(keys)) throw ShapeError("soft_knn: key/value counts differ");
  const NodeId weights = g.softmax_rows(g.scale(g.row_distances(queries, keys), -alpha));
  if (weights_out) *weights_out = weights;
  return g.matmul(weights, values);
}

/// Dot-product attention: queries (m x d), keys (n x d), values (n x v).
template <typename Scalar>
NodeId dot_attention(BasicGraph<Scalar>& g, NodeId queries, NodeId keys, NodeId values,
                     NodeId* weights_out = nullptr) {
  if (g.rows(keys) == 0) throw std::invalid_argument("dot_attention: empty key set");
  if (g.rows(values) != g.rows(keys)) throw ShapeError("dot_attention: key/value counts differ");
  const NodeId weights = g.softmax_rows(g.matmul(queries, keys, /*transpose_rhs=*/true));
  if (weights_out) *weights_out = weights;
  return g.matmul(weights, values);
}

enum class BlockMode { kResidualAdd, kReplaceInput };

/// Transformer-style block:
///   z* = Normalize(z_in + Attn(memory, z_in))     (residual-add)
///   z* = Normalize(Attn(memory, z_in))            (replace-input)
///   z_out = Normalize(z* + M2 ReLU(M1 z* + b1) + b2)
/// Attn projects memory keys and queries to `attention_dim`, memory values to
/// `attention_dim`, and lifts the readout back to `width`. Projections carry
/// no bias, so all-zero value rows contribute nothing.
class AttentionBlock {
 public:
  AttentionBlock() = default;
  AttentionBlock(std::string prefix, Index width, Index key_width, Index value_width,
                 Index attention_dim, BlockMode mode)
      : prefix_(std::move(prefix)),
        width_(width),
        key_width_(key_width),
        value_width_(value_width),
        attention_dim_(attention_dim),
        mode_(mode) {}

  AttentionBlock(std::string prefix, Index width, Index attention_dim, BlockMode mode)
      : AttentionBlock(std::move(prefix), width, width, width, attention_dim, mode) {}

  template <typename Scalar, typename Rng>
  void init(BasicParameterStore<Scalar>& store, Rng& rng) const {
    add_linear(store, prefix_ + ".query", width_, attention_dim_, rng, false);
    add_linear(store, prefix_ + ".key", key_width_, attention_dim_, rng, false);
    add_linear(store, prefix_ + ".value", value_width_, attention_dim_, rng, false);
    add_linear(store, prefix_ + ".up", attention_dim_, width_, rng, false);
    add_linear(store, prefix_ + ".ff1", width_, width_, rng);
    add_linear(store, prefix_ + ".ff2", width_, width_, rng);
  }

  struct Output {
    NodeId z_out;
    NodeId weights;  // rows(z_in) x rows(memory)
    NodeId keys;     // projected memory keys
  };

  /// Memory keys come from `key_source`, memory values from `value_source`
  /// (the same node for plain self-attention).
  template <typename Scalar>
  Output apply(BasicGraph<Scalar>& g, NodeId z_in, NodeId key_source,
               NodeId value_source) const {
    if (g.cols(z_in) != width_) {
      throw ShapeError(prefix_ + ": input width " + std::to_string(g.cols(z_in)) +
                       " != block width " + std::to_string(width_));
    }
    if (g.rows(key_source) == 0) throw std::invalid_argument(prefix_ + ": empty memory");
    const NodeId q = g.matmul(z_in, g.parameter(prefix_ + ".query.weight"));
    const NodeId k = g.matmul(key_source, g.parameter(prefix_ + ".key.weight"));
    const NodeId v = g.matmul(value_source, g.parameter(prefix_ + ".value.weight"));
    NodeId weights{};
    const NodeId read = dot_attention(g, q, k, v, &weights);
    const NodeId lifted = g.matmul(read, g.parameter(prefix_ + ".up.weight"));
    const NodeId mixed = mode_ == BlockMode::kResidualAdd ? g.add(z_in, lifted) : lifted;
    const NodeId z_star = g.layer_norm(mixed);
    const NodeId hidden = g.relu(linear(g, z_star, ".ff1"));
    const NodeId z_out = g.layer_norm(g.add(z_star, linear(g, hidden, ".ff2")));
    return {z_out, weights, k};
  }

  /// transformer_block(z_in, memory): memory rows are both keys and values.
  template <typename Scalar>
  NodeId operator()(BasicGraph<Scalar>& g, NodeId z_in, NodeId memory) const {
    return apply(g, z_in, memory, memory).z_out;
  }

  const std::string& prefix() const { return prefix_; }
  Index width() const { return width_; }
  Index attention_dim() const { return attention_dim_; }
  BlockMode mode() const { return mode_; }

 private:
  template <typename Scalar>
  NodeId linear(BasicGraph<Scalar>& g, NodeId x, const char* suffix) const {
    return g.add_bias(g.matmul(x, g.parameter(prefix_ + suffix + ".weight")),
                      g.parameter(prefix_ + suffix + ".bias"));
  }

  std::string prefix_;
  Index width_ = 0;
  Index key_width_ = 0;
  Index value_width_ = 0;
  Index attention_dim_ = 8;
  BlockMode mode_ = BlockMode::kResidualAdd;
};

}  // namespace qdn
