#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qdn/autodiff/graph.hpp"
#include "qdn/floorplan/floorplan.hpp"
#include "qdn/nn/mlp.hpp"

namespace qdn {

// Leading rows of a row-major matrix.
using MatrixRows = Eigen::Block<const Matrix, Eigen::Dynamic, Eigen::Dynamic, true>;

struct ExplorerArchitecture {
  int hidden_layers = 4;
  Index hidden_width = 256;
  Index key_dim = 24;
  Index value_dim = 128;
  double alpha = 20.0;
};

/// Collision-prediction network. E_s embeds (state, action) into the key
/// space and doubles as the query encoder E_q; E_o embeds (state, action,
/// outcome) into the value space; P maps a soft-kNN readout to a collision
/// probability.
class ExplorerNetwork {
 public:
  static constexpr Index kStateActionWidth = 4;
  static constexpr Index kTransitionWidth = 5;

  ExplorerNetwork(const ExplorerArchitecture& arch, std::uint64_t init_seed);

  const ExplorerArchitecture& architecture() const { return arch_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  // Graph builders.
  NodeId embed_keys(Graph& g, NodeId state_actions) const { return key_net_(g, state_actions); }
  NodeId embed_values(Graph& g, NodeId transitions) const { return value_net_(g, transitions); }
  NodeId predict(Graph& g, NodeId readout) const { return predictor_(g, readout); }

  /// Collision probabilities (m x 1) for query rows given memory rows.
  NodeId collision_probability(Graph& g, NodeId memory_keys, NodeId memory_values,
                               NodeId query_state_actions) const;

  /// Mean logistic loss of the queries against 0/1 labels (1 x 1).
  NodeId episode_loss(Graph& g, const Matrix& memory_sa, const Matrix& memory_sao,
                      const Matrix& query_sa, const Matrix& labels) const;

  /// Keys of the given (state, action) rows, one row at a time so that a
  /// transition's key never depends on what it was batched with.
  Matrix embed_rows(const Matrix& state_actions) const;
  Row embed(const Vec2& state, const Vec2& action) const;
  Row embed_value(const Transition& t) const;

  /// Batched key evaluation for proposal sets.
  Matrix embed_batch(const Matrix& state_actions) const;

 private:
  ExplorerArchitecture arch_;
  ParameterStore params_;
  Mlp key_net_;
  Mlp value_net_;
  Mlp predictor_;
};

Matrix state_action_row(const Vec2& state, const Vec2& action);
Matrix state_action_rows(std::span<const Transition> transitions);
Matrix transition_rows(std::span<const Transition> transitions);
Matrix collision_labels(std::span<const Transition> transitions);

/// Transitions with cached key (E_s) and value (E_o) embeddings. The caches
/// hold single-row evaluations and are dropped by invalidate().
class EpisodicMemory {
 public:
  EpisodicMemory() = default;

  void append(const ExplorerNetwork& net, const Transition& t);
  void invalidate();
  void refresh(const ExplorerNetwork& net);

  std::size_t size() const { return transitions_.size(); }
  bool empty() const { return transitions_.empty(); }
  bool cached() const { return cache_valid_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  /// Cached rows, parallel to transitions().
  MatrixRows keys() const;
  MatrixRows values() const;

 private:
  void grow(const Row& key, const Row& value);

  std::vector<Transition> transitions_;
  Matrix keys_;
  Matrix values_;
  Index rows_ = 0;
  bool cache_valid_ = true;
};

/// Distance from E_s(state, action) to the nearest cached key.
double novelty_score(const ExplorerNetwork& net, const EpisodicMemory& memory, const Vec2& state,
                     const Vec2& action);

/// Nearest-key distance for each row of `keys`.
std::vector<double> nearest_distances(const Eigen::Ref<const Matrix>& keys,
                                      const Eigen::Ref<const Matrix>& memory_keys);

/// P(soft_knn(keys, values, E_q(query))).
double predict_collision_prob(const ExplorerNetwork& net, const EpisodicMemory& memory,
                              const Vec2& state, const Vec2& action);

}  // namespace qdn
