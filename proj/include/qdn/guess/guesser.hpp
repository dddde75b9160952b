#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qdn/attention/attention.hpp"
#include "qdn/guess/game.hpp"
#include "qdn/nn/mlp.hpp"

namespace qdn {

inline constexpr int kQueryLookups = 3;

struct GuesserArchitecture {
  Index width = 128;
  int state_layers = 3;
  int head_layers = 2;
  Index attention_dim = 8;
};

enum class SaliencyAggregate { kThirdLookup, kMeanOfThree };

/// Guessing-game network. E_s maps thermometer-coded guesses to key
/// features; the outcome pathway turns (outcome, guess) rows into values
/// that attend to each other; a learned initial query runs three lookups
/// into memory and a softmax head scores the 256 targets.
class GuesserNetwork {
 public:
  static constexpr Index kOutcomeInputWidth = 3 + kGuessRange;

  GuesserNetwork(const GuesserArchitecture& arch, std::uint64_t init_seed);

  const GuesserArchitecture& architecture() const { return arch_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }

  NodeId state_features(Graph& g, NodeId thermometers) const { return state_net_(g, thermometers); }
  /// Outcome pathway through both self-attention blocks.
  NodeId outcome_values(Graph& g, NodeId stacked) const;

  struct QueryOutput {
    NodeId probabilities;  // 1 x 256
    std::array<NodeId, kQueryLookups> weights;  // 1 x rows(memory) each
    std::array<NodeId, kQueryLookups> states;  // query state entering each lookup
  };
  QueryOutput query(Graph& g, NodeId key_source, NodeId value_source) const;

  /// -log p(target) with the whole game in memory.
  NodeId game_loss(Graph& g, const GameRecord& game) const;

  const AttentionBlock& query_block(int i) const { return query_blocks_.at(static_cast<std::size_t>(i)); }

 private:
  GuesserArchitecture arch_;
  ParameterStore params_;
  Mlp state_net_;
  Mlp outcome_net_;
  std::array<AttentionBlock, 2> outcome_blocks_;
  std::array<AttentionBlock, kQueryLookups> query_blocks_;
  Mlp head_;
};

/// Thermometer rows (n x 256) of the guesses.
Matrix guess_rows(const std::vector<int>& guesses);
/// [one-hot outcome | thermometer guess] rows (n x 259).
Matrix outcome_rows(const GameRecord& record);

struct MemoryEncoding {
  Matrix features;  // E_s rows, n x width
  std::array<Matrix, kQueryLookups> keys;  // per lookup, n x attention_dim
  Matrix values;  // outcome pathway rows, n x width
};

MemoryEncoding encode_memory(const GuesserNetwork& net, const GameRecord& prefix);

/// Pass 1: prediction from real memory only.
Row predict_target_distribution(const GuesserNetwork& net, const GameRecord& prefix);

/// E_s rows for candidate guesses, for reuse across saliency calls.
Matrix candidate_features(const GuesserNetwork& net, const std::vector<int>& candidates);
std::vector<int> all_guesses();

struct SaliencyProfile {
  std::vector<int> candidates;
  std::array<Row, kQueryLookups> virtual_weights;  // per lookup, one per candidate
  std::array<Row, kQueryLookups> real_weights;  // per lookup, one per memory entry

  Row aggregate(SaliencyAggregate mode) const;
};

/// Pass 2: the query lookups rerun over real keys plus a virtual key per
/// candidate. Virtual entries carry zero values. `features` may hold
/// precomputed candidate_features(net, candidates).
SaliencyProfile saliency_over_candidates(const GuesserNetwork& net, const GameRecord& prefix,
                                         const std::vector<int>& candidates,
                                         const Matrix* features = nullptr);

}  // namespace qdn
