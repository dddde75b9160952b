#include "qdn/guess/guesser.hpp"

#include <random>
#include <stdexcept>

namespace qdn {

namespace {

std::vector<Index> tower(Index in, int hidden_layers, Index hidden, Index out) {
  std::vector<Index> widths{in};
  for (int i = 0; i < hidden_layers; ++i) widths.push_back(hidden);
  widths.push_back(out);
  return widths;
}

void require_memory(const GameRecord& prefix, const char* what) {
  if (prefix.size() == 0) throw std::invalid_argument(std::string(what) + ": empty memory");
  if (prefix.outcomes.size() != prefix.guesses.size()) {
    throw std::invalid_argument(std::string(what) + ": guesses and outcomes differ in length");
  }
}

}  // namespace

GuesserNetwork::GuesserNetwork(const GuesserArchitecture& arch, std::uint64_t init_seed)
    : arch_(arch),
      state_net_("guesser.state", tower(kGuessRange, arch.state_layers - 1, arch.width, arch.width),
                 OutputActivation::kRelu),
      outcome_net_("guesser.outcome", {kOutcomeInputWidth, arch.width}, OutputActivation::kRelu),
      outcome_blocks_{
          AttentionBlock("guesser.outcome.block0", arch.width, arch.attention_dim, BlockMode::kResidualAdd),
          AttentionBlock("guesser.outcome.block1", arch.width, arch.attention_dim, BlockMode::kResidualAdd)},
      query_blocks_{
          AttentionBlock("guesser.query.block0", arch.width, arch.attention_dim, BlockMode::kResidualAdd),
          AttentionBlock("guesser.query.block1", arch.width, arch.attention_dim, BlockMode::kResidualAdd),
          AttentionBlock("guesser.query.block2", arch.width, arch.attention_dim, BlockMode::kReplaceInput)},
      head_("guesser.head", tower(arch.width, arch.head_layers, arch.width, kGuessRange),
            OutputActivation::kLinear) {
  if (arch.state_layers < 1) throw std::invalid_argument("E_s needs at least one layer");
  std::mt19937_64 rng(init_seed);
  state_net_.init(params_, rng);
  outcome_net_.init(params_, rng);
  for (const auto& b : outcome_blocks_) b.init(params_, rng);
  add_linear(params_, "guesser.query.initial", 1, arch.width, rng, false);
  for (const auto& b : query_blocks_) b.init(params_, rng);
  head_.init(params_, rng);
  // Uniform initial prediction.
  params_.entry("guesser.head.l" + std::to_string(arch.head_layers) + ".weight").value.setZero();
}

NodeId GuesserNetwork::outcome_values(Graph& g, NodeId stacked) const {
  NodeId z = outcome_net_(g, stacked);
  for (const auto& b : outcome_blocks_) z = b(g, z, z);
  return z;
}

GuesserNetwork::QueryOutput GuesserNetwork::query(Graph& g, NodeId key_source, NodeId value_source) const {
  QueryOutput out{};
  NodeId z = g.parameter("guesser.query.initial.weight");
  for (int i = 0; i < kQueryLookups; ++i) {
    const auto step = query_blocks_[static_cast<std::size_t>(i)].apply(g, z, key_source, value_source);
    out.states[static_cast<std::size_t>(i)] = z;
    out.weights[static_cast<std::size_t>(i)] = step.weights;
    z = step.z_out;
  }
  out.probabilities = g.softmax_rows(head_(g, z));
  return out;
}

NodeId GuesserNetwork::game_loss(Graph& g, const GameRecord& game) const {
  require_memory(game, "game_loss");
  const NodeId keys = state_features(g, g.input(guess_rows(game.guesses)));
  const NodeId values = outcome_values(g, g.input(outcome_rows(game)));
  const NodeId p = query(g, keys, values).probabilities;
  Matrix onehot = Matrix::Zero(1, kGuessRange);
  onehot(0, game.target - 1) = 1.0;
  return g.scale(g.mean(g.mul(g.input(onehot), g.log(p))), -static_cast<double>(kGuessRange));
}

Matrix guess_rows(const std::vector<int>& guesses) {
  Matrix out(static_cast<Index>(guesses.size()), kGuessRange);
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = thermometer_encode(guesses[static_cast<std::size_t>(i)]);
  return out;
}

Matrix outcome_rows(const GameRecord& record) {
  Matrix out = Matrix::Zero(static_cast<Index>(record.size()), GuesserNetwork::kOutcomeInputWidth);
  for (Index i = 0; i < out.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out(i, static_cast<Index>(record.outcomes[k])) = 1.0;
    out.row(i).tail(kGuessRange) = thermometer_encode(record.guesses[k]);
  }
  return out;
}

MemoryEncoding encode_memory(const GuesserNetwork& net, const GameRecord& prefix) {
  require_memory(prefix, "encode_memory");
  Graph g(net.parameters());
  const NodeId features = net.state_features(g, g.input(guess_rows(prefix.guesses)));
  const NodeId values = net.outcome_values(g, g.input(outcome_rows(prefix)));
  MemoryEncoding enc;
  enc.values = g.evaluate(values);
  enc.features = g.value(features);
  for (int i = 0; i < kQueryLookups; ++i) {
    enc.keys[static_cast<std::size_t>(i)] =
        enc.features * net.parameters().value(net.query_block(i).prefix() + ".key.weight");
  }
  return enc;
}

Row predict_target_distribution(const GuesserNetwork& net, const GameRecord& prefix) {
  require_memory(prefix, "predict_target_distribution");
  Graph g(net.parameters());
  const NodeId keys = net.state_features(g, g.input(guess_rows(prefix.guesses)));
  const NodeId values = net.outcome_values(g, g.input(outcome_rows(prefix)));
  return g.evaluate(net.query(g, keys, values).probabilities).row(0);
}

Matrix candidate_features(const GuesserNetwork& net, const std::vector<int>& candidates) {
  Graph g(net.parameters());
  return g.evaluate(net.state_features(g, g.input(guess_rows(candidates))));
}

std::vector<int> all_guesses() {
  std::vector<int> out(kGuessRange);
  for (int i = 0; i < kGuessRange; ++i) out[static_cast<std::size_t>(i)] = i + 1;
  return out;
}

Row SaliencyProfile::aggregate(SaliencyAggregate mode) const {
  if (mode == SaliencyAggregate::kThirdLookup) return virtual_weights[kQueryLookups - 1];
  Row sum = virtual_weights[0];
  for (int i = 1; i < kQueryLookups; ++i) sum += virtual_weights[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(kQueryLookups);
}

SaliencyProfile saliency_over_candidates(const GuesserNetwork& net, const GameRecord& prefix,
                                         const std::vector<int>& candidates, const Matrix* features) {
  require_memory(prefix, "saliency_over_candidates");
  if (candidates.empty()) throw std::invalid_argument("saliency_over_candidates: no candidates");
  const MemoryEncoding enc = encode_memory(net, prefix);
  Matrix virtual_features;
  if (!features) virtual_features = candidate_features(net, candidates);
  const Matrix& cand = features ? *features : virtual_features;
  if (cand.rows() != static_cast<Index>(candidates.size()) || cand.cols() != enc.features.cols()) {
    throw ShapeError("saliency_over_candidates: candidate features " + shape_string(cand));
  }

  // Each lookup keeps the query it issued against real memory; the virtual
  // keys only join the softmax, so they cannot perturb the state.
  Graph g(net.parameters());
  const auto out = net.query(g, g.input(enc.features), g.input(enc.values));
  g.evaluate(out.probabilities);
  const Index n = enc.features.rows(), m = cand.rows();
  SaliencyProfile profile;
  profile.candidates = candidates;
  for (int i = 0; i < kQueryLookups; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const Matrix& key_weight = net.parameters().value(net.query_block(i).prefix() + ".key.weight");
    const Matrix& query_weight = net.parameters().value(net.query_block(i).prefix() + ".query.weight");
    Matrix keys(n + m, key_weight.cols());
    keys << enc.keys[k], cand * key_weight;
    const Row q = g.value(out.states[k]) * query_weight;
    const Row w = dot_attention_weights(keys, q);
    profile.real_weights[k] = w.head(n);
    profile.virtual_weights[k] = w.tail(m);
  }
  return profile;
}

}  // namespace qdn
