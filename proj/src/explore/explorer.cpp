#include "qdn/explore/explorer.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "qdn/attention/attention.hpp"

namespace qdn {

namespace {

std::vector<Index> tower(Index in, int hidden_layers, Index hidden, Index out) {
  std::vector<Index> widths{in};
  for (int i = 0; i < hidden_layers; ++i) widths.push_back(hidden);
  widths.push_back(out);
  return widths;
}

void require_unit(const Vec2& action) {
  if (std::abs(action.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("action must be a unit vector");
  }
}

}  // namespace

ExplorerNetwork::ExplorerNetwork(const ExplorerArchitecture& arch, std::uint64_t init_seed)
    : arch_(arch),
      key_net_("explorer.key",
               tower(kStateActionWidth, arch.hidden_layers, arch.hidden_width, arch.key_dim),
               OutputActivation::kLinear),
      value_net_("explorer.value",
                 tower(kTransitionWidth, arch.hidden_layers, arch.hidden_width, arch.value_dim),
                 OutputActivation::kLinear),
      predictor_("explorer.predict",
                 tower(arch.value_dim, arch.hidden_layers, arch.hidden_width, 1),
                 OutputActivation::kSigmoid) {
  if (!(arch.alpha > 0)) throw std::invalid_argument("alpha must be positive");
  std::mt19937_64 rng(init_seed);
  key_net_.init(params_, rng);
  value_net_.init(params_, rng);
  predictor_.init(params_, rng);
}

NodeId ExplorerNetwork::collision_probability(Graph& g, NodeId memory_keys, NodeId memory_values,
                                              NodeId query_state_actions) const {
  const NodeId queries = embed_keys(g, query_state_actions);
  const NodeId readout = soft_knn(g, queries, memory_keys, memory_values, arch_.alpha);
  return predict(g, readout);
}

NodeId ExplorerNetwork::episode_loss(Graph& g, const Matrix& memory_sa, const Matrix& memory_sao,
                                     const Matrix& query_sa, const Matrix& labels) const {
  const NodeId keys = embed_keys(g, g.input(memory_sa));
  const NodeId values = embed_values(g, g.input(memory_sao));
  const NodeId p = collision_probability(g, keys, values, g.input(query_sa));
  // L = -y log p - (1 - y) log(1 - p)
  const NodeId one = g.input(Matrix::Ones(1, 1));
  const NodeId not_p = g.add_bias(g.scale(p, -1.0), one);
  const NodeId y = g.input(labels);
  const NodeId not_y = g.input((1.0 - labels.array()).matrix());
  const NodeId log_likelihood = g.add(g.mul(y, g.log(p)), g.mul(not_y, g.log(not_p)));
  return g.scale(g.mean(log_likelihood), -1.0);
}

Matrix ExplorerNetwork::embed_rows(const Matrix& state_actions) const {
  Matrix out(state_actions.rows(), arch_.key_dim);
  for (Index i = 0; i < state_actions.rows(); ++i) {
    Graph g(params_);
    const NodeId k = embed_keys(g, g.input(state_actions.row(i)));
    out.row(i) = g.evaluate(k);
  }
  return out;
}

Row ExplorerNetwork::embed(const Vec2& state, const Vec2& action) const {
  require_unit(action);
  return embed_rows(state_action_row(state, action)).row(0);
}

Row ExplorerNetwork::embed_value(const Transition& t) const {
  Graph g(params_);
  const NodeId v = embed_values(g, g.input(transition_rows(std::span(&t, 1))));
  return g.evaluate(v).row(0);
}

Matrix ExplorerNetwork::embed_batch(const Matrix& state_actions) const {
  Graph g(params_);
  const NodeId k = embed_keys(g, g.input(state_actions));
  return g.evaluate(k);
}

Matrix state_action_row(const Vec2& state, const Vec2& action) {
  Matrix row(1, ExplorerNetwork::kStateActionWidth);
  row << state.x(), state.y(), action.x(), action.y();
  return row;
}

Matrix state_action_rows(std::span<const Transition> transitions) {
  Matrix out(static_cast<Index>(transitions.size()), ExplorerNetwork::kStateActionWidth);
  for (Index i = 0; i < out.rows(); ++i) {
    const auto& t = transitions[static_cast<std::size_t>(i)];
    out.row(i) << t.state.x(), t.state.y(), t.action.x(), t.action.y();
  }
  return out;
}

Matrix transition_rows(std::span<const Transition> transitions) {
  Matrix out(static_cast<Index>(transitions.size()), ExplorerNetwork::kTransitionWidth);
  for (Index i = 0; i < out.rows(); ++i) {
    const auto& t = transitions[static_cast<std::size_t>(i)];
    out.row(i) << t.state.x(), t.state.y(), t.action.x(), t.action.y(), t.collided ? 1.0 : 0.0;
  }
  return out;
}

Matrix collision_labels(std::span<const Transition> transitions) {
  Matrix out(static_cast<Index>(transitions.size()), 1);
  for (Index i = 0; i < out.rows(); ++i) {
    out(i, 0) = transitions[static_cast<std::size_t>(i)].collided ? 1.0 : 0.0;
  }
  return out;
}

// --- EpisodicMemory --------------------------------------------------------

void EpisodicMemory::append(const ExplorerNetwork& net, const Transition& t) {
  require_unit(t.action);
  transitions_.push_back(t);
  if (cache_valid_) grow(net.embed(t.state, t.action), net.embed_value(t));
}

void EpisodicMemory::grow(const Row& key, const Row& value) {
  if (rows_ == keys_.rows()) {
    const Index capacity = std::max<Index>(64, 2 * keys_.rows());
    keys_.conservativeResize(capacity, key.cols());
    values_.conservativeResize(capacity, value.cols());
  }
  keys_.row(rows_) = key;
  values_.row(rows_) = value;
  ++rows_;
}

void EpisodicMemory::invalidate() {
  cache_valid_ = false;
  keys_.resize(0, 0);
  values_.resize(0, 0);
  rows_ = 0;
}

void EpisodicMemory::refresh(const ExplorerNetwork& net) {
  keys_.resize(0, 0);
  values_.resize(0, 0);
  rows_ = 0;
  cache_valid_ = true;
  for (const auto& t : transitions_) grow(net.embed(t.state, t.action), net.embed_value(t));
}

MatrixRows EpisodicMemory::keys() const {
  if (!cache_valid_) throw std::logic_error("memory caches are stale; call refresh()");
  return keys_.topRows(rows_);
}

MatrixRows EpisodicMemory::values() const {
  if (!cache_valid_) throw std::logic_error("memory caches are stale; call refresh()");
  return values_.topRows(rows_);
}

// --- lookups ----------------------------------------------------------------

std::vector<double> nearest_distances(const Eigen::Ref<const Matrix>& keys,
                                      const Eigen::Ref<const Matrix>& memory_keys) {
  if (memory_keys.rows() == 0) throw std::invalid_argument("novelty lookup on empty memory");
  std::vector<double> out(static_cast<std::size_t>(keys.rows()));
  for (Index i = 0; i < keys.rows(); ++i) {
    out[static_cast<std::size_t>(i)] =
        (memory_keys.rowwise() - keys.row(i)).rowwise().norm().minCoeff();
  }
  return out;
}

double novelty_score(const ExplorerNetwork& net, const EpisodicMemory& memory, const Vec2& state,
                     const Vec2& action) {
  if (memory.empty()) throw std::invalid_argument("novelty_score: empty memory");
  const Matrix key = net.embed(state, action);
  return nearest_distances(key, memory.keys())[0];
}

double predict_collision_prob(const ExplorerNetwork& net, const EpisodicMemory& memory,
                              const Vec2& state, const Vec2& action) {
  if (memory.empty()) throw std::invalid_argument("predict_collision_prob: empty memory");
  require_unit(action);
  Graph g(net.parameters());
  const NodeId keys = g.input(memory.keys());
  const NodeId values = g.input(memory.values());
  const NodeId p = net.collision_probability(g, keys, values, g.input(state_action_row(state, action)));
  return g.evaluate(p)(0, 0);
}

}  // namespace qdn
