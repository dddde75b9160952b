#include "qdn/explore/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qdn {

std::vector<TrajectoryRecord> generate_corpus(const CorpusConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TrajectoryRecord> corpus;
  corpus.reserve(static_cast<std::size_t>(config.trajectories));
  for (int i = 0; i < config.trajectories; ++i) {
    TrajectoryRecord rec;
    rec.seed = rng();
    rec.plan = generate_floorplan(rec.seed, config.floorplan);
    std::mt19937_64 start_rng(rng());
    const AgentState start{sample_position(rec.plan, start_rng)};
    rec.steps = random_trajectory(rec.plan, start, config.steps, rng(), config.step_length);
    corpus.push_back(std::move(rec));
  }
  return corpus;
}

ExplorerEpisode sample_episode(std::size_t trajectory_count, int trajectory_steps,
                               const ExplorerTrainingConfig& config, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, trajectory_count - 1);
  std::uniform_int_distribution<int> start(config.memory_steps, trajectory_steps - config.query_steps);
  ExplorerEpisode e;
  e.trajectory = pick(rng);
  e.start = start(rng);
  return e;
}

double explorer_batch_loss(const ExplorerNetwork& net, const std::vector<TrajectoryRecord>& corpus,
                           std::span<const std::size_t> trajectory_ids,
                           std::span<const ExplorerEpisode> episodes,
                           const ExplorerTrainingConfig& config, GradientMap<double>* gradients) {
  double total = 0.0;
  const double weight = 1.0 / static_cast<double>(episodes.size());
  for (const auto& e : episodes) {
    const auto& steps = corpus[trajectory_ids[e.trajectory]].steps;
    const auto memory = std::span(steps).subspan(static_cast<std::size_t>(e.start - config.memory_steps),
                                                 static_cast<std::size_t>(config.memory_steps));
    const auto queries = std::span(steps).subspan(static_cast<std::size_t>(e.start),
                                                  static_cast<std::size_t>(config.query_steps));
    Graph g(net.parameters());
    const NodeId loss = net.episode_loss(g, state_action_rows(memory), transition_rows(memory),
                                         state_action_rows(queries), collision_labels(queries));
    total += g.evaluate(loss)(0, 0);
    if (gradients) {
      g.backward(loss, Matrix::Constant(1, 1, weight));
      g.accumulate_parameter_gradients(*gradients);
    }
  }
  return total * weight;
}

double base_rate_entropy(const std::vector<TrajectoryRecord>& corpus, double* rate) {
  double hits = 0, count = 0;
  for (const auto& rec : corpus) {
    for (const auto& t : rec.steps) hits += t.collided ? 1.0 : 0.0;
    count += static_cast<double>(rec.steps.size());
  }
  const double r = count > 0 ? hits / count : 0.0;
  if (rate) *rate = r;
  if (r <= 0.0 || r >= 1.0) return 0.0;
  return -r * std::log(r) - (1 - r) * std::log(1 - r);
}

ExplorerLossHistory train_explorer(ExplorerNetwork& net, const std::vector<TrajectoryRecord>& corpus,
                                   const ExplorerTrainingConfig& config, std::uint64_t seed,
                                   const TrainingProgress& progress) {
  const int window = config.memory_steps + config.query_steps;
  if (corpus.empty()) throw std::invalid_argument("train_explorer: empty corpus");
  for (const auto& rec : corpus) {
    if (static_cast<int>(rec.steps.size()) < window) {
      throw std::invalid_argument("train_explorer: trajectory shorter than memory + query window");
    }
  }
  const int steps = static_cast<int>(
      std::min_element(corpus.begin(), corpus.end(), [](const auto& a, const auto& b) {
        return a.steps.size() < b.steps.size();
      })->steps.size());

  const std::size_t holdout = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(config.holdout_fraction * corpus.size())));
  if (corpus.size() <= holdout) throw std::invalid_argument("train_explorer: corpus too small to split");
  std::vector<std::size_t> train_ids(corpus.size() - holdout), heldout_ids(holdout);
  std::iota(train_ids.begin(), train_ids.end(), 0);
  std::iota(heldout_ids.begin(), heldout_ids.end(), corpus.size() - holdout);

  std::mt19937_64 rng(seed);
  std::vector<ExplorerEpisode> heldout_episodes;
  for (int i = 0; i < config.holdout_episodes; ++i) {
    heldout_episodes.push_back(sample_episode(heldout_ids.size(), steps, config, rng));
  }
  auto heldout_loss = [&] {
    return explorer_batch_loss(net, corpus, heldout_ids, heldout_episodes, config, nullptr);
  };

  ExplorerLossHistory history;
  history.base_rate_entropy = base_rate_entropy(corpus, &history.collision_rate);
  double lr = config.learning_rate;
  double best = heldout_loss();
  int stale = 0;
  history.eval_batches.push_back(0);
  history.heldout.push_back(best);
  history.learning_rates.push_back(lr);
  if (progress) progress(0, std::numeric_limits<double>::quiet_NaN(), best);

  std::vector<ExplorerEpisode> batch(static_cast<std::size_t>(config.episodes_per_batch));
  for (int b = 1; b <= config.batches; ++b) {
    for (auto& e : batch) e = sample_episode(train_ids.size(), steps, config, rng);
    GradientMap<double> grads;
    const double loss = explorer_batch_loss(net, corpus, train_ids, batch, config, &grads);
    adam_step(net.parameters(), grads, lr);
    history.train.push_back(loss);

    if (b % config.eval_every == 0 || b == config.batches) {
      const double h = heldout_loss();
      if (h < best) {
        best = h;
        stale = 0;
      } else if (++stale >= config.patience) {
        lr = std::max(config.min_learning_rate, lr * config.lr_decay);
        stale = 0;
      }
      history.eval_batches.push_back(b);
      history.heldout.push_back(h);
      history.learning_rates.push_back(lr);
      if (progress) progress(b, loss, h);
    }
  }
  return history;
}

}  // namespace qdn
