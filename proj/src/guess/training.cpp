#include "qdn/guess/training.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qdn {

double guesser_loss(const GuesserNetwork& net, std::span<const GameRecord> games,
                    GradientMap<double>* gradients) {
  if (games.empty()) throw std::invalid_argument("guesser_loss: no games");
  const double weight = 1.0 / static_cast<double>(games.size());
  double total = 0.0;
  for (const auto& game : games) {
    Graph g(net.parameters());
    const NodeId loss = net.game_loss(g, game);
    total += g.evaluate(loss)(0, 0);
    if (gradients) {
      g.backward(loss, Matrix::Constant(1, 1, weight));
      g.accumulate_parameter_gradients(*gradients);
    }
  }
  return total * weight;
}

GuesserLossHistory train_guesser(GuesserNetwork& net, const std::vector<GameRecord>& corpus,
                                 const GuesserTrainingConfig& config, std::uint64_t seed,
                                 const EpochProgress& progress) {
  if (corpus.empty()) throw std::invalid_argument("train_guesser: empty corpus");
  if (config.batch_size < 1) throw std::invalid_argument("train_guesser: batch size must be positive");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (static_cast<int>(corpus[i].size()) != config.game_length) {
      throw std::invalid_argument("train_guesser: game " + std::to_string(i) + " has " +
                                  std::to_string(corpus[i].size()) + " moves, expected " +
                                  std::to_string(config.game_length));
    }
    corpus[i].validate();
  }

  GuesserLossHistory history;
  const std::size_t probe = std::min<std::size_t>(corpus.size(),
                                                  static_cast<std::size_t>(std::max(1, config.initial_loss_games)));
  history.initial_loss = guesser_loss(net, std::span(corpus).first(probe));

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<GameRecord> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(corpus[order[i]]);
      GradientMap<double> grads;
      sum += guesser_loss(net, batch, &grads) * static_cast<double>(batch.size());
      adam_step(net.parameters(), grads, config.learning_rate);
    }
    history.epoch_loss.push_back(sum / static_cast<double>(corpus.size()));
    if (progress) progress(epoch, history.epoch_loss.back());
  }
  return history;
}

double prediction_accuracy(const GuesserNetwork& net, std::span<const GameRecord> games) {
  if (games.empty()) throw std::invalid_argument("prediction_accuracy: no games");
  int hits = 0;
  for (const auto& game : games) {
    const Row p = predict_target_distribution(net, game);
    Index best = 0;
    p.maxCoeff(&best);
    hits += (best + 1 == game.target) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(games.size());
}

double excluded_probability(const GuesserNetwork& net, std::span<const GameRecord> games,
                            int prefix_moves) {
  double total = 0.0;
  int count = 0;
  for (const auto& game : games) {
    ConsistentSet set;
    const int moves = std::min<int>(prefix_moves, static_cast<int>(game.size()));
    for (int k = 1; k <= moves; ++k) {
      set.update(game.guesses[static_cast<std::size_t>(k - 1)], game.outcomes[static_cast<std::size_t>(k - 1)]);
      const int excluded = kGuessRange - set.size();
      if (excluded == 0) continue;
      const Row p = predict_target_distribution(net, game.prefix(static_cast<std::size_t>(k)));
      const double inside = p.segment(set.lo - 1, set.size()).sum();
      total += (p.sum() - inside) / excluded;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("excluded_probability: no prefix excludes a value");
  return total / count;
}

}  // namespace qdn
