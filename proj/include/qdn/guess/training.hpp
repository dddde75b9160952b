#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qdn/guess/guesser.hpp"

namespace qdn {

struct GuesserTrainingConfig {
  int epochs = 150;
  int batch_size = 64;
  double learning_rate = 1e-4;
  int game_length = 30;
  int initial_loss_games = 1000;  // sample used for the loss before training
};

struct GuesserLossHistory {
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

using EpochProgress = std::function<void(int epoch, double loss)>;

/// Mean -log p(target) over the games; accumulates gradients scaled by
/// 1/|games| when `gradients` is non-null.
double guesser_loss(const GuesserNetwork& net, std::span<const GameRecord> games,
                    GradientMap<double>* gradients = nullptr);

/// Adam on the full-memory cross-entropy objective, one step per
/// mini-batch, with a fresh seeded shuffle every epoch.
GuesserLossHistory train_guesser(GuesserNetwork& net, const std::vector<GameRecord>& corpus,
                                 const GuesserTrainingConfig& config, std::uint64_t seed,
                                 const EpochProgress& progress = {});

/// Fraction of games whose argmax prediction from the full memory is the
/// target.
double prediction_accuracy(const GuesserNetwork& net, std::span<const GameRecord> games);

/// Mean probability per value already ruled out by the evidence, averaged
/// over every prefix of length 1..prefix_moves that excludes something.
double excluded_probability(const GuesserNetwork& net, std::span<const GameRecord> games,
                            int prefix_moves);

}  // namespace qdn
