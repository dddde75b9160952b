#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qdn/explore/explorer.hpp"
#include "qdn/floorplan/floorplan.hpp"

namespace qdn {

struct TrajectoryRecord {
  std::uint64_t seed = 0;  // floorplan seed
  Floorplan plan;
  std::vector<Transition> steps;
};

struct CorpusConfig {
  int trajectories = 1000;
  int steps = 1000;
  double step_length = 0.05;
  FloorplanConfig floorplan;
};

/// Random-action trajectories, each on its own freshly generated floorplan.
std::vector<TrajectoryRecord> generate_corpus(const CorpusConfig& config, std::uint64_t seed);

struct ExplorerTrainingConfig {
  int episodes_per_batch = 50;
  int memory_steps = 300;
  int query_steps = 100;
  int batches = 15000;
  double learning_rate = 4e-4;
  double lr_decay = 0.9;
  int eval_every = 100;
  int patience = 10;  // evaluations without a new held-out minimum
  double min_learning_rate = 1e-6;
  double holdout_fraction = 0.05;
  int holdout_episodes = 50;
};

struct ExplorerEpisode {
  std::size_t trajectory = 0;
  int start = 0;  // first query step
};

struct ExplorerLossHistory {
  std::vector<double> train;  // one entry per batch
  std::vector<int> eval_batches;
  std::vector<double> heldout;  // one entry per evaluation
  std::vector<double> learning_rates;  // rate in effect at each evaluation
  double base_rate_entropy = 0.0;
  double collision_rate = 0.0;
};

using TrainingProgress = std::function<void(int batch, double train_loss, double heldout_loss)>;

/// Uniform episode start in [memory_steps, steps - query_steps].
ExplorerEpisode sample_episode(std::size_t trajectory_count, int trajectory_steps,
                               const ExplorerTrainingConfig& config, std::mt19937_64& rng);

/// Mean episode loss; accumulates gradients scaled by 1/|episodes| when
/// `gradients` is non-null.
double explorer_batch_loss(const ExplorerNetwork& net, const std::vector<TrajectoryRecord>& corpus,
                           std::span<const std::size_t> trajectory_ids,
                           std::span<const ExplorerEpisode> episodes,
                           const ExplorerTrainingConfig& config, GradientMap<double>* gradients);

/// Adam on the logistic collision loss. The corpus is split into training
/// and held-out trajectories; the held-out loss drives the learning-rate
/// decay.
ExplorerLossHistory train_explorer(ExplorerNetwork& net, const std::vector<TrajectoryRecord>& corpus,
                                   const ExplorerTrainingConfig& config, std::uint64_t seed,
                                   const TrainingProgress& progress = {});

/// -r log r - (1 - r) log(1 - r) for the corpus collision rate r.
double base_rate_entropy(const std::vector<TrajectoryRecord>& corpus, double* rate = nullptr);

}  // namespace qdn
