#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdn/guess/guesser.hpp"

namespace qdn {

enum class GuessPolicy { kSaliency, kPrediction, kBinarySearch, kPassive, kRandom };

std::string policy_name(GuessPolicy p);
GuessPolicy policy_from_name(const std::string& name);
bool needs_network(GuessPolicy p);

struct PlayConfig {
  int max_moves = 20;
  SaliencyAggregate aggregate = SaliencyAggregate::kThirdLookup;
};

/// Plays one game until Correct or max_moves. Network policies open with a
/// single seeded random guess, then take the argmax of saliency or predicted
/// probability over unguessed numbers (ties go to the smaller number).
/// `features` may hold candidate_features(net, all_guesses()).
GameRecord play_policy(GuessPolicy policy, const GuesserNetwork* net, int target,
                       const PlayConfig& config, std::uint64_t seed,
                       const Matrix* features = nullptr);

struct SuccessCurve {
  std::string policy;
  int games = 0;
  std::vector<double> rate;  // index n-1: fraction solved within n moves
  std::vector<double> stderr_;
};

/// Cumulative success per move of finished games.
SuccessCurve success_curve(const std::string& policy, const std::vector<GameRecord>& games,
                           int max_moves);

/// Stochastic policies play n_games uniformly drawn targets (the same
/// targets for each policy); binary search plays every target once.
std::vector<SuccessCurve> evaluate_success_curve(const std::vector<GuessPolicy>& policies,
                                                 int n_games, const PlayConfig& config,
                                                 std::uint64_t seed,
                                                 const GuesserNetwork* net = nullptr);

/// min(2^n - 1, 256) / 256 for n = 1..max_moves.
std::vector<double> binary_search_success(int max_moves);

struct SaliencyRow {
  int move = 0;  // memory length
  int lookup = 0;  // 1..3
  int candidate = 0;
  double weight = 0.0;
};

/// Virtual-key weights of all three lookups after each move of `game`.
std::vector<SaliencyRow> saliency_trace(const GuesserNetwork& net, const GameRecord& game);

}  // namespace qdn
