#include "qdn/guess/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace qdn {

namespace {

int masked_argmax(const Row& scores, const std::vector<bool>& guessed) {
  int best = -1;
  for (int i = 0; i < kGuessRange; ++i) {
    if (guessed[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || scores(i) > scores(best)) best = i;
  }
  if (best < 0) throw std::logic_error("every number has been guessed");
  return best + 1;
}

}  // namespace

std::string policy_name(GuessPolicy p) {
  switch (p) {
    case GuessPolicy::kSaliency: return "saliency";
    case GuessPolicy::kPrediction: return "prediction";
    case GuessPolicy::kBinarySearch: return "binary_search";
    case GuessPolicy::kPassive: return "passive";
    case GuessPolicy::kRandom: return "random";
  }
  throw std::invalid_argument("bad policy");
}

GuessPolicy policy_from_name(const std::string& name) {
  for (auto p : {GuessPolicy::kSaliency, GuessPolicy::kPrediction, GuessPolicy::kBinarySearch,
                 GuessPolicy::kPassive, GuessPolicy::kRandom}) {
    if (policy_name(p) == name) return p;
  }
  throw std::invalid_argument("unknown policy '" + name + "'");
}

bool needs_network(GuessPolicy p) { return p == GuessPolicy::kSaliency || p == GuessPolicy::kPrediction; }

GameRecord play_policy(GuessPolicy policy, const GuesserNetwork* net, int target,
                       const PlayConfig& config, std::uint64_t seed, const Matrix* features) {
  if (needs_network(policy) && !net) {
    throw std::invalid_argument(policy_name(policy) + " policy needs a network");
  }
  if (config.max_moves < 1) throw std::invalid_argument("max_moves must be positive");
  std::mt19937_64 rng(seed);
  GameRecord game;
  game.target = target;
  game_oracle(target, target);  // range check
  ConsistentSet set;
  std::vector<bool> guessed(kGuessRange, false);
  std::vector<int> shuffled;
  if (policy == GuessPolicy::kRandom) {
    shuffled = all_guesses();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
  }
  Matrix own_features;
  if (policy == GuessPolicy::kSaliency && !features) {
    own_features = candidate_features(*net, all_guesses());
    features = &own_features;
  }
  const std::vector<int> candidates = policy == GuessPolicy::kSaliency ? all_guesses() : std::vector<int>{};

  for (int move = 0; move < config.max_moves && !game.solved(); ++move) {
    int guess = 0;
    switch (policy) {
      case GuessPolicy::kBinarySearch:
        guess = (set.lo + set.hi) / 2;
        break;
      case GuessPolicy::kPassive:
        guess = std::uniform_int_distribution<int>(set.lo, set.hi)(rng);
        break;
      case GuessPolicy::kRandom:
        guess = shuffled[static_cast<std::size_t>(move)];
        break;
      case GuessPolicy::kSaliency:
      case GuessPolicy::kPrediction:
        if (move == 0) {
          guess = std::uniform_int_distribution<int>(1, kGuessRange)(rng);
        } else if (policy == GuessPolicy::kSaliency) {
          const auto profile = saliency_over_candidates(*net, game, candidates, features);
          guess = masked_argmax(profile.aggregate(config.aggregate), guessed);
        } else {
          guess = masked_argmax(predict_target_distribution(*net, game), guessed);
        }
        break;
    }
    game.push(guess);
    guessed[static_cast<std::size_t>(guess - 1)] = true;
    set.update(guess, game.outcomes.back());
  }
  return game;
}

SuccessCurve success_curve(const std::string& policy, const std::vector<GameRecord>& games,
                           int max_moves) {
  SuccessCurve c;
  c.policy = policy;
  c.games = static_cast<int>(games.size());
  std::vector<int> solved_at(static_cast<std::size_t>(max_moves) + 1, 0);
  for (const auto& g : games) {
    if (g.solved() && static_cast<int>(g.size()) <= max_moves) ++solved_at[g.size()];
  }
  const double n = static_cast<double>(games.size());
  int cumulative = 0;
  for (int m = 1; m <= max_moves; ++m) {
    cumulative += solved_at[static_cast<std::size_t>(m)];
    const double p = n > 0 ? cumulative / n : 0.0;
    c.rate.push_back(p);
    c.stderr_.push_back(n > 0 ? std::sqrt(p * (1.0 - p) / n) : 0.0);
  }
  return c;
}

std::vector<SuccessCurve> evaluate_success_curve(const std::vector<GuessPolicy>& policies,
                                                 int n_games, const PlayConfig& config,
                                                 std::uint64_t seed, const GuesserNetwork* net) {
  if (n_games < 1) throw std::invalid_argument("evaluate_success_curve: need at least one game");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(1, kGuessRange);
  std::vector<std::pair<int, std::uint64_t>> draws(static_cast<std::size_t>(n_games));
  for (auto& d : draws) d = {pick(rng), rng()};

  Matrix features;
  if (net) features = candidate_features(*net, all_guesses());
  std::vector<SuccessCurve> out;
  for (auto policy : policies) {
    std::vector<GameRecord> games;
    if (policy == GuessPolicy::kBinarySearch) {
      for (int t = 1; t <= kGuessRange; ++t) games.push_back(play_policy(policy, net, t, config, 0));
    } else {
      for (const auto& [target, game_seed] : draws) {
        games.push_back(play_policy(policy, net, target, config, game_seed, net ? &features : nullptr));
      }
    }
    out.push_back(success_curve(policy_name(policy), games, config.max_moves));
  }
  return out;
}

std::vector<double> binary_search_success(int max_moves) {
  std::vector<double> out;
  for (int n = 1; n <= max_moves; ++n) {
    const double solved = std::min(std::ldexp(1.0, n) - 1.0, static_cast<double>(kGuessRange));
    out.push_back(solved / kGuessRange);
  }
  return out;
}

std::vector<SaliencyRow> saliency_trace(const GuesserNetwork& net, const GameRecord& game) {
  const auto candidates = all_guesses();
  const Matrix features = candidate_features(net, candidates);
  std::vector<SaliencyRow> rows;
  for (std::size_t n = 1; n <= game.size(); ++n) {
    const auto profile = saliency_over_candidates(net, game.prefix(n), candidates, &features);
    for (int l = 0; l < kQueryLookups; ++l) {
      const Row& w = profile.virtual_weights[static_cast<std::size_t>(l)];
      for (Index c = 0; c < w.cols(); ++c) {
        rows.push_back({static_cast<int>(n), l + 1, candidates[static_cast<std::size_t>(c)], w(c)});
      }
    }
  }
  return rows;
}

}  // namespace qdn
