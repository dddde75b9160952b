#include <cmath>
#include <cstdio>
#include <random>

#include "qdn/attention/attention.hpp"
#include "qdn/autodiff/gradient_check.hpp"
#include "qdn/experiment/pipelines.hpp"
#include "qdn/floorplan/oracle.hpp"

namespace qdn {

namespace {

std::string format_error(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Matrix uniform_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

bool report(std::ostream& out, const std::string& name, bool ok, const std::string& detail) {
  out << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
  return ok;
}

bool explorer_gradients(std::ostream& out) {
  ExplorerArchitecture arch;
  arch.hidden_layers = 2;
  arch.hidden_width = 16;
  arch.value_dim = 16;
  ExplorerNetwork net(arch, 77);
  const Floorplan plan = generate_floorplan(12);
  std::mt19937_64 rng(12);
  const auto ts = random_trajectory(plan, AgentState{sample_position(plan, rng)}, 6, 13, 0.05);
  const auto memory = std::span(ts).first(5);
  const auto query = std::span(ts).subspan(5, 1);
  const auto r = gradient_check<double>(net.parameters(), [&](Graph& g) {
    return net.episode_loss(g, state_action_rows(memory), transition_rows(memory), state_action_rows(query),
                            collision_labels(query));
  });
  return report(out, "explorer gradients", r.max_relative_error < 1e-4,
                "max relative error " + format_error(r.max_relative_error) + " at " + r.worst_parameter);
}

bool guesser_gradients(std::ostream& out) {
  GuesserArchitecture arch;
  arch.width = 16;
  GuesserNetwork net(arch, 12);
  std::mt19937_64 rng(3);
  auto& w = net.parameters().entry("guesser.head.l" + std::to_string(arch.head_layers) + ".weight").value;
  w = uniform_matrix(w.rows(), w.cols(), rng, -0.3, 0.3);
  net.parameters().entry("guesser.query.initial.weight").value *= 4.0;
  GameRecord game;
  game.target = 77;
  for (int g : {100, 50, 60, 77}) game.push(g);
  const auto r = gradient_check<double>(net.parameters(), [&](Graph& g) { return net.game_loss(g, game); });
  return report(out, "guesser gradients", r.max_relative_error < 1e-4,
                "max relative error " + format_error(r.max_relative_error) + " at " + r.worst_parameter);
}

bool attention_checks(std::ostream& out) {
  std::mt19937_64 rng(101);
  double worst_sum = 0.0;
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix keys = uniform_matrix(20, 4, rng);
    const Row q = uniform_matrix(1, 4, rng).row(0);
    worst_sum = std::max(worst_sum, std::abs(dot_attention_weights(keys, q).sum() - 1.0));
    worst_sum = std::max(worst_sum, std::abs(soft_knn_weights(keys, q, 20.0).sum() - 1.0));
    Index nearest = 0, heaviest = 0;
    (keys.rowwise() - q).rowwise().norm().minCoeff(&nearest);
    soft_knn_weights(keys, q, 1e4).maxCoeff(&heaviest);
    mismatches += nearest != heaviest;
  }
  const bool ok = worst_sum < 1e-9 && mismatches == 0;
  return report(out, "attention", ok,
                "weight sums within " + format_error(worst_sum) + ", " + std::to_string(mismatches) +
                    " sharp soft-kNN argmax mismatches");
}

bool physics_checks(std::ostream& out) {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> length(0.02, 0.3);
  double worst = 0.0;
  int flags = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Floorplan plan = generate_floorplan(1000 + trial % 20);
    const Vec2 start = sample_position(plan, rng);
    const Vec2 dir = random_direction(rng);
    const double step = length(rng);
    const auto got = step_agent(plan, {start}, dir, step);
    const auto want = reference::oracle_step(plan, start, dir, step);
    worst = std::max(worst, (got.state.position - want.position).norm());
    flags += got.collided != want.collided;
  }
  return report(out, "physics", worst < 1e-4 && flags == 0,
                "max position error " + format_error(worst) + ", " + std::to_string(flags) + " flag mismatches");
}

bool game_checks(std::ostream& out) {
  int unsolved = 0;
  for (int t = 1; t <= kGuessRange; ++t) {
    unsolved += !play_policy(GuessPolicy::kBinarySearch, nullptr, t, {}, 0).solved();
  }
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> target(1, kGuessRange);
  int violations = 0;
  for (int game = 0; game < 1000; ++game) {
    const GameRecord r = play_policy(GuessPolicy::kPassive, nullptr, target(rng), {}, rng());
    ConsistentSet set;
    for (std::size_t i = 0; i < r.size(); ++i) {
      violations += !set.contains(r.guesses[i]);
      set.update(r.guesses[i], r.outcomes[i]);
    }
  }
  return report(out, "guessing game", unsolved == 0 && violations == 0,
                std::to_string(unsolved) + " binary-search misses, " + std::to_string(violations) +
                    " passive guesses outside the consistent set");
}

}  // namespace

bool run_selftest(std::ostream& out) {
  bool ok = true;
  ok = attention_checks(out) && ok;
  ok = physics_checks(out) && ok;
  ok = game_checks(out) && ok;
  ok = explorer_gradients(out) && ok;
  ok = guesser_gradients(out) && ok;
  out << (ok ? "selftest passed" : "selftest FAILED") << "\n";
  return ok;
}

}  // namespace qdn
