#include "qdn/explore/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qdn/attention/attention.hpp"

namespace qdn {

namespace {

void advance(const Floorplan& plan, Rollout& r, AgentState& s, const Vec2& a, double step_length,
             const ExplorerNetwork* net, EpisodicMemory* memory) {
  const StepOutcome out = step_agent(plan, s, a, step_length);
  const Transition t{s.position, a, out.collided};
  r.transitions.push_back(t);
  if (memory) memory->append(*net, t);
  s = out.state;
  r.positions.push_back(s.position);
}

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

Rollout random_rollout(const Floorplan& plan, const AgentState& start, int n_steps,
                       double step_length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Rollout r;
  r.positions.push_back(start.position);
  AgentState s = start;
  for (int i = 0; i < n_steps; ++i) advance(plan, r, s, random_direction(rng), step_length, nullptr, nullptr);
  return r;
}

Rollout greedy_curious_rollout(const ExplorerNetwork& net, const Floorplan& plan,
                               const AgentState& start, int n_steps, const RolloutConfig& config,
                               std::uint64_t seed, EpisodicMemory* memory_out) {
  if (config.proposals < 1) throw std::invalid_argument("greedy_curious_rollout: need at least one proposal");
  if (config.warmup_steps < 1) throw std::invalid_argument("greedy_curious_rollout: need at least one warm-up step");
  // Same stream layout as random_rollout: one draw per proposal, so a single
  // proposal per step reproduces the random policy exactly.
  std::mt19937_64 rng(seed);
  EpisodicMemory memory;
  Rollout r;
  r.positions.push_back(start.position);
  AgentState s = start;
  for (int i = 0; i < config.warmup_steps; ++i) {
    advance(plan, r, s, random_direction(rng), config.step_length, &net, &memory);
  }

  Matrix candidates(config.proposals, ExplorerNetwork::kStateActionWidth);
  std::vector<Vec2> actions(static_cast<std::size_t>(config.proposals));
  for (int i = 0; i < n_steps; ++i) {
    for (int p = 0; p < config.proposals; ++p) {
      actions[static_cast<std::size_t>(p)] = random_direction(rng);
      candidates.row(p) = state_action_row(s.position, actions[static_cast<std::size_t>(p)]);
    }
    std::size_t best = 0;
    if (config.proposals > 1) {
      best = argmax_first(nearest_distances(net.embed_batch(candidates), memory.keys()));
    }
    if (config.record_proposals) {
      r.proposals.push_back(actions);
      r.chosen.push_back(static_cast<int>(best));
    }
    advance(plan, r, s, actions[best], config.step_length, &net, &memory);
  }
  if (memory_out) *memory_out = std::move(memory);
  return r;
}

std::vector<EvaluationEpisode> evaluation_episodes(const ExplorationEvalConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<EvaluationEpisode> out;
  for (int k = 0; k < config.plans; ++k) {
    EvaluationEpisode e;
    e.plan = generate_floorplan(rng(), config.floorplan);
    std::mt19937_64 start_rng(rng());
    e.start = AgentState{sample_position(e.plan, start_rng)};
    e.rollout_seed = rng();
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<CoverageCurve> evaluate_exploration(const std::vector<NamedPolicy>& policies,
                                                const ExplorationEvalConfig& config,
                                                std::uint64_t seed) {
  if (config.plans < 1 || config.steps < 1) throw std::invalid_argument("evaluate_exploration: empty evaluation");
  for (const auto& p : policies) {
    if (p.net && config.steps <= config.rollout.warmup_steps) {
      throw std::invalid_argument("evaluate_exploration: steps must exceed the warm-up length");
    }
  }
  const auto n = static_cast<std::size_t>(config.steps);
  std::vector<std::vector<std::vector<int>>> per_policy(policies.size());

  for (const auto& [plan, start, rollout_seed] : evaluation_episodes(config, seed)) {
    for (std::size_t p = 0; p < policies.size(); ++p) {
      const Rollout r =
          policies[p].net
              ? greedy_curious_rollout(*policies[p].net, plan, start,
                                       config.steps - config.rollout.warmup_steps, config.rollout,
                                       rollout_seed)
              : random_rollout(plan, start, config.steps, config.rollout.step_length, rollout_seed);
      const auto positions = std::span(r.positions).first(n);
      per_policy[p].push_back(coverage_curve(positions));
    }
  }

  std::vector<CoverageCurve> out;
  const double m = static_cast<double>(config.plans);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    CoverageCurve c;
    c.policy = policies[p].name;
    c.mean.resize(n);
    c.stderr_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (const auto& curve : per_policy[p]) sum += curve[i];
      const double mean = sum / m;
      double ss = 0.0;
      for (const auto& curve : per_policy[p]) ss += (curve[i] - mean) * (curve[i] - mean);
      c.mean[i] = mean;
      c.stderr_[i] = config.plans > 1 ? std::sqrt(ss / (m - 1.0)) / std::sqrt(m) : 0.0;
    }
    out.push_back(std::move(c));
  }
  return out;
}

int steps_to_reach(const std::vector<double>& curve, double level) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i] >= level) return static_cast<int>(i);
  }
  return -1;
}

std::vector<NoveltyCell> novelty_field(const ExplorerNetwork& net, const EpisodicMemory& memory,
                                       const Floorplan& plan, int resolution, int proposals,
                                       std::uint64_t seed) {
  if (memory.empty()) throw std::invalid_argument("novelty_field: empty memory");
  if (resolution < 1 || proposals < 1) throw std::invalid_argument("novelty_field: bad grid");
  std::mt19937_64 rng(seed);
  std::vector<NoveltyCell> out;
  Matrix candidates(proposals, ExplorerNetwork::kStateActionWidth);
  std::vector<Vec2> actions(static_cast<std::size_t>(proposals));
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      const Vec2 centre((ix + 0.5) / resolution, (iy + 0.5) / resolution);
      if (!plan.contains(centre)) continue;
      for (int p = 0; p < proposals; ++p) {
        actions[static_cast<std::size_t>(p)] = random_direction(rng);
        candidates.row(p) = state_action_row(centre, actions[static_cast<std::size_t>(p)]);
      }
      const auto d = nearest_distances(net.embed_batch(candidates), memory.keys());
      const std::size_t best = argmax_first(d);
      out.push_back({centre, d[best], actions[best]});
    }
  }
  return out;
}

std::vector<SaliencyProbe> probe_grid(int resolution, int directions, const Floorplan* plan) {
  if (resolution < 1 || directions < 1) throw std::invalid_argument("probe_grid: bad grid");
  std::vector<SaliencyProbe> out;
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      const Vec2 centre((ix + 0.5) / resolution, (iy + 0.5) / resolution);
      if (plan && !plan->contains(centre)) continue;
      for (int k = 0; k < directions; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / directions;
        out.push_back({centre, Vec2(std::cos(angle), std::sin(angle)), 0.0});
      }
    }
  }
  return out;
}

std::vector<SaliencyProbe> question_saliency_map(const ExplorerNetwork& net,
                                                 std::vector<SaliencyProbe> probes,
                                                 const Vec2& question_state,
                                                 const Vec2& question_action) {
  if (probes.empty()) throw std::invalid_argument("question_saliency_map: empty probe set");
  Matrix rows(static_cast<Index>(probes.size()), ExplorerNetwork::kStateActionWidth);
  for (Index i = 0; i < rows.rows(); ++i) {
    const auto& p = probes[static_cast<std::size_t>(i)];
    rows.row(i) = state_action_row(p.state, p.action);
  }
  const Matrix keys = net.embed_rows(rows);
  const Row query = net.embed(question_state, question_action);
  const Row w = soft_knn_weights<double>(keys, query, net.architecture().alpha);
  for (Index i = 0; i < w.cols(); ++i) probes[static_cast<std::size_t>(i)].weight = w(i);
  return probes;
}

}  // namespace qdn
