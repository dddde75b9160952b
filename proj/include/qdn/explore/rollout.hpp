#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdn/explore/explorer.hpp"

namespace qdn {

struct RolloutConfig {
  int warmup_steps = 50;
  int proposals = 50;
  double step_length = 0.05;
  bool record_proposals = false;
};

struct Rollout {
  std::vector<Vec2> positions;  // start position, then one per step
  std::vector<Transition> transitions;
  // Filled when record_proposals is set: per greedy step, the proposed
  // actions and the index that was executed.
  std::vector<std::vector<Vec2>> proposals;
  std::vector<int> chosen;
};

/// Uniformly random actions for n_steps.
Rollout random_rollout(const Floorplan& plan, const AgentState& start, int n_steps,
                       double step_length, std::uint64_t seed);

/// Greedy novelty policy: warm-up random steps fill the memory, then each of
/// the n_steps proposes random unit actions and executes the one whose key
/// lies furthest from its nearest memory key. The memory starts empty and
/// its final contents are written to `memory_out` when given.
Rollout greedy_curious_rollout(const ExplorerNetwork& net, const Floorplan& plan,
                               const AgentState& start, int n_steps, const RolloutConfig& config,
                               std::uint64_t seed, EpisodicMemory* memory_out = nullptr);

struct CoverageCurve {
  std::string policy;
  std::vector<double> mean;    // per step
  std::vector<double> stderr_;  // standard error of the mean across plans
};

struct ExplorationEvalConfig {
  int plans = 15;
  int steps = 5000;
  RolloutConfig rollout;
  FloorplanConfig floorplan;
};

struct NamedPolicy {
  std::string name;
  const ExplorerNetwork* net = nullptr;  // nullptr selects the random policy
};

struct EvaluationEpisode {
  Floorplan plan;
  AgentState start;
  std::uint64_t rollout_seed = 0;
};

/// Fresh floorplans, start positions and rollout seeds for an evaluation.
std::vector<EvaluationEpisode> evaluation_episodes(const ExplorationEvalConfig& config, std::uint64_t seed);

/// Mean 16x16 coverage per step over freshly generated floorplans. Network
/// policies spend their first warm-up steps on random actions, so every
/// trajectory is `steps` long. Row k counts positions 0..k.
std::vector<CoverageCurve> evaluate_exploration(const std::vector<NamedPolicy>& policies,
                                                const ExplorationEvalConfig& config,
                                                std::uint64_t seed);

/// First step whose coverage reaches `level`, or -1.
int steps_to_reach(const std::vector<double>& curve, double level);

struct NoveltyCell {
  Vec2 position;
  double novelty = 0.0;
  Vec2 action;
};

/// Max novelty over random proposals at each interior grid-cell centre.
std::vector<NoveltyCell> novelty_field(const ExplorerNetwork& net, const EpisodicMemory& memory,
                                       const Floorplan& plan, int resolution, int proposals,
                                       std::uint64_t seed);

struct SaliencyProbe {
  Vec2 state;
  Vec2 action;
  double weight = 0.0;
};

/// Virtual (state, action) probes on a resolution x resolution grid of cell
/// centres with `directions` evenly spaced actions each.
std::vector<SaliencyProbe> probe_grid(int resolution, int directions,
                                      const Floorplan* plan = nullptr);

/// Soft-kNN weights of E_q(question) against the probes' keys.
std::vector<SaliencyProbe> question_saliency_map(const ExplorerNetwork& net,
                                                 std::vector<SaliencyProbe> probes,
                                                 const Vec2& question_state,
                                                 const Vec2& question_action);

}  // namespace qdn
