#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "qdn/experiment/config.hpp"
#include "qdn/explore/rollout.hpp"
#include "qdn/explore/training.hpp"
#include "qdn/guess/policies.hpp"
#include "qdn/guess/training.hpp"

namespace qdn {

// Settings read from a resolved run configuration.
FloorplanConfig floorplan_settings(const RunConfig& cfg);
CorpusConfig corpus_settings(const RunConfig& cfg);
ExplorerArchitecture explorer_architecture(const RunConfig& cfg);
ExplorerTrainingConfig explorer_training_settings(const RunConfig& cfg);
ExplorationEvalConfig exploration_settings(const RunConfig& cfg);
GuesserArchitecture guesser_architecture(const RunConfig& cfg);
GuesserTrainingConfig guesser_training_settings(const RunConfig& cfg);
PlayConfig play_settings(const RunConfig& cfg);
std::vector<GuessPolicy> guess_policies(const RunConfig& cfg);

// CSV artifacts.
void write_floorplans(const std::filesystem::path& path, const std::vector<EvaluationEpisode>& episodes);
void write_trajectories(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& corpus);
void write_exploration_curve(const std::filesystem::path& path, const std::vector<CoverageCurve>& curves);
void write_novelty_field(const std::filesystem::path& path, const std::vector<NoveltyCell>& cells);
void write_saliency_map(const std::filesystem::path& path, const std::vector<SaliencyProbe>& probes);
void write_explorer_loss(const std::filesystem::path& path, const ExplorerLossHistory& history);
void write_success_curve(const std::filesystem::path& path, const std::vector<SuccessCurve>& curves);
void write_saliency_profile(const std::filesystem::path& path, const std::vector<SaliencyRow>& rows);
void write_guesser_loss(const std::filesystem::path& path, const GuesserLossHistory& history);

/// Quick gradient, attention, physics and game checks. Prints one line per
/// check and returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace qdn
