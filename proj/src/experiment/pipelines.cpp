#include "qdn/experiment/pipelines.hpp"

#include <sstream>

#include "qdn/experiment/csv.hpp"

namespace qdn {

namespace {

int as_int(const RunConfig& cfg, const std::string& key) { return static_cast<int>(cfg.get_int(key)); }

}  // namespace

FloorplanConfig floorplan_settings(const RunConfig& cfg) {
  FloorplanConfig f;
  f.min_rects = as_int(cfg, "floorplan.min_rects");
  f.max_rects = as_int(cfg, "floorplan.max_rects");
  f.min_side = cfg.get_real("floorplan.min_side");
  f.max_side = cfg.get_real("floorplan.max_side");
  return f;
}

CorpusConfig corpus_settings(const RunConfig& cfg) {
  CorpusConfig c;
  c.trajectories = as_int(cfg, "explorer.trajectories");
  c.steps = as_int(cfg, "explorer.trajectory_steps");
  c.step_length = cfg.get_real("explorer.step_length");
  c.floorplan = floorplan_settings(cfg);
  return c;
}

ExplorerArchitecture explorer_architecture(const RunConfig& cfg) {
  ExplorerArchitecture a;
  a.hidden_layers = as_int(cfg, "explorer.hidden_layers");
  a.hidden_width = cfg.get_int("explorer.hidden_width");
  a.key_dim = cfg.get_int("explorer.key_dim");
  a.value_dim = cfg.get_int("explorer.value_dim");
  a.alpha = cfg.get_real("explorer.alpha");
  return a;
}

ExplorerTrainingConfig explorer_training_settings(const RunConfig& cfg) {
  ExplorerTrainingConfig t;
  t.episodes_per_batch = as_int(cfg, "explorer.episodes_per_batch");
  t.memory_steps = as_int(cfg, "explorer.memory_steps");
  t.query_steps = as_int(cfg, "explorer.query_steps");
  t.batches = as_int(cfg, "explorer.batches");
  t.learning_rate = cfg.get_real("explorer.learning_rate");
  t.lr_decay = cfg.get_real("explorer.lr_decay");
  t.eval_every = as_int(cfg, "explorer.eval_every");
  t.patience = as_int(cfg, "explorer.patience");
  t.min_learning_rate = cfg.get_real("explorer.min_learning_rate");
  t.holdout_fraction = cfg.get_real("explorer.holdout_fraction");
  t.holdout_episodes = as_int(cfg, "explorer.holdout_episodes");
  return t;
}

ExplorationEvalConfig exploration_settings(const RunConfig& cfg) {
  ExplorationEvalConfig e;
  e.plans = as_int(cfg, "explorer.eval_plans");
  e.steps = as_int(cfg, "explorer.eval_steps");
  e.rollout.warmup_steps = as_int(cfg, "explorer.warmup_steps");
  e.rollout.proposals = as_int(cfg, "explorer.proposals");
  e.rollout.step_length = cfg.get_real("explorer.step_length");
  e.floorplan = floorplan_settings(cfg);
  return e;
}

GuesserArchitecture guesser_architecture(const RunConfig& cfg) {
  GuesserArchitecture a;
  a.width = cfg.get_int("guesser.width");
  a.state_layers = as_int(cfg, "guesser.state_layers");
  a.head_layers = as_int(cfg, "guesser.head_layers");
  a.attention_dim = cfg.get_int("guesser.attention_dim");
  return a;
}

GuesserTrainingConfig guesser_training_settings(const RunConfig& cfg) {
  GuesserTrainingConfig t;
  t.epochs = as_int(cfg, "guesser.epochs");
  t.batch_size = as_int(cfg, "guesser.batch_size");
  t.learning_rate = cfg.get_real("guesser.learning_rate");
  t.game_length = as_int(cfg, "guesser.game_length");
  return t;
}

PlayConfig play_settings(const RunConfig& cfg) {
  PlayConfig p;
  p.max_moves = as_int(cfg, "guesser.max_moves");
  p.aggregate = cfg.get_string("guesser.saliency_aggregate") == "mean" ? SaliencyAggregate::kMeanOfThree
                                                                       : SaliencyAggregate::kThirdLookup;
  return p;
}

std::vector<GuessPolicy> guess_policies(const RunConfig& cfg) {
  std::vector<GuessPolicy> out;
  std::istringstream items(cfg.get_string("guesser.policies"));
  std::string item;
  while (std::getline(items, item, ',')) out.push_back(policy_from_name(item));
  return out;
}

void write_floorplans(const std::filesystem::path& path, const std::vector<EvaluationEpisode>& episodes) {
  CsvWriter w(path, {"plan", "rect", "min_x", "min_y", "max_x", "max_y", "start_x", "start_y"});
  for (std::size_t p = 0; p < episodes.size(); ++p) {
    const auto& e = episodes[p];
    for (std::size_t r = 0; r < e.plan.rects().size(); ++r) {
      const Rect& rect = e.plan.rects()[r];
      w.row(p, r, rect.min.x(), rect.min.y(), rect.max.x(), rect.max.y(), e.start.position.x(),
            e.start.position.y());
    }
  }
  w.close();
}

void write_trajectories(const std::filesystem::path& path, const std::vector<TrajectoryRecord>& corpus) {
  CsvWriter w(path, {"trajectory", "step", "x", "y", "ax", "ay", "collided"});
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t k = 0; k < corpus[i].steps.size(); ++k) {
      const auto& t = corpus[i].steps[k];
      w.row(i, k, t.state.x(), t.state.y(), t.action.x(), t.action.y(), t.collided);
    }
  }
  w.close();
}

void write_exploration_curve(const std::filesystem::path& path, const std::vector<CoverageCurve>& curves) {
  CsvWriter w(path, {"policy", "step", "mean_cells", "stderr"});
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.mean.size(); ++i) w.row(c.policy, i, c.mean[i], c.stderr_[i]);
  }
  w.close();
}

void write_novelty_field(const std::filesystem::path& path, const std::vector<NoveltyCell>& cells) {
  CsvWriter w(path, {"x", "y", "novelty", "ax", "ay"});
  for (const auto& c : cells) w.row(c.position.x(), c.position.y(), c.novelty, c.action.x(), c.action.y());
  w.close();
}

void write_saliency_map(const std::filesystem::path& path, const std::vector<SaliencyProbe>& probes) {
  CsvWriter w(path, {"x", "y", "ax", "ay", "weight"});
  for (const auto& p : probes) w.row(p.state.x(), p.state.y(), p.action.x(), p.action.y(), p.weight);
  w.close();
}

void write_explorer_loss(const std::filesystem::path& path, const ExplorerLossHistory& history) {
  CsvWriter w(path, {"batch", "split", "loss", "learning_rate"});
  for (std::size_t i = 0; i < history.heldout.size(); ++i) {
    w.row(history.eval_batches[i], "heldout", history.heldout[i], history.learning_rates[i]);
  }
  for (std::size_t i = 0; i < history.train.size(); ++i) {
    w.row(i + 1, "train", history.train[i], std::string());
  }
  w.close();
}

void write_success_curve(const std::filesystem::path& path, const std::vector<SuccessCurve>& curves) {
  CsvWriter w(path, {"policy", "move", "success_rate", "stderr"});
  for (const auto& c : curves) {
    for (std::size_t m = 0; m < c.rate.size(); ++m) w.row(c.policy, m + 1, c.rate[m], c.stderr_[m]);
  }
  w.close();
}

void write_saliency_profile(const std::filesystem::path& path, const std::vector<SaliencyRow>& rows) {
  CsvWriter w(path, {"move", "lookup_index", "candidate", "weight"});
  for (const auto& r : rows) w.row(r.move, r.lookup, r.candidate, r.weight);
  w.close();
}

void write_guesser_loss(const std::filesystem::path& path, const GuesserLossHistory& history) {
  CsvWriter w(path, {"epoch", "split", "loss"});
  w.row(0, "train", history.initial_loss);
  for (std::size_t i = 0; i < history.epoch_loss.size(); ++i) w.row(i + 1, "train", history.epoch_loss[i]);
  w.close();
}

}  // namespace qdn
