#include "qdn/experiment/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "qdn/experiment/checkpoint.hpp"
#include "qdn/experiment/pipelines.hpp"
#include "qdn/experiment/plot.hpp"
#include "qdn/experiment/seeds.hpp"

namespace qdn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  bool desk_scale = false;
};

struct Context {
  RunConfig cfg;
  fs::path out;
  std::ostream& log;

  std::uint64_t seed(std::string_view stream) const { return derive_seed(cfg.seed(), stream); }
  fs::path file(const std::string& name) const { return out / name; }
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

ExplorerNetwork load_explorer(const Context& c) {
  ExplorerNetwork net(explorer_architecture(c.cfg), c.seed("explorer.init"));
  load_checkpoint(c.file("explorer.ckpt"), net.parameters());
  return net;
}

GuesserNetwork load_guesser(const Context& c) {
  GuesserNetwork net(guesser_architecture(c.cfg), c.seed("guesser.init"));
  load_checkpoint(c.file("guesser.ckpt"), net.parameters());
  return net;
}

void gen_floorplans(const Context& c) {
  ExplorationEvalConfig e = exploration_settings(c.cfg);
  e.plans = static_cast<int>(c.cfg.get_int("floorplan.count"));
  write_floorplans(c.file("floorplans.csv"), evaluation_episodes(e, c.seed("exploration.eval")));
}

void gen_trajectories(const Context& c) {
  write_trajectories(c.file("trajectories.csv"), generate_corpus(corpus_settings(c.cfg), c.seed("explorer.corpus")));
}

void train_explorer_cmd(const Context& c) {
  const auto corpus = generate_corpus(corpus_settings(c.cfg), c.seed("explorer.corpus"));
  ExplorerNetwork net(explorer_architecture(c.cfg), c.seed("explorer.init"));
  const auto history = train_explorer(net, corpus, explorer_training_settings(c.cfg), c.seed("explorer.training"),
                                      [&](int batch, double train, double heldout) {
                                        c.log << "batch " << batch << " train " << train << " heldout " << heldout
                                              << std::endl;
                                      });
  save_checkpoint(c.file("explorer.ckpt"), net.parameters());
  write_explorer_loss(c.file("explorer_loss.csv"), history);
  write_json(c.file("explorer_training.json"),
             {{"batches", history.train.size()},
              {"final_heldout_loss", history.heldout.empty() ? 0.0 : history.heldout.back()},
              {"base_rate_entropy", history.base_rate_entropy},
              {"collision_rate", history.collision_rate}});
}

void eval_exploration(const Context& c) {
  const ExplorerNetwork trained = load_explorer(c);
  const ExplorerNetwork untrained(explorer_architecture(c.cfg), c.seed("explorer.init"));
  const auto curves = evaluate_exploration({{"random", nullptr}, {"untrained", &untrained}, {"trained", &trained}},
                                           exploration_settings(c.cfg), c.seed("exploration.eval"));
  write_exploration_curve(c.file("exploration_curve.csv"), curves);
  const double target = curves[0].mean.back();
  json summary = {{"random_final_coverage", target}};
  for (std::size_t p = 1; p < curves.size(); ++p) {
    summary[curves[p].policy + "_final_coverage"] = curves[p].mean.back();
    summary[curves[p].policy + "_steps_to_match_random"] = steps_to_reach(curves[p].mean, target);
  }
  write_json(c.file("exploration_summary.json"), summary);
}

void render_fields(const Context& c) {
  const ExplorerNetwork net = load_explorer(c);
  ExplorationEvalConfig e = exploration_settings(c.cfg);
  e.plans = 1;
  const auto episode = evaluation_episodes(e, c.seed("exploration.eval")).front();
  std::mt19937_64 rng(c.seed("fields"));
  EpisodicMemory memory;
  const int steps = static_cast<int>(c.cfg.get_int("explorer.field_steps"));
  const Rollout r = greedy_curious_rollout(net, episode.plan, episode.start, steps, e.rollout, rng(), &memory);
  const auto cells = novelty_field(net, memory, episode.plan,
                                   static_cast<int>(c.cfg.get_int("explorer.field_resolution")),
                                   e.rollout.proposals, rng());
  write_novelty_field(c.file("novelty_field.csv"), cells);
  // The question is the last move the policy made.
  const Transition& q = r.transitions.back();
  const auto probes = probe_grid(static_cast<int>(c.cfg.get_int("explorer.saliency_resolution")),
                                 static_cast<int>(c.cfg.get_int("explorer.saliency_directions")), &episode.plan);
  write_saliency_map(c.file("saliency_map.csv"), question_saliency_map(net, probes, q.state, q.action));
}

void gen_games(const Context& c) {
  write_games(c.file("games.txt"),
              generate_games(static_cast<int>(c.cfg.get_int("guesser.games")),
                             static_cast<int>(c.cfg.get_int("guesser.game_length")), c.seed("guesser.corpus")));
}

void train_guesser_cmd(const Context& c, const std::string& games_file) {
  const auto corpus = games_file.empty()
                          ? generate_games(static_cast<int>(c.cfg.get_int("guesser.games")),
                                           static_cast<int>(c.cfg.get_int("guesser.game_length")),
                                           c.seed("guesser.corpus"))
                          : read_games(games_file);
  GuesserNetwork net(guesser_architecture(c.cfg), c.seed("guesser.init"));
  const auto history = train_guesser(net, corpus, guesser_training_settings(c.cfg), c.seed("guesser.training"),
                                     [&](int epoch, double loss) {
                                       c.log << "epoch " << epoch << " loss " << loss << std::endl;
                                     });
  save_checkpoint(c.file("guesser.ckpt"), net.parameters());
  write_guesser_loss(c.file("guesser_loss.csv"), history);
  const auto heldout = generate_games(1000, static_cast<int>(c.cfg.get_int("guesser.game_length")),
                                      c.seed("guesser.heldout"));
  write_json(c.file("guesser_training.json"),
             {{"initial_loss", history.initial_loss},
              {"final_loss", history.epoch_loss.empty() ? history.initial_loss : history.epoch_loss.back()},
              {"heldout_loss", guesser_loss(net, heldout, nullptr)},
              {"heldout_accuracy", prediction_accuracy(net, heldout)},
              {"heldout_excluded_probability", excluded_probability(net, heldout, 10)}});
}

void eval_guesser(const Context& c) {
  const GuesserNetwork net = load_guesser(c);
  const PlayConfig play = play_settings(c.cfg);
  const auto curves = evaluate_success_curve(guess_policies(c.cfg), static_cast<int>(c.cfg.get_int("guesser.eval_games")),
                                             play, c.seed("guesser.eval"), &net);
  write_success_curve(c.file("success_curve.csv"), curves);

  std::mt19937_64 rng(c.seed("guesser.trace"));
  const int target = std::uniform_int_distribution<int>(1, kGuessRange)(rng);
  const GameRecord game = play_policy(GuessPolicy::kSaliency, &net, target, play, rng());
  const auto moves = std::min<std::size_t>(game.size(), static_cast<std::size_t>(c.cfg.get_int("guesser.trace_moves")));
  write_saliency_profile(c.file("saliency_profile.csv"), saliency_trace(net, game.prefix(moves)));

  json summary = json::object();
  for (const auto& curve : curves) summary[curve.policy] = curve.rate;
  summary["trace_target"] = target;
  summary["trace_guesses"] = game.prefix(moves).guesses;
  write_json(c.file("guesser_summary.json"), summary);
}

void plot_cmd(const Context& c, const std::vector<std::string>& files) {
  std::vector<fs::path> csvs(files.begin(), files.end());
  if (csvs.empty()) {
    for (const auto& kind : plot_kinds()) {
      if (fs::exists(c.file(kind + ".csv"))) csvs.push_back(c.file(kind + ".csv"));
    }
    if (csvs.empty()) throw std::runtime_error("no plottable CSV files in " + c.out.string());
  }
  for (const auto& csv : csvs) {
    fs::path svg = csv;
    svg.replace_extension(".svg");
    emit_plot(csv, svg);
    c.log << "wrote " << svg.string() << std::endl;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Query-driven memory networks: floorplan exploration and number guessing", "qdn"};
  app.fallthrough();
  app.require_subcommand(1);
  CommonFlags flags;
  app.add_option("--config", flags.config, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "root seed (overrides the config file)");
  app.add_option("--out", flags.out, "output directory")->capture_default_str();
  app.add_flag("--desk-scale", flags.desk_scale, "use the reduced presets");

  std::string games_file;
  std::vector<std::string> plot_files;
  std::map<std::string, std::function<void(const Context&)>> actions;
  auto sub = [&](const std::string& name, const std::string& help, std::function<void(const Context&)> action) {
    actions[name] = std::move(action);
    return app.add_subcommand(name, help);
  };
  sub("gen-floorplans", "write the evaluation floorplans", gen_floorplans);
  sub("gen-trajectories", "write the random-action training corpus", gen_trajectories);
  sub("train-explorer", "train the collision-prediction network", train_explorer_cmd);
  sub("eval-exploration", "coverage curves for random, untrained and trained policies", eval_exploration);
  sub("render-fields", "novelty field and question saliency for one floorplan", render_fields);
  sub("gen-games", "write the random-guess game corpus", gen_games);
  sub("train-guesser", "train the guessing network", [&](const Context& c) { train_guesser_cmd(c, games_file); })
      ->add_option("--games", games_file, "read the training corpus from this file instead of regenerating it")
      ->check(CLI::ExistingFile);
  sub("eval-guesser", "success curves and a saliency trace", eval_guesser);
  sub("plot", "render CSV outputs as SVG", [&](const Context& c) { plot_cmd(c, plot_files); })
      ->add_option("files", plot_files, "CSV files (default: every known CSV in --out)");
  sub("selftest", "gradient checks and oracles", {});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  if (name == "selftest") return run_selftest(out) ? kExitOk : kExitFailure;

  RunConfig cfg;
  try {
    const auto file = flags.config.empty() ? std::nullopt : std::optional<fs::path>(flags.config);
    cfg = RunConfig::load(file, ConfigOverrides{flags.seed, flags.desk_scale});
  } catch (const ConfigError& e) {
    err << "qdn: " << e.what() << "\n";
    return kExitUsage;
  }
  const Context context{std::move(cfg), fs::path(flags.out), err};

  try {
    fs::create_directories(context.out);
    context.cfg.write_resolved(context.file(name + ".resolved.cfg"));
    actions.at(name)(context);
  } catch (const std::exception& e) {
    err << "qdn " << name << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace qdn
