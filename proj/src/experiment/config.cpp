#include "qdn/experiment/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qdn {

namespace {

using T = ConfigType;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const ConfigKey* find_key(const std::string& name) {
  const auto& schema = config_schema();
  const auto it = std::find_if(schema.begin(), schema.end(), [&](const ConfigKey& k) { return k.name == name; });
  return it == schema.end() ? nullptr : &*it;
}

std::optional<std::int64_t> parse_int(const std::string& v) {
  std::int64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<double> parse_real(const std::string& v) {
  double out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) return std::nullopt;
  return out;
}

std::optional<bool> parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  return std::nullopt;
}

void check_value(const ConfigKey& key, const std::string& value) {
  bool ok = true;
  std::string expected;
  switch (key.type) {
    case T::kInt:
      ok = parse_int(value).has_value();
      expected = "an integer";
      break;
    case T::kReal:
      ok = parse_real(value).has_value();
      expected = "a number";
      break;
    case T::kBool:
      ok = parse_bool(value).has_value();
      expected = "true or false";
      break;
    case T::kString:
      if (!key.choices.empty()) {
        std::istringstream items(value);
        std::string item;
        bool any = false;
        while (std::getline(items, item, ',')) {
          any = true;
          if (std::find(key.choices.begin(), key.choices.end(), item) == key.choices.end()) ok = false;
        }
        ok = ok && any && (key.list || value.find(',') == std::string::npos);
        expected = "one of";
        for (const auto& c : key.choices) expected += " " + c;
      }
      break;
  }
  if (!ok) throw ConfigError("config key '" + key.name + "': '" + value + "' is not " + expected);
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"experiment", T::kString, "qdn", "", "run label", {}},
      {"seed", T::kInt, "0", "", "root seed; every stream is derived from it", {}},
      {"desk_scale", T::kBool, "false", "", "use the reduced presets", {}},

      {"floorplan.count", T::kInt, "15", "", "floorplans written by gen-floorplans", {}},
      {"floorplan.min_rects", T::kInt, "3", "", "", {}},
      {"floorplan.max_rects", T::kInt, "8", "", "", {}},
      {"floorplan.min_side", T::kReal, "0.2", "", "", {}},
      {"floorplan.max_side", T::kReal, "0.7", "", "", {}},

      {"explorer.trajectories", T::kInt, "1000", "100", "random-action training trajectories", {}},
      {"explorer.trajectory_steps", T::kInt, "1000", "", "", {}},
      {"explorer.step_length", T::kReal, "0.05", "", "", {}},
      {"explorer.hidden_layers", T::kInt, "4", "", "", {}},
      {"explorer.hidden_width", T::kInt, "256", "", "", {}},
      {"explorer.key_dim", T::kInt, "24", "", "", {}},
      {"explorer.value_dim", T::kInt, "128", "", "", {}},
      {"explorer.alpha", T::kReal, "20", "", "soft-kNN sharpness", {}},
      {"explorer.episodes_per_batch", T::kInt, "50", "", "", {}},
      {"explorer.memory_steps", T::kInt, "300", "", "", {}},
      {"explorer.query_steps", T::kInt, "100", "", "", {}},
      {"explorer.batches", T::kInt, "15000", "1500", "", {}},
      {"explorer.learning_rate", T::kReal, "0.0004", "", "", {}},
      {"explorer.lr_decay", T::kReal, "0.9", "", "", {}},
      {"explorer.eval_every", T::kInt, "100", "", "batches between held-out evaluations", {}},
      {"explorer.patience", T::kInt, "10", "", "evaluations without improvement before decay", {}},
      {"explorer.min_learning_rate", T::kReal, "0.000001", "", "", {}},
      {"explorer.holdout_fraction", T::kReal, "0.05", "", "", {}},
      {"explorer.holdout_episodes", T::kInt, "50", "", "", {}},
      {"explorer.eval_plans", T::kInt, "15", "", "", {}},
      {"explorer.eval_steps", T::kInt, "5000", "2500", "", {}},
      {"explorer.warmup_steps", T::kInt, "50", "", "", {}},
      {"explorer.proposals", T::kInt, "50", "", "", {}},
      {"explorer.field_resolution", T::kInt, "32", "", "novelty-field grid size", {}},
      {"explorer.field_steps", T::kInt, "300", "", "greedy steps before the field is rendered", {}},
      {"explorer.saliency_resolution", T::kInt, "16", "", "", {}},
      {"explorer.saliency_directions", T::kInt, "8", "", "", {}},

      {"guesser.games", T::kInt, "200000", "20000", "training games", {}},
      {"guesser.game_length", T::kInt, "30", "", "", {}},
      {"guesser.epochs", T::kInt, "150", "30", "", {}},
      {"guesser.batch_size", T::kInt, "64", "", "", {}},
      {"guesser.learning_rate", T::kReal, "0.0001", "", "", {}},
      {"guesser.width", T::kInt, "128", "", "", {}},
      {"guesser.state_layers", T::kInt, "3", "", "", {}},
      {"guesser.head_layers", T::kInt, "2", "", "", {}},
      {"guesser.attention_dim", T::kInt, "8", "", "", {}},
      {"guesser.eval_games", T::kInt, "2000", "", "games per stochastic policy", {}},
      {"guesser.max_moves", T::kInt, "20", "", "", {}},
      {"guesser.saliency_aggregate", T::kString, "third", "", "third lookup or mean of three", {"third", "mean"}},
      {"guesser.policies", T::kString, "saliency,prediction,binary_search,passive,random", "",
       "comma-separated policies to evaluate",
       {"saliency", "prediction", "binary_search", "passive", "random"}, true},
      {"guesser.trace_moves", T::kInt, "10", "", "moves recorded in saliency_profile.csv", {}},
  };
  return schema;
}

std::map<std::string, std::string> parse_config_text(const std::string& text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const ConfigKey* spec = find_key(key);
    if (!spec) throw ConfigError(where + ": unknown config key '" + key + "'");
    if (out.count(key)) throw ConfigError(where + ": key '" + key + "' set twice");
    try {
      check_value(*spec, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
    out[key] = value;
  }
  return out;
}

RunConfig RunConfig::defaults(bool desk_scale) {
  RunConfig c;
  for (const auto& k : config_schema()) {
    c.values_[k.name] = desk_scale && !k.desk_default.empty() ? k.desk_default : k.full_default;
  }
  c.values_["desk_scale"] = desk_scale ? "true" : "false";
  return c;
}

RunConfig RunConfig::load(const std::optional<std::filesystem::path>& file, const ConfigOverrides& overrides) {
  std::map<std::string, std::string> entries;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    entries = parse_config_text(buffer.str(), file->string());
  }
  bool desk = overrides.desk_scale;
  if (auto it = entries.find("desk_scale"); it != entries.end()) desk = desk || *parse_bool(it->second);
  RunConfig c = defaults(desk);
  for (const auto& [k, v] : entries) c.set(k, v);
  if (desk) c.set("desk_scale", "true");
  if (overrides.seed) c.set("seed", std::to_string(*overrides.seed));
  return c;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const ConfigKey* spec = find_key(key);
  if (!spec) throw ConfigError("unknown config key '" + key + "'");
  check_value(*spec, value);
  values_[key] = value;
}

const std::string& RunConfig::raw(const std::string& key, ConfigType type) const {
  const ConfigKey* spec = find_key(key);
  if (!spec) throw ConfigError("unknown config key '" + key + "'");
  if (spec->type != type) throw ConfigError("config key '" + key + "' read with the wrong type");
  return values_.at(key);
}

std::int64_t RunConfig::get_int(const std::string& key) const { return *parse_int(raw(key, T::kInt)); }
double RunConfig::get_real(const std::string& key) const { return *parse_real(raw(key, T::kReal)); }
bool RunConfig::get_bool(const std::string& key) const { return *parse_bool(raw(key, T::kBool)); }
const std::string& RunConfig::get_string(const std::string& key) const { return raw(key, T::kString); }

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& k : config_schema()) out += k.name + "=" + values_.at(k.name) + "\n";
  return out;
}

void RunConfig::write_resolved(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << resolved();
}

}  // namespace qdn
