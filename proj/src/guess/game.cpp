#include "qdn/guess/game.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qdn {

namespace {

void require_in_range(int v, const char* what) {
  if (v < 1 || v > kGuessRange) {
    throw std::out_of_range(std::string(what) + " " + std::to_string(v) + " outside [1, 256]");
  }
}

}  // namespace

char outcome_code(Outcome o) {
  switch (o) {
    case Outcome::kTooLow: return 'L';
    case Outcome::kTooHigh: return 'H';
    case Outcome::kCorrect: return 'C';
  }
  throw std::invalid_argument("bad outcome");
}

Outcome outcome_from_code(char c) {
  switch (c) {
    case 'L': return Outcome::kTooLow;
    case 'H': return Outcome::kTooHigh;
    case 'C': return Outcome::kCorrect;
    default: throw std::invalid_argument(std::string("unknown outcome code '") + c + "'");
  }
}

Outcome game_oracle(int target, int guess) {
  require_in_range(target, "target");
  require_in_range(guess, "guess");
  if (guess == target) return Outcome::kCorrect;
  return guess < target ? Outcome::kTooLow : Outcome::kTooHigh;
}

Row thermometer_encode(int g) {
  require_in_range(g, "guess");
  Row r = Row::Zero(kGuessRange);
  r.head(g).setOnes();
  return r;
}

void GameRecord::push(int guess) {
  outcomes.push_back(game_oracle(target, guess));
  guesses.push_back(guess);
}

void GameRecord::validate() const {
  require_in_range(target, "target");
  if (guesses.size() != outcomes.size()) {
    throw std::invalid_argument("game has " + std::to_string(guesses.size()) + " guesses but " +
                                std::to_string(outcomes.size()) + " outcomes");
  }
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    if (game_oracle(target, guesses[i]) != outcomes[i]) {
      throw std::invalid_argument("outcome " + std::to_string(i) + " disagrees with target " +
                                  std::to_string(target));
    }
  }
}

GameRecord GameRecord::prefix(std::size_t n) const {
  if (n > size()) throw std::out_of_range("prefix longer than game");
  GameRecord out;
  out.target = target;
  out.guesses.assign(guesses.begin(), guesses.begin() + static_cast<std::ptrdiff_t>(n));
  out.outcomes.assign(outcomes.begin(), outcomes.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void ConsistentSet::update(int guess, Outcome outcome) {
  switch (outcome) {
    case Outcome::kCorrect: lo = hi = guess; break;
    case Outcome::kTooLow: lo = std::max(lo, guess + 1); break;
    case Outcome::kTooHigh: hi = std::min(hi, guess - 1); break;
  }
  if (lo > hi) throw std::logic_error("inconsistent feedback: no candidate remains");
}

GameRecord random_game(int moves, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(1, kGuessRange);
  GameRecord g;
  g.target = pick(rng);
  for (int i = 0; i < moves; ++i) g.push(pick(rng));
  return g;
}

std::vector<GameRecord> generate_games(int count, int moves, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GameRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(random_game(moves, rng));
  return out;
}

void write_games(const std::filesystem::path& path, const std::vector<GameRecord>& games) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& g : games) {
    out << g.target;
    for (std::size_t i = 0; i < g.size(); ++i) out << ' ' << g.guesses[i] << ' ' << outcome_code(g.outcomes[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<GameRecord> read_games(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<GameRecord> games;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    GameRecord g;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!(ss >> g.target)) throw std::runtime_error(where + ": missing target");
    int guess;
    std::string code;
    while (ss >> guess) {
      if (!(ss >> code) || code.size() != 1) throw std::runtime_error(where + ": guess without outcome");
      g.guesses.push_back(guess);
      g.outcomes.push_back(outcome_from_code(code[0]));
    }
    if (!ss.eof()) throw std::runtime_error(where + ": malformed entry");
    try {
      g.validate();
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    games.push_back(std::move(g));
  }
  return games;
}

}  // namespace qdn
