#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "qdn/autodiff/dense.hpp"

namespace qdn {

inline constexpr int kGuessRange = 256;

/// Guess relative to the target.
enum class Outcome { kTooLow = 0, kTooHigh = 1, kCorrect = 2 };

char outcome_code(Outcome o);  // 'L', 'H', 'C'
Outcome outcome_from_code(char c);

Outcome game_oracle(int target, int guess);

/// 1 x 256 row whose first g entries are one.
Row thermometer_encode(int g);

struct GameRecord {
  int target = 1;
  std::vector<int> guesses;
  std::vector<Outcome> outcomes;

  std::size_t size() const { return guesses.size(); }
  bool solved() const { return !outcomes.empty() && outcomes.back() == Outcome::kCorrect; }
  void push(int guess);  // records the oracle's answer
  /// Throws if lengths differ, values are out of range, or an outcome
  /// disagrees with the oracle.
  void validate() const;
  /// First n moves.
  GameRecord prefix(std::size_t n) const;

  bool operator==(const GameRecord&) const = default;
};

/// Integers still consistent with the evidence: lo..hi inclusive.
struct ConsistentSet {
  int lo = 1;
  int hi = kGuessRange;

  int size() const { return hi - lo + 1; }
  bool contains(int v) const { return v >= lo && v <= hi; }
  /// Throws if the evidence empties the set.
  void update(int guess, Outcome outcome);
};

/// `moves` guesses drawn i.i.d. uniform on [1, 256]; play continues past a
/// correct guess so every game has the same length.
GameRecord random_game(int moves, std::mt19937_64& rng);
std::vector<GameRecord> generate_games(int count, int moves, std::uint64_t seed);

/// One game per line: target, then (guess, outcome) pairs, e.g.
/// "200 128 L 224 H ...".
void write_games(const std::filesystem::path& path, const std::vector<GameRecord>& games);
std::vector<GameRecord> read_games(const std::filesystem::path& path);

}  // namespace qdn
