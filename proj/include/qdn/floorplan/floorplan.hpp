#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace qdn {

using Vec2 = Eigen::Vector2d;

/// Axis-aligned rectangle; the movable area is its open interior.
struct Rect {
  Vec2 min;
  Vec2 max;

  bool contains(const Vec2& p) const {
    return p.x() > min.x() && p.x() < max.x() && p.y() > min.y() && p.y() < max.y();
  }
  bool overlaps(const Rect& o) const {
    return min.x() < o.max.x() && o.min.x() < max.x() && min.y() < o.max.y() && o.min.y() < max.y();
  }
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
};

struct FloorplanConfig {
  int min_rects = 3;
  int max_rects = 8;
  double min_side = 0.2;
  double max_side = 0.7;
  int max_attempts = 1000;
};

/// Union of overlapping rectangles inside the unit square.
class Floorplan {
 public:
  Floorplan() = default;
  explicit Floorplan(std::vector<Rect> rects);

  const std::vector<Rect>& rects() const { return rects_; }

  /// Point strictly inside the movable region (some rectangle's interior).
  bool contains(const Vec2& p) const;

  /// Rectangle-overlap graph is connected.
  bool connected() const;

  /// Open interval (lo, hi) of t such that origin + t * direction stays in
  /// the connected stretch of movable region through the origin. Throws if
  /// the origin is outside.
  std::pair<double, double> free_interval(const Vec2& origin, const Vec2& direction) const;

 private:
  std::vector<Rect> rects_;
};

Floorplan generate_floorplan(std::uint64_t seed, const FloorplanConfig& config = {});

/// Uniform sample over the movable region.
Vec2 sample_position(const Floorplan& plan, std::mt19937_64& rng);

/// Unit vector with angle uniform on [0, 2pi).
Vec2 random_direction(std::mt19937_64& rng);

struct AgentState {
  Vec2 position;
};

struct StepOutcome {
  AgentState state;
  bool collided = false;
  int reversals = 0;
  double path_length = 0.0;
  bool capped = false;  // reversal cap hit; agent stayed put
};

inline constexpr int kMaxReversals = 8;

/// Moves `step_length` along `direction`; every wall hit reverses the
/// direction by 180 degrees and spends the remaining budget. More than
/// `max_reversals` hits leaves the agent at its start position.
StepOutcome step_agent(const Floorplan& plan, const AgentState& state, const Vec2& direction,
                       double step_length, int max_reversals = kMaxReversals);

struct Transition {
  Vec2 state;
  Vec2 action;
  bool collided = false;
};

/// n_steps uniformly random actions from `start`.
std::vector<Transition> random_trajectory(const Floorplan& plan, const AgentState& start,
                                          int n_steps, std::uint64_t seed, double step_length);

inline constexpr int kCoverageGrid = 16;

/// Cell of a point on a grid x grid partition of the unit square.
int coverage_cell(const Vec2& p, int grid = kCoverageGrid);

/// Number of distinct grid cells containing at least one position.
int grid_coverage(std::span<const Vec2> positions, int grid = kCoverageGrid);

/// Coverage after each prefix: out[i] = grid_coverage(positions[0..i]).
std::vector<int> coverage_curve(std::span<const Vec2> positions, int grid = kCoverageGrid);

}  // namespace qdn
