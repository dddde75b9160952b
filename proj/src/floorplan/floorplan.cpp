#include "qdn/floorplan/floorplan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qdn {

Floorplan::Floorplan(std::vector<Rect> rects) : rects_(std::move(rects)) {
  if (rects_.empty()) throw std::invalid_argument("floorplan needs at least one rectangle");
  for (const auto& r : rects_) {
    if (!(r.min.x() < r.max.x() && r.min.y() < r.max.y())) {
      throw std::invalid_argument("degenerate rectangle in floorplan");
    }
    if (r.min.x() < 0 || r.min.y() < 0 || r.max.x() > 1 || r.max.y() > 1) {
      throw std::invalid_argument("rectangle outside the unit square");
    }
  }
}

bool Floorplan::contains(const Vec2& p) const {
  return std::any_of(rects_.begin(), rects_.end(), [&](const Rect& r) { return r.contains(p); });
}

bool Floorplan::connected() const {
  if (rects_.empty()) return false;
  std::vector<bool> seen(rects_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < rects_.size(); ++j) {
      if (!seen[j] && rects_[i].overlaps(rects_[j])) {
        seen[j] = true;
        ++reached;
        stack.push_back(j);
      }
    }
  }
  return reached == rects_.size();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Open parameter interval where origin + t * dir lies inside r; empty when lo >= hi.
std::pair<double, double> ray_interval(const Rect& r, const Vec2& origin, const Vec2& dir) {
  double lo = -kInf, hi = kInf;
  for (int axis = 0; axis < 2; ++axis) {
    const double o = origin[axis], d = dir[axis];
    if (d == 0.0) {
      if (!(o > r.min[axis] && o < r.max[axis])) return {0.0, 0.0};
      continue;
    }
    double t1 = (r.min[axis] - o) / d;
    double t2 = (r.max[axis] - o) / d;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  }
  return {lo, hi};
}

// Furthest reach from t = 0 through overlapping open intervals.
double reach(const std::vector<std::pair<double, double>>& intervals) {
  double edge = 0.0;
  bool extended = true;
  while (extended) {
    extended = false;
    for (const auto& [lo, hi] : intervals) {
      if (lo < edge && edge < hi) {
        edge = hi;
        extended = true;
      }
    }
  }
  return edge;
}

}  // namespace

std::pair<double, double> Floorplan::free_interval(const Vec2& origin, const Vec2& direction) const {
  if (!contains(origin)) throw std::invalid_argument("position outside the movable region");
  std::vector<std::pair<double, double>> forward, backward;
  forward.reserve(rects_.size());
  backward.reserve(rects_.size());
  for (const auto& r : rects_) {
    const auto [lo, hi] = ray_interval(r, origin, direction);
    if (lo < hi) {
      forward.emplace_back(lo, hi);
      backward.emplace_back(-hi, -lo);
    }
  }
  return {-reach(backward), reach(forward)};
}

Floorplan generate_floorplan(std::uint64_t seed, const FloorplanConfig& config) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count_dist(config.min_rects, config.max_rects);
  std::uniform_real_distribution<double> side(config.min_side, config.max_side);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto random_rect = [&] {
    const double w = side(rng), h = side(rng);
    const double x = unit(rng) * (1.0 - w), y = unit(rng) * (1.0 - h);
    return Rect{Vec2(x, y), Vec2(x + w, y + h)};
  };

  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const int count = count_dist(rng);
    std::vector<Rect> rects;
    for (int i = 0; i < count; ++i) rects.push_back(random_rect());
    Floorplan plan(std::move(rects));
    if (plan.connected()) return plan;
  }

  // Chain construction: each rectangle is centred on an interior point of
  // its predecessor, so consecutive rectangles overlap.
  const int count = count_dist(rng);
  std::vector<Rect> rects{random_rect()};
  for (int i = 1; i < count; ++i) {
    const Rect& prev = rects.back();
    const double cx = prev.min.x() + (0.25 + 0.5 * unit(rng)) * prev.width();
    const double cy = prev.min.y() + (0.25 + 0.5 * unit(rng)) * prev.height();
    const double w = side(rng), h = side(rng);
    const double x = std::clamp(cx - w / 2, 0.0, 1.0 - w);
    const double y = std::clamp(cy - h / 2, 0.0, 1.0 - h);
    rects.push_back(Rect{Vec2(x, y), Vec2(x + w, y + h)});
  }
  return Floorplan(std::move(rects));
}

Vec2 sample_position(const Floorplan& plan, std::mt19937_64& rng) {
  Vec2 lo(1, 1), hi(0, 0);
  for (const auto& r : plan.rects()) {
    lo = lo.cwiseMin(r.min);
    hi = hi.cwiseMax(r.max);
  }
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  for (;;) {
    const Vec2 p(ux(rng), uy(rng));
    if (plan.contains(p)) return p;
  }
}

Vec2 random_direction(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double a = angle(rng);
  return Vec2(std::cos(a), std::sin(a));
}

StepOutcome step_agent(const Floorplan& plan, const AgentState& state, const Vec2& direction,
                       double step_length, int max_reversals) {
  if (!(step_length > 0)) throw std::invalid_argument("step_length must be positive");
  const double norm = direction.norm();
  if (!(norm > 0)) throw std::invalid_argument("direction must be non-zero");
  const Vec2 dir = direction / norm;
  const auto [lo, hi] = plan.free_interval(state.position, dir);

  // Reversals keep the agent on one line, so the motion is a 1-D bounce
  // between lo and hi.
  double t = 0.0, velocity = 1.0, budget = step_length;
  StepOutcome out;
  while (budget > 0) {
    const double to_wall = velocity > 0 ? hi - t : t - lo;
    if (budget < to_wall) {
      t += velocity * budget;
      out.path_length += budget;
      budget = 0;
      break;
    }
    out.collided = true;
    if (out.reversals == max_reversals) {
      out.capped = true;
      out.state = state;
      return out;
    }
    ++out.reversals;
    t = velocity > 0 ? hi : lo;
    out.path_length += to_wall;
    budget -= to_wall;
    velocity = -velocity;
  }
  out.state.position = state.position + t * dir;
  return out;
}

std::vector<Transition> random_trajectory(const Floorplan& plan, const AgentState& start,
                                          int n_steps, std::uint64_t seed, double step_length) {
  std::mt19937_64 rng(seed);
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(std::max(n_steps, 0)));
  AgentState s = start;
  for (int i = 0; i < n_steps; ++i) {
    const Vec2 a = random_direction(rng);
    const StepOutcome step = step_agent(plan, s, a, step_length);
    out.push_back({s.position, a, step.collided});
    s = step.state;
  }
  return out;
}

int coverage_cell(const Vec2& p, int grid) {
  const int cx = std::clamp(static_cast<int>(std::floor(p.x() * grid)), 0, grid - 1);
  const int cy = std::clamp(static_cast<int>(std::floor(p.y() * grid)), 0, grid - 1);
  return cy * grid + cx;
}

int grid_coverage(std::span<const Vec2> positions, int grid) {
  const auto curve = coverage_curve(positions, grid);
  return curve.empty() ? 0 : curve.back();
}

std::vector<int> coverage_curve(std::span<const Vec2> positions, int grid) {
  std::vector<bool> seen(static_cast<std::size_t>(grid * grid), false);
  std::vector<int> out;
  out.reserve(positions.size());
  int count = 0;
  for (const auto& p : positions) {
    auto cell = seen[static_cast<std::size_t>(coverage_cell(p, grid))];
    if (!cell) {
      cell = true;
      ++count;
    }
    out.push_back(count);
  }
  return out;
}

}  // namespace qdn
