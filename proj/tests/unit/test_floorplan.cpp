#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdn/floorplan/oracle.hpp"
#include "qdn/floorplan/floorplan.hpp"

using namespace qdn;
using qdn::reference::oracle_step;

namespace {

Floorplan box(double x0, double y0, double x1, double y1) {
  return Floorplan({Rect{Vec2(x0, y0), Vec2(x1, y1)}});
}

}  // namespace

TEST_CASE("generate_floorplan") {
  CHECK(generate_floorplan(42).rects().size() == generate_floorplan(42).rects().size());
  const auto a = generate_floorplan(42), b = generate_floorplan(42);
  for (std::size_t i = 0; i < a.rects().size(); ++i) {
    CHECK(a.rects()[i].min == b.rects()[i].min);
    CHECK(a.rects()[i].max == b.rects()[i].max);
  }
  int disconnected = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Floorplan plan = generate_floorplan(seed);
    disconnected += !plan.connected();
    CHECK(plan.rects().size() >= 3);
    CHECK(plan.rects().size() <= 8);
    for (const auto& r : plan.rects()) {
      CHECK(r.width() >= 0.2);
      CHECK(r.width() <= 0.7);
      CHECK(r.height() >= 0.2);
      CHECK(r.height() <= 0.7);
      CHECK(r.min.minCoeff() >= 0.0);
      CHECK(r.max.maxCoeff() <= 1.0);
    }
  }
  CHECK(disconnected == 0);
}

TEST_CASE("chain construction keeps plans connected") {
  FloorplanConfig config;
  config.max_attempts = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) CHECK(generate_floorplan(seed, config).connected());
}

TEST_CASE("step_agent examples") {
  SUBCASE("wall ahead reverses") {
    const Floorplan plan = box(0.1, 0.1, 0.6, 0.9);
    const auto out = step_agent(plan, {Vec2(0.5, 0.5)}, Vec2(1, 0), 0.2);
    CHECK(out.collided);
    CHECK(out.reversals == 1);
    CHECK(std::abs(out.state.position.x() - 0.5) < 1e-12);
    CHECK(out.state.position.y() == 0.5);
  }
  SUBCASE("open space") {
    const Floorplan plan = box(0.0, 0.0, 1.0, 1.0);
    const Vec2 dir = Vec2(3, 4) / 5.0;
    const auto out = step_agent(plan, {Vec2(0.5, 0.5)}, dir, 0.2);
    CHECK_FALSE(out.collided);
    CHECK((out.state.position - (Vec2(0.5, 0.5) + 0.2 * dir)).norm() < 1e-15);
  }
  SUBCASE("narrow slot bounces four times") {
    const Floorplan plan = box(0.475, 0.1, 0.525, 0.9);
    const auto out = step_agent(plan, {Vec2(0.49, 0.5)}, Vec2(1, 0), 0.2);
    const auto oracle = oracle_step(plan, Vec2(0.49, 0.5), Vec2(1, 0), 0.2);
    CHECK(out.reversals == 4);
    CHECK(oracle.reversals == 4);
    CHECK((out.state.position - oracle.position).norm() < 1e-6);
    CHECK(std::abs(out.path_length - 0.2) < 1e-12);
  }
  SUBCASE("overlapping rectangles form one corridor") {
    const Floorplan plan({Rect{Vec2(0.1, 0.4), Vec2(0.5, 0.6)}, Rect{Vec2(0.4, 0.3), Vec2(0.9, 0.7)}});
    const auto out = step_agent(plan, {Vec2(0.3, 0.5)}, Vec2(1, 0), 0.5);
    CHECK_FALSE(out.collided);
    CHECK(std::abs(out.state.position.x() - 0.8) < 1e-12);
  }
  SUBCASE("reversal cap keeps the agent in place") {
    const Floorplan plan = box(0.5, 0.1, 0.51, 0.9);
    const auto out = step_agent(plan, {Vec2(0.505, 0.5)}, Vec2(1, 0), 0.2);
    CHECK(out.capped);
    CHECK(out.collided);
    CHECK(out.state.position == Vec2(0.505, 0.5));
  }
  SUBCASE("errors") {
    const Floorplan plan = box(0.1, 0.1, 0.6, 0.9);
    CHECK_THROWS_AS(step_agent(plan, {Vec2(0.8, 0.5)}, Vec2(1, 0), 0.1), std::invalid_argument);
    CHECK_THROWS_AS(step_agent(plan, {Vec2(0.3, 0.5)}, Vec2(1, 0), 0.0), std::invalid_argument);
  }
}

TEST_CASE("step_agent agrees with the fine-timestep oracle") {
  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> length(0.02, 0.3);
  double worst = 0;
  int flag_mismatches = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Floorplan plan = generate_floorplan(1000 + trial % 20);
    const Vec2 start = sample_position(plan, rng);
    const Vec2 dir = random_direction(rng);
    const double step = length(rng);
    const auto out = step_agent(plan, {start}, dir, step);
    const auto oracle = oracle_step(plan, start, dir, step);
    worst = std::max(worst, (out.state.position - oracle.position).norm());
    flag_mismatches += out.collided != oracle.collided;
    if (!out.capped) CHECK(std::abs(out.path_length - step) < 1e-9);
  }
  CHECK(worst < 1e-4);
  CHECK(flag_mismatches == 0);
}

TEST_CASE("random_trajectory") {
  const Floorplan plan = generate_floorplan(3);
  std::mt19937_64 rng(3);
  const AgentState start{sample_position(plan, rng)};
  CHECK(random_trajectory(plan, start, 0, 1, 0.05).empty());
  const auto a = random_trajectory(plan, start, 500, 9, 0.05);
  const auto b = random_trajectory(plan, start, 500, 9, 0.05);
  REQUIRE(a.size() == 500);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].state == b[i].state);
    CHECK(plan.contains(a[i].state));
    CHECK(std::abs(a[i].action.norm() - 1.0) < 1e-9);
  }
  CHECK(a[0].state == start.position);
}

TEST_CASE("random actions are uniform on the circle") {
  const Floorplan plan = generate_floorplan(5);
  std::mt19937_64 rng(5);
  const auto traj = random_trajectory(plan, {sample_position(plan, rng)}, 100000, 17, 0.05);
  std::vector<double> bins(36, 0.0);
  for (const auto& t : traj) {
    double angle = std::atan2(t.action.y(), t.action.x());
    if (angle < 0) angle += 2 * std::numbers::pi;
    bins[std::min<std::size_t>(35, static_cast<std::size_t>(angle / (2 * std::numbers::pi) * 36))] += 1;
  }
  const double expected = traj.size() / 36.0;
  double chi2 = 0;
  for (double b : bins) chi2 += (b - expected) * (b - expected) / expected;
  // chi-square critical value, 35 degrees of freedom, p = 0.01
  CHECK(chi2 < 57.342);
}

TEST_CASE("agent stays inside over many random steps") {
  int escapes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Floorplan plan = generate_floorplan(500 + seed);
    std::mt19937_64 rng(seed);
    AgentState s{sample_position(plan, rng)};
    for (int i = 0; i < 5000; ++i) {
      s = step_agent(plan, s, random_direction(rng), 0.05).state;
      escapes += !plan.contains(s.position);
    }
  }
  CHECK(escapes == 0);
}

TEST_CASE("grid_coverage") {
  std::vector<Vec2> none;
  CHECK(grid_coverage(none) == 0);
  std::vector<Vec2> one_cell{Vec2(0.01, 0.01), Vec2(0.05, 0.02), Vec2(0.06, 0.06)};
  CHECK(grid_coverage(one_cell) == 1);
  std::vector<Vec2> four{Vec2(0.01, 0.01), Vec2(0.07, 0.01), Vec2(0.01, 0.07), Vec2(0.5, 0.5)};
  // cells (0,0), (1,0), (0,1), (8,8)
  CHECK(grid_coverage(four) == 4);
  std::vector<Vec2> straddle{Vec2(0.06, 0.03), Vec2(0.0626, 0.03), Vec2(0.2, 0.9), Vec2(0.21, 0.91)};
  CHECK(grid_coverage(straddle) == 3);
  const auto curve = coverage_curve(straddle);
  CHECK(curve == std::vector<int>{1, 2, 3, 3});
}
