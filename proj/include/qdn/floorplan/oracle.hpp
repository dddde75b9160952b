#pragma once

// Fine-timestep stepping oracle for the floorplan physics. It only uses the
// point-in-region test: advance in increments of `delta`, and when the next
// sample leaves the region locate the crossing by bisection and reverse.

#include <algorithm>

#include "qdn/floorplan/floorplan.hpp"

namespace qdn::reference {

struct OracleStep {
  Vec2 position;
  bool collided = false;
  int reversals = 0;
  bool capped = false;
};

inline OracleStep oracle_step(const Floorplan& plan, const Vec2& start, Vec2 dir, double length,
                              double delta = 1e-5, int max_reversals = kMaxReversals) {
  dir.normalize();
  OracleStep out;
  Vec2 pos = start;
  double remaining = length;
  while (remaining > 0) {
    const double h = std::min(delta, remaining);
    const Vec2 candidate = pos + h * dir;
    if (plan.contains(candidate)) {
      pos = candidate;
      remaining -= h;
      continue;
    }
    double inside = 0.0, outside = h;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (inside + outside);
      if (plan.contains(pos + mid * dir)) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    out.collided = true;
    if (out.reversals == max_reversals) {
      out.capped = true;
      out.position = start;
      return out;
    }
    ++out.reversals;
    pos += inside * dir;
    remaining -= inside;
    dir = -dir;
  }
  out.position = pos;
  return out;
}

}  // namespace qdn::reference
