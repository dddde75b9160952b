#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "qdn/autodiff/graph.hpp"

namespace qdn {

struct GradientCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so gradients that are
  // numerically zero compare on an absolute scale of floor * tolerance.
  double magnitude_floor = 1e-4;
};

struct ParameterCheck {
  double max_relative_error = 0.0;
  Index worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradientCheckReport {
  std::map<std::string, ParameterCheck> parameters;
  double max_relative_error = 0.0;
  std::string worst_parameter;
  bool passed = false;
};

inline double gradient_relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic parameter gradients of a scalar-valued graph against
/// central differences. The builder appends nodes to the given graph and
/// returns the 1 x 1 output; it is re-run for every perturbation.
template <typename Scalar>
GradientCheckReport gradient_check(
    BasicParameterStore<Scalar>& store,
    const std::function<NodeId(BasicGraph<Scalar>&)>& build,
    const GradientCheckOptions& options = {}) {
  auto evaluate_loss = [&]() {
    BasicGraph<Scalar> graph(store);
    const NodeId out = build(graph);
    const auto& v = graph.evaluate(out);
    if (v.rows() != 1 || v.cols() != 1) {
      throw ShapeError("gradient_check needs a 1x1 output, got " + shape_string(v));
    }
    return static_cast<double>(v(0, 0));
  };

  BasicGraph<Scalar> graph(store);
  const NodeId out = build(graph);
  graph.evaluate(out);
  graph.backward(out);
  const auto analytic = graph.store_gradients();

  GradientCheckReport report;
  for (auto& [name, entry] : store) {
    ParameterCheck check;
    const auto& grad = analytic.at(name);
    for (Index i = 0; i < entry.value.size(); ++i) {
      Scalar& slot = entry.value.data()[i];
      const Scalar original = slot;
      slot = original + static_cast<Scalar>(options.step);
      const double plus = evaluate_loss();
      slot = original - static_cast<Scalar>(options.step);
      const double minus = evaluate_loss();
      slot = original;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double a = static_cast<double>(grad.data()[i]);
      const double err = gradient_relative_error(a, numeric, options.magnitude_floor);
      if (err > check.max_relative_error || i == 0) {
        check.max_relative_error = err;
        check.worst_index = i;
        check.analytic = a;
        check.numeric = numeric;
      }
    }
    if (check.max_relative_error >= report.max_relative_error) {
      report.max_relative_error = check.max_relative_error;
      report.worst_parameter = name;
    }
    report.parameters.emplace(name, check);
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace qdn
