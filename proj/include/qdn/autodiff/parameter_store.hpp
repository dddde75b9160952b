#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "qdn/autodiff/dense.hpp"

namespace qdn {

template <typename Scalar>
struct ParameterEntry {
  DenseArray<Scalar> value;
  DenseArray<Scalar> first_moment;
  DenseArray<Scalar> second_moment;
  std::int64_t step = 0;
};

template <typename Scalar>
using GradientMap = std::map<std::string, DenseArray<Scalar>>;

/// Named trainable tensors plus their Adam state. Iteration order is the
/// lexicographic name order, which fixes every reduction and file layout.
template <typename Scalar>
class BasicParameterStore {
 public:
  using Entry = ParameterEntry<Scalar>;
  using Array = DenseArray<Scalar>;

  Array& add(const std::string& name, Array value) {
    if (entries_.count(name)) {
      throw std::invalid_argument("duplicate parameter name: " + name);
    }
    Entry entry;
    entry.first_moment = Array::Zero(value.rows(), value.cols());
    entry.second_moment = Array::Zero(value.rows(), value.cols());
    entry.value = std::move(value);
    return entries_.emplace(name, std::move(entry)).first->second.value;
  }

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }

  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }
  Entry& entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
    return it->second;
  }

  const Array& value(const std::string& name) const { return entry(name).value; }
  Array& value(const std::string& name) { return entry(name).value; }

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& [name, e] : entries_) n += static_cast<std::size_t>(e.value.size());
    return n;
  }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

 private:
  std::map<std::string, Entry> entries_;
};

using ParameterStore = BasicParameterStore<double>;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update with bias correction. Every parameter must have a
/// gradient of matching shape.
template <typename Scalar>
void adam_step(BasicParameterStore<Scalar>& store, const GradientMap<Scalar>& gradients,
               Scalar learning_rate, const AdamConfig& config = {}) {
  for (const auto& [name, entry] : store) {
    auto it = gradients.find(name);
    if (it == gradients.end()) throw std::invalid_argument("missing gradient for parameter: " + name);
    if (it->second.rows() != entry.value.rows() || it->second.cols() != entry.value.cols()) {
      throw ShapeError("gradient shape " + shape_string(it->second) + " does not match parameter " +
                       name + " " + shape_string(entry.value));
    }
  }
  const Scalar b1 = static_cast<Scalar>(config.beta1);
  const Scalar b2 = static_cast<Scalar>(config.beta2);
  const Scalar eps = static_cast<Scalar>(config.epsilon);
  for (auto& [name, entry] : store) {
    const auto& g = gradients.at(name).array();
    entry.step += 1;
    entry.first_moment.array() = b1 * entry.first_moment.array() + (1 - b1) * g;
    entry.second_moment.array() = b2 * entry.second_moment.array() + (1 - b2) * g.square();
    const Scalar c1 = 1 - std::pow(b1, static_cast<Scalar>(entry.step));
    const Scalar c2 = 1 - std::pow(b2, static_cast<Scalar>(entry.step));
    entry.value.array() -= learning_rate * (entry.first_moment.array() / c1) /
                           ((entry.second_moment.array() / c2).sqrt() + eps);
  }
}

/// Adds `increment` into `total`, creating entries as needed.
template <typename Scalar>
void accumulate(GradientMap<Scalar>& total, const GradientMap<Scalar>& increment) {
  for (const auto& [name, g] : increment) {
    auto it = total.find(name);
    if (it == total.end()) {
      total.emplace(name, g);
    } else {
      it->second += g;
    }
  }
}

/// Glorot-uniform weights (in x out) named `<prefix>.weight` and zero bias
/// (1 x out) named `<prefix>.bias`.
template <typename Scalar, typename Rng>
void add_linear(BasicParameterStore<Scalar>& store, const std::string& prefix, Index fan_in,
                Index fan_out, Rng& rng, bool with_bias = true) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseArray<Scalar> w(fan_in, fan_out);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
  store.add(prefix + ".weight", std::move(w));
  if (with_bias) store.add(prefix + ".bias", DenseArray<Scalar>::Zero(1, fan_out));
}

}  // namespace qdn
