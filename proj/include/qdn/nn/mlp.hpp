#pragma once

#include <string>
#include <vector>

#include "qdn/autodiff/graph.hpp"

namespace qdn {

enum class OutputActivation { kLinear, kRelu, kSigmoid };

/// Stack of dense layers. Hidden layers use ReLU; the last layer uses
/// `output`. Layer i is stored as `<prefix>.l<i>.weight/.bias`.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::string prefix, std::vector<Index> widths, OutputActivation output)
      : prefix_(std::move(prefix)), widths_(std::move(widths)), output_(output) {
    if (widths_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output widths");
  }

  template <typename Scalar, typename Rng>
  void init(BasicParameterStore<Scalar>& store, Rng& rng) const {
    for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
      add_linear(store, layer_name(i), widths_[i], widths_[i + 1], rng);
    }
  }

  template <typename Scalar>
  NodeId operator()(BasicGraph<Scalar>& g, NodeId x) const {
    const std::size_t layers = widths_.size() - 1;
    for (std::size_t i = 0; i < layers; ++i) {
      const std::string name = layer_name(i);
      x = g.add_bias(g.matmul(x, g.parameter(name + ".weight")), g.parameter(name + ".bias"));
      if (i + 1 < layers || output_ == OutputActivation::kRelu) {
        x = g.relu(x);
      } else if (output_ == OutputActivation::kSigmoid) {
        x = g.sigmoid(x);
      }
    }
    return x;
  }

  Index input_width() const { return widths_.front(); }
  Index output_width() const { return widths_.back(); }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string layer_name(std::size_t i) const { return prefix_ + ".l" + std::to_string(i); }

  std::string prefix_;
  std::vector<Index> widths_;
  OutputActivation output_ = OutputActivation::kLinear;
};

}  // namespace qdn
