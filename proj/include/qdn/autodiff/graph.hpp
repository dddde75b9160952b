#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qdn/autodiff/dense.hpp"
#include "qdn/autodiff/kernels.hpp"
#include "qdn/autodiff/parameter_store.hpp"

namespace qdn {

using NodeId = std::size_t;

enum class Primitive {
  kInput,
  kParameter,
  kMatMul,
  kAdd,
  kAddBias,
  kRelu,
  kSigmoid,
  kSoftmaxRows,
  kLog,
  kMul,
  kScale,
  kConcatCols,
  kRowDistances,
  kMean,
  kLayerNorm,
};

const char* primitive_name(Primitive p);

class GraphStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, NodeId node, Primitive op)
      : std::runtime_error(what), node_(node), op_(op) {}
  NodeId node() const { return node_; }
  Primitive op() const { return op_; }

 private:
  NodeId node_;
  Primitive op_;
};

/// Dynamic reverse-mode computation graph over dense rank-2 arrays.
///
/// Nodes are appended in topological order; shapes are checked when a node
/// is added. evaluate() fills every value, backward() propagates a seed
/// gradient from an output node back to all inputs and parameters.
/// Parameters are bound by name to a store that must outlive the graph and
/// stay unmodified between evaluate() and backward().
template <typename Scalar>
class BasicGraph {
 public:
  using Array = DenseArray<Scalar>;
  using Store = BasicParameterStore<Scalar>;

  BasicGraph() = default;
  explicit BasicGraph(const Store& store) : store_(&store) {}

  NodeId input(Array value) {
    Node n = make(Primitive::kInput, value.rows(), value.cols());
    n.owned = std::move(value);
    return push(std::move(n));
  }

  // Repeated calls with the same name return the same node.
  NodeId parameter(const std::string& name) {
    if (!store_) throw GraphStateError("graph has no parameter store bound");
    if (auto it = parameter_nodes_.find(name); it != parameter_nodes_.end()) return it->second;
    const Array& bound = store_->value(name);
    Node n = make(Primitive::kParameter, bound.rows(), bound.cols());
    n.bound = &bound;
    n.name = name;
    const NodeId id = push(std::move(n));
    parameter_nodes_.emplace(name, id);
    return id;
  }

  // a * b, or a * b^T when transpose_rhs is set.
  NodeId matmul(NodeId a, NodeId b, bool transpose_rhs = false) {
    const Index inner_b = transpose_rhs ? cols(b) : rows(b);
    const Index out_cols = transpose_rhs ? rows(b) : cols(b);
    if (cols(a) != inner_b) {
      throw ShapeError(std::string("matmul inner dimensions differ: ") +
                       shape_string(rows(a), cols(a)) + (transpose_rhs ? " * T(" : " * (") +
                       shape_string(rows(b), cols(b)) + ")");
    }
    Node n = make(Primitive::kMatMul, rows(a), out_cols, a, b);
    n.transpose_rhs = transpose_rhs;
    return push(std::move(n));
  }

  NodeId add(NodeId a, NodeId b) { return binary_same_shape(Primitive::kAdd, a, b); }
  NodeId mul(NodeId a, NodeId b) { return binary_same_shape(Primitive::kMul, a, b); }

  // Adds a 1 x cols row to every row of x.
  NodeId add_bias(NodeId x, NodeId bias) {
    if (rows(bias) != 1 || cols(bias) != cols(x)) {
      throw ShapeError("bias must be 1x" + std::to_string(cols(x)) + ", got " +
                       shape_string(rows(bias), cols(bias)));
    }
    return push(make(Primitive::kAddBias, rows(x), cols(x), x, bias));
  }

  NodeId relu(NodeId x) { return unary(Primitive::kRelu, x); }
  NodeId sigmoid(NodeId x) { return unary(Primitive::kSigmoid, x); }
  NodeId softmax_rows(NodeId x) { return unary(Primitive::kSoftmaxRows, x); }
  NodeId log(NodeId x) { return unary(Primitive::kLog, x); }

  NodeId layer_norm(NodeId x) {
    if (cols(x) < 2) throw ShapeError("layer_norm needs at least 2 features");
    return unary(Primitive::kLayerNorm, x);
  }

  NodeId scale(NodeId x, Scalar factor) {
    Node n = make(Primitive::kScale, rows(x), cols(x), x);
    n.factor = factor;
    return push(std::move(n));
  }

  NodeId concat_cols(NodeId a, NodeId b) {
    if (rows(a) != rows(b)) {
      throw ShapeError("concat_cols row counts differ: " + shape_string(rows(a), cols(a)) +
                       " vs " + shape_string(rows(b), cols(b)));
    }
    return push(make(Primitive::kConcatCols, rows(a), cols(a) + cols(b), a, b));
  }

  // out(i, j) = |queries_i - keys_j|.
  NodeId row_distances(NodeId queries, NodeId keys) {
    if (cols(queries) != cols(keys)) {
      throw ShapeError("row_distances feature widths differ: " +
                       shape_string(rows(queries), cols(queries)) + " vs " +
                       shape_string(rows(keys), cols(keys)));
    }
    return push(make(Primitive::kRowDistances, rows(queries), rows(keys), queries, keys));
  }

  // Mean over all entries -> 1 x 1.
  NodeId mean(NodeId x) { return push(make(Primitive::kMean, 1, 1, x)); }

  std::size_t size() const { return nodes_.size(); }
  Index rows(NodeId id) const { return node(id).rows; }
  Index cols(NodeId id) const { return node(id).cols; }
  Primitive op(NodeId id) const { return node(id).op; }

  /// Computes every node in order and returns the value of `output`.
  const Array& evaluate(NodeId output) {
    node(output);
    for (NodeId id = 0; id < nodes_.size(); ++id) forward(id);
    evaluated_ = true;
    return value(output);
  }

  bool evaluated() const { return evaluated_; }

  const Array& value(NodeId id) const {
    const Node& n = node(id);
    if (n.op == Primitive::kParameter) return *n.bound;
    if (n.op == Primitive::kInput) return n.owned;
    if (!evaluated_) throw GraphStateError("graph has not been evaluated");
    return n.owned;
  }

  /// Propagates `seed` (shaped like `output`) back through the graph.
  /// Gradients accumulate across calls until clear_gradients().
  void backward(NodeId output, const Array& seed) {
    if (!evaluated_) throw GraphStateError("backward called before evaluate");
    const Node& out = node(output);
    if (seed.rows() != out.rows || seed.cols() != out.cols) {
      throw ShapeError("seed shape " + shape_string(seed) + " does not match output " +
                       shape_string(out.rows, out.cols));
    }
    grad_ref(output) += seed;
    for (NodeId id = output + 1; id-- > 0;) {
      if (nodes_[id].grad.size() == 0) continue;
      propagate(id);
    }
  }

  void backward(NodeId output) {
    backward(output, Array::Ones(rows(output), cols(output)));
  }

  void clear_gradients() {
    for (auto& n : nodes_) n.grad.resize(0, 0);
  }

  /// Gradient of a node; zeros when nothing reached it.
  Array gradient(NodeId id) const {
    const Node& n = node(id);
    if (n.grad.size() == 0) return Array::Zero(n.rows, n.cols);
    return n.grad;
  }

  /// Gradients of every parameter bound in this graph, keyed by name.
  GradientMap<Scalar> parameter_gradients() const {
    GradientMap<Scalar> out;
    for (const auto& [name, id] : parameter_nodes_) out.emplace(name, gradient(id));
    return out;
  }

  /// Adds this graph's parameter gradients into `total` in place.
  void accumulate_parameter_gradients(GradientMap<Scalar>& total) const {
    for (const auto& [name, id] : parameter_nodes_) {
      const Node& n = nodes_[id];
      auto it = total.find(name);
      if (it == total.end()) {
        total.emplace(name, gradient(id));
      } else if (n.grad.size() != 0) {
        it->second += n.grad;
      }
    }
  }

  /// Gradients for every entry of the bound store; parameters that are
  /// absent from this graph receive zeros.
  GradientMap<Scalar> store_gradients() const {
    if (!store_) throw GraphStateError("graph has no parameter store bound");
    GradientMap<Scalar> out;
    for (const auto& [name, entry] : *store_) {
      auto it = parameter_nodes_.find(name);
      out.emplace(name, it == parameter_nodes_.end()
                            ? Array::Zero(entry.value.rows(), entry.value.cols())
                            : gradient(it->second));
    }
    return out;
  }

 private:
  static constexpr NodeId kNone = static_cast<NodeId>(-1);

  struct Node {
    Primitive op = Primitive::kInput;
    NodeId lhs = kNone;
    NodeId rhs = kNone;
    Index rows = 0;
    Index cols = 0;
    Array owned;  // value for every op except kParameter
    Array grad;
    Array aux;  // layer-norm 1/sigma per row
    const Array* bound = nullptr;
    std::string name;
    Scalar factor = Scalar(1);
    bool transpose_rhs = false;
  };

  const Node& node(NodeId id) const {
    if (id >= nodes_.size()) throw std::out_of_range("unknown node id " + std::to_string(id));
    return nodes_[id];
  }

  Node make(Primitive op, Index r, Index c, NodeId lhs = kNone, NodeId rhs = kNone) const {
    if (lhs != kNone) node(lhs);
    if (rhs != kNone) node(rhs);
    Node n;
    n.op = op;
    n.rows = r;
    n.cols = c;
    n.lhs = lhs;
    n.rhs = rhs;
    return n;
  }

  NodeId push(Node n) {
    nodes_.push_back(std::move(n));
    evaluated_ = false;
    return nodes_.size() - 1;
  }

  NodeId unary(Primitive op, NodeId x) { return push(make(op, rows(x), cols(x), x)); }

  NodeId binary_same_shape(Primitive op, NodeId a, NodeId b) {
    if (rows(a) != rows(b) || cols(a) != cols(b)) {
      throw ShapeError(std::string(primitive_name(op)) + " shapes differ: " +
                       shape_string(rows(a), cols(a)) + " vs " + shape_string(rows(b), cols(b)));
    }
    return push(make(op, rows(a), cols(a), a, b));
  }

  Array& grad_ref(NodeId id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Array::Zero(n.rows, n.cols);
    return n.grad;
  }

  void forward(NodeId id) {
    Node& n = nodes_[id];
    switch (n.op) {
      case Primitive::kInput:
      case Primitive::kParameter:
        return check_finite(id);
      case Primitive::kMatMul: {
        const Array& a = value_unchecked(n.lhs);
        const Array& b = value_unchecked(n.rhs);
        n.owned.resize(n.rows, n.cols);
        if (n.transpose_rhs) {
          n.owned.noalias() = a * b.transpose();
        } else {
          n.owned.noalias() = a * b;
        }
        break;
      }
      case Primitive::kAdd:
        n.owned = value_unchecked(n.lhs) + value_unchecked(n.rhs);
        break;
      case Primitive::kAddBias:
        n.owned = value_unchecked(n.lhs).rowwise() + value_unchecked(n.rhs).row(0);
        break;
      case Primitive::kRelu:
        n.owned = value_unchecked(n.lhs).cwiseMax(Scalar(0));
        break;
      case Primitive::kSigmoid: {
        // Split by sign so exp never overflows.
        const Array& x = value_unchecked(n.lhs);
        n.owned = x.unaryExpr([](Scalar v) {
          if (v >= 0) return Scalar(1) / (Scalar(1) + std::exp(-v));
          const Scalar e = std::exp(v);
          return e / (Scalar(1) + e);
        });
        break;
      }
      case Primitive::kSoftmaxRows:
        n.owned = kernels::softmax_rows(value_unchecked(n.lhs));
        break;
      case Primitive::kLog:
        n.owned = value_unchecked(n.lhs).cwiseMax(kernels::log_floor<Scalar>()).array().log().matrix();
        break;
      case Primitive::kMul:
        n.owned = value_unchecked(n.lhs).cwiseProduct(value_unchecked(n.rhs));
        break;
      case Primitive::kScale:
        n.owned = n.factor * value_unchecked(n.lhs);
        break;
      case Primitive::kConcatCols: {
        const Array& a = value_unchecked(n.lhs);
        const Array& b = value_unchecked(n.rhs);
        n.owned.resize(n.rows, n.cols);
        n.owned.leftCols(a.cols()) = a;
        n.owned.rightCols(b.cols()) = b;
        break;
      }
      case Primitive::kRowDistances:
        n.owned = kernels::row_distances(value_unchecked(n.lhs), value_unchecked(n.rhs));
        break;
      case Primitive::kMean: {
        const Array& x = value_unchecked(n.lhs);
        n.owned.resize(1, 1);
        n.owned(0, 0) = x.size() == 0 ? Scalar(0) : x.sum() / static_cast<Scalar>(x.size());
        break;
      }
      case Primitive::kLayerNorm:
        n.owned = kernels::layer_normalize_rows(value_unchecked(n.lhs), &n.aux);
        break;
    }
    check_finite(id);
  }

  const Array& value_unchecked(NodeId id) const {
    const Node& n = nodes_[id];
    return n.op == Primitive::kParameter ? *n.bound : n.owned;
  }

  void check_finite(NodeId id) const {
    const Node& n = nodes_[id];
    const Array& v = value_unchecked(id);
    if (v.rows() != n.rows || v.cols() != n.cols) {
      throw ShapeError("node " + std::to_string(id) + " (" + primitive_name(n.op) +
                       (n.name.empty() ? "" : " " + n.name) + ") changed shape to " +
                       shape_string(v));
    }
    if (!all_finite(v)) {
      throw NonFiniteError("non-finite value at node " + std::to_string(id) + " (" +
                               primitive_name(n.op) + (n.name.empty() ? "" : " " + n.name) + ")",
                           id, n.op);
    }
  }

  void propagate(NodeId id) {
    const Node& n = nodes_[id];
    const Array& g = n.grad;
    switch (n.op) {
      case Primitive::kInput:
      case Primitive::kParameter:
        return;
      case Primitive::kMatMul: {
        const Array& a = value_unchecked(n.lhs);
        const Array& b = value_unchecked(n.rhs);
        if (n.transpose_rhs) {
          grad_ref(n.lhs).noalias() += g * b;
          grad_ref(n.rhs).noalias() += g.transpose() * a;
        } else {
          grad_ref(n.lhs).noalias() += g * b.transpose();
          grad_ref(n.rhs).noalias() += a.transpose() * g;
        }
        return;
      }
      case Primitive::kAdd:
        grad_ref(n.lhs) += g;
        grad_ref(n.rhs) += g;
        return;
      case Primitive::kAddBias:
        grad_ref(n.lhs) += g;
        grad_ref(n.rhs) += g.colwise().sum();
        return;
      case Primitive::kRelu: {
        const Array& x = value_unchecked(n.lhs);
        grad_ref(n.lhs).array() += (x.array() > Scalar(0)).select(g.array(), Scalar(0));
        return;
      }
      case Primitive::kSigmoid: {
        const Array& s = n.owned;
        grad_ref(n.lhs).array() += g.array() * s.array() * (Scalar(1) - s.array());
        return;
      }
      case Primitive::kSoftmaxRows: {
        const Array& s = n.owned;
        const auto dots = g.cwiseProduct(s).rowwise().sum().eval();
        grad_ref(n.lhs).array() += s.array() * (g.colwise() - dots).array();
        return;
      }
      case Primitive::kLog: {
        const Array& x = value_unchecked(n.lhs);
        const Scalar floor = kernels::log_floor<Scalar>();
        grad_ref(n.lhs).array() += (x.array() > floor).select(g.array() / x.array(), Scalar(0));
        return;
      }
      case Primitive::kMul:
        grad_ref(n.lhs) += g.cwiseProduct(value_unchecked(n.rhs));
        grad_ref(n.rhs) += g.cwiseProduct(value_unchecked(n.lhs));
        return;
      case Primitive::kScale:
        grad_ref(n.lhs) += n.factor * g;
        return;
      case Primitive::kConcatCols: {
        const Index left = cols(n.lhs);
        grad_ref(n.lhs) += g.leftCols(left);
        grad_ref(n.rhs) += g.rightCols(n.cols - left);
        return;
      }
      case Primitive::kRowDistances: {
        // d|q - k| / dq = (q - k) / |q - k|; zero at coincident rows.
        const Array& q = value_unchecked(n.lhs);
        const Array& k = value_unchecked(n.rhs);
        const Array& d = n.owned;
        const Array ratio =
            (d.array() > Scalar(0)).select(g.array() / d.array(), Scalar(0)).matrix();
        const auto row_sums = ratio.rowwise().sum().eval();
        const auto col_sums = ratio.colwise().sum().eval();
        Array& gq = grad_ref(n.lhs);
        gq += row_sums.asDiagonal() * q;
        gq.noalias() -= ratio * k;
        Array& gk = grad_ref(n.rhs);
        gk += col_sums.transpose().asDiagonal() * k;
        gk.noalias() -= ratio.transpose() * q;
        return;
      }
      case Primitive::kMean: {
        const Index count = rows(n.lhs) * cols(n.lhs);
        if (count == 0) return;
        grad_ref(n.lhs).array() += g(0, 0) / static_cast<Scalar>(count);
        return;
      }
      case Primitive::kLayerNorm: {
        // dx = (1/sigma) * (dy - mean(dy) - y * mean(dy * y)) per row.
        const Array& y = n.owned;
        const Scalar width = static_cast<Scalar>(n.cols);
        const auto mean_g = (g.rowwise().sum() / width).eval();
        const auto mean_gy = (g.cwiseProduct(y).rowwise().sum() / width).eval();
        Array dx = g;
        dx.colwise() -= mean_g;
        dx -= mean_gy.asDiagonal() * y;
        grad_ref(n.lhs) += n.aux.col(0).asDiagonal() * dx;
        return;
      }
    }
  }

  const Store* store_ = nullptr;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> parameter_nodes_;
  bool evaluated_ = false;
};

using Graph = BasicGraph<double>;

inline const char* primitive_name(Primitive p) {
  switch (p) {
    case Primitive::kInput: return "input";
    case Primitive::kParameter: return "parameter";
    case Primitive::kMatMul: return "matmul";
    case Primitive::kAdd: return "add";
    case Primitive::kAddBias: return "add_bias";
    case Primitive::kRelu: return "relu";
    case Primitive::kSigmoid: return "sigmoid";
    case Primitive::kSoftmaxRows: return "softmax_rows";
    case Primitive::kLog: return "log";
    case Primitive::kMul: return "mul";
    case Primitive::kScale: return "scale";
    case Primitive::kConcatCols: return "concat_cols";
    case Primitive::kRowDistances: return "row_distances";
    case Primitive::kMean: return "mean";
    case Primitive::kLayerNorm: return "layer_norm";
  }
  return "unknown";
}

}  // namespace qdn
