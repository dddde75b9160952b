#pragma once

// Forward kernels shared by the graph primitives and the direct (graph-free)
// attention functions, so both paths produce bit-identical results.

#include <cmath>
#include <limits>

#include "qdn/autodiff/dense.hpp"

namespace qdn::kernels {

// Variance offset under the layer-norm root. Keeps constant rows finite.
inline constexpr double kLayerNormEpsilon = 1e-10;

template <typename Scalar>
DenseArray<Scalar> softmax_rows(const DenseArray<Scalar>& logits) {
  DenseArray<Scalar> out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const Scalar peak = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - peak).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

// Returns the normalized rows and writes 1/sigma per row into inv_std.
template <typename Scalar>
DenseArray<Scalar> layer_normalize_rows(const DenseArray<Scalar>& x,
                                        DenseArray<Scalar>* inv_std = nullptr) {
  const Index n = x.cols();
  DenseArray<Scalar> out(x.rows(), n);
  if (inv_std) inv_std->resize(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).sum() / static_cast<Scalar>(n);
    const auto centered = (x.row(r).array() - mean).eval();
    const Scalar var = centered.square().sum() / static_cast<Scalar>(n);
    const Scalar inv = Scalar(1) / std::sqrt(var + Scalar(kLayerNormEpsilon));
    out.row(r) = (centered * inv).matrix();
    if (inv_std) (*inv_std)(r, 0) = inv;
  }
  return out;
}

// Pairwise Euclidean distances: out(i, j) = |queries_i - keys_j|.
// Computed from explicit differences so coincident rows give exactly 0.
template <typename Scalar>
DenseArray<Scalar> row_distances(const DenseArray<Scalar>& queries,
                                 const DenseArray<Scalar>& keys) {
  DenseArray<Scalar> out(queries.rows(), keys.rows());
  for (Index i = 0; i < queries.rows(); ++i) {
    out.row(i) = (keys.rowwise() - queries.row(i)).rowwise().norm().transpose();
  }
  return out;
}

// Smallest argument fed to log; below it the log is flat.
template <typename Scalar>
constexpr Scalar log_floor() {
  return std::numeric_limits<Scalar>::min();
}

}  // namespace qdn::kernels
