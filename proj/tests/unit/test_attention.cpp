#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qdn/attention/attention.hpp"
#include "qdn/autodiff/gradient_check.hpp"
#include "test_support.hpp"

using namespace qdn;
using qdn::testing::random_matrix;

namespace {

Row to_row(const Matrix& m) { return m.row(0); }

// Straight-line evaluation of one block written without the library kernels.
Matrix scripted_normalize(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    double mean = 0, sq = 0;
    for (Index c = 0; c < x.cols(); ++c) {
      mean += x(r, c);
      sq += x(r, c) * x(r, c);
    }
    mean /= x.cols();
    sq /= x.cols();
    const double sd = std::sqrt(sq - mean * mean + kernels::kLayerNormEpsilon);
    for (Index c = 0; c < x.cols(); ++c) out(r, c) = (x(r, c) - mean) / sd;
  }
  return out;
}

Matrix scripted_block(const ParameterStore& s, const std::string& p, const Matrix& z,
                      const Matrix& memory, bool residual) {
  const Matrix q = z * s.value(p + ".query.weight");
  const Matrix k = memory * s.value(p + ".key.weight");
  const Matrix v = memory * s.value(p + ".value.weight");
  Matrix attn(z.rows(), v.cols());
  for (Index i = 0; i < z.rows(); ++i) {
    std::vector<double> e(k.rows());
    double total = 0;
    for (Index j = 0; j < k.rows(); ++j) {
      e[j] = std::exp(q.row(i).dot(k.row(j)));
      total += e[j];
    }
    attn.row(i).setZero();
    for (Index j = 0; j < k.rows(); ++j) attn.row(i) += (e[j] / total) * v.row(j);
  }
  const Matrix lifted = attn * s.value(p + ".up.weight");
  const Matrix z_star = scripted_normalize(residual ? Matrix(z + lifted) : lifted);
  Matrix h = (z_star * s.value(p + ".ff1.weight")).rowwise() + s.value(p + ".ff1.bias").row(0);
  h = h.cwiseMax(0.0);
  const Matrix ff = (h * s.value(p + ".ff2.weight")).rowwise() + s.value(p + ".ff2.bias").row(0);
  return scripted_normalize(z_star + ff);
}

}  // namespace

TEST_CASE("dot_attention_weights examples") {
  Matrix keys(2, 2);
  keys << 1, 0, 0, 1;
  Row q(2);
  q << 1, 0;
  const Row w = dot_attention_weights(keys, q);
  CHECK(w(0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(w(1) == doctest::Approx(1.0 / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(w(0) == doctest::Approx(0.7311).epsilon(1e-4));

  Matrix ortho(3, 3);
  ortho << 0, 1, 0, 0, 0, 1, 0, 2, -3;
  Row q2(3);
  q2 << 5, 0, 0;
  const Row u = dot_attention_weights(ortho, q2);
  for (Index i = 0; i < 3; ++i) CHECK(u(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK(dot_attention_weights(Matrix(Matrix::Constant(1, 3, 4.0)), q2)(0) == 1.0);
  CHECK_THROWS_AS(dot_attention_weights(Matrix(0, 3), q2), std::invalid_argument);
  CHECK_THROWS_AS(dot_attention_weights(keys, q2), ShapeError);
}

TEST_CASE("soft_knn examples") {
  SUBCASE("query on a key, others far") {
    Matrix keys(3, 2);
    keys << 0, 0, 2, 0, 0, -3;
    Matrix values(3, 2);
    values << 1, 2, 3, 4, 5, 6;
    const Row out = soft_knn(keys, values, Row(Row::Zero(2)), 20.0);
    CHECK(std::abs(out(0) - 1.0) < 1e-8);
    CHECK(std::abs(out(1) - 2.0) < 1e-8);
  }
  SUBCASE("equidistant keys average their values") {
    Matrix keys(2, 2);
    keys << 1, 0, -1, 0;
    Matrix values(2, 1);
    values << 2, 6;
    CHECK(soft_knn(keys, values, Row(Row::Zero(2)), 20.0)(0) == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("distances 0 and 1 at alpha 20") {
    Matrix keys(2, 1);
    keys << 0.5, 1.5;
    Row q(1);
    q << 0.5;
    const Row w = soft_knn_weights(keys, q, 20.0);
    const double tail = std::exp(-20.0) / (1 + std::exp(-20.0));
    CHECK(w(1) == doctest::Approx(tail).epsilon(1e-12));
    CHECK(w(1) == doctest::Approx(2.061e-9).epsilon(1e-3));
    CHECK(w(0) == doctest::Approx(1.0 / (1 + std::exp(-20.0))).epsilon(1e-15));
  }
  SUBCASE("errors") {
    Row q = Row::Zero(2);
    CHECK_THROWS_AS(soft_knn_weights(Matrix(0, 2), q, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(soft_knn_weights(Matrix(Matrix::Zero(1, 2)), q, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(soft_knn_weights(Matrix(Matrix::Zero(1, 2)), q, -1.0), std::invalid_argument);
  }
}

TEST_CASE("layer_normalize examples") {
  Matrix x(1, 3);
  x << 1, 2, 3;
  const Matrix y = layer_normalize(x);
  CHECK(y(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(std::abs(y(0, 1)) < 1e-12);
  CHECK(y(0, 2) == doctest::Approx(1.2247).epsilon(1e-4));
  CHECK((layer_normalize(y) - y).cwiseAbs().maxCoeff() < 1e-9);

  Matrix flat(1, 2);
  flat << 5, 5;
  CHECK(layer_normalize(flat).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(layer_normalize(Matrix(Matrix::Ones(2, 1))), ShapeError);

  std::mt19937_64 rng(1);
  const Matrix r = layer_normalize(random_matrix(10, 16, rng, -5, 5));
  for (Index i = 0; i < r.rows(); ++i) {
    CHECK(std::abs(r.row(i).mean()) < 1e-12);
    CHECK(std::sqrt(r.row(i).squaredNorm() / 16) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("attention weights are normalized on random instances") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> count(1, 12), dim(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = count(rng), d = dim(rng);
    const Matrix keys = random_matrix(n, d, rng, -3, 3);
    const Row q = to_row(random_matrix(1, d, rng, -3, 3));
    const Row w1 = dot_attention_weights(keys, q);
    const Row w2 = soft_knn_weights(keys, q, 20.0);
    CHECK(w1.minCoeff() >= 0.0);
    CHECK(w2.minCoeff() >= 0.0);
    CHECK(std::abs(w1.sum() - 1.0) < 1e-12);
    CHECK(std::abs(w2.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("soft_knn argmax approaches exact nearest neighbour") {
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix keys = random_matrix(20, 4, rng);
    const Row q = to_row(random_matrix(1, 4, rng));
    Index nearest = 0;
    (keys.rowwise() - q).rowwise().norm().minCoeff(&nearest);
    Index heaviest = 0;
    soft_knn_weights(keys, q, 1e4).maxCoeff(&heaviest);
    mismatches += nearest != heaviest;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("soft_knn is invariant to memory order") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix keys = random_matrix(7, 3, rng);
    const Matrix values = random_matrix(7, 4, rng);
    const Row q = to_row(random_matrix(1, 3, rng));
    std::vector<Index> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix pk(7, 3), pv(7, 4);
    for (Index i = 0; i < 7; ++i) {
      pk.row(i) = keys.row(perm[i]);
      pv.row(i) = values.row(perm[i]);
    }
    CHECK((soft_knn(keys, values, q, 20.0) - soft_knn(pk, pv, q, 20.0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("duplicated keys split their weight") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix keys = random_matrix(5, 3, rng);
    const Row q = to_row(random_matrix(1, 3, rng));
    Matrix dup(6, 3);
    dup.topRows(5) = keys;
    dup.row(5) = keys.row(2);
    const Row w = dot_attention_weights(keys, q);
    const Row wd = dot_attention_weights(dup, q);
    CHECK(std::abs(wd(2) - wd(5)) < 1e-15);
    // weight ratios depend only on key values
    CHECK(std::abs(wd(2) / wd(0) - w(2) / w(0)) < 1e-12 * (1 + w(2) / w(0)));
  }
}

TEST_CASE("transformer block") {
  std::mt19937_64 rng(21);
  const Index width = 16;
  ParameterStore store;
  AttentionBlock block("blk", width, 8, BlockMode::kResidualAdd);
  block.init(store, rng);
  for (const char* b : {"blk.ff1.bias", "blk.ff2.bias"}) store.value(b) = random_matrix(1, width, rng);

  SUBCASE("matches a scripted evaluation") {
    const Matrix z = random_matrix(4, width, rng, -2, 2);
    const Matrix memory = random_matrix(6, width, rng, -2, 2);
    Graph g(store);
    const NodeId out = block(g, g.input(z), g.input(memory));
    const Matrix expected = scripted_block(store, "blk", z, memory, true);
    CHECK((g.evaluate(out) - expected).cwiseAbs().maxCoeff() < 1e-10);

    AttentionBlock replace("blk", width, 8, BlockMode::kReplaceInput);
    Graph g2(store);
    const NodeId out2 = replace(g2, g2.input(z), g2.input(memory));
    CHECK((g2.evaluate(out2) - scripted_block(store, "blk", z, memory, false)).cwiseAbs().maxCoeff() <
          1e-10);
  }
  SUBCASE("single memory row forces unit weight") {
    const Matrix memory = random_matrix(1, width, rng);
    const Matrix lifted = memory * store.value("blk.value.weight") * store.value("blk.up.weight");
    for (int trial = 0; trial < 3; ++trial) {
      const Matrix z = random_matrix(2, width, rng, -3, 3);
      Graph g(store);
      const auto out = block.apply(g, g.input(z), g.input(memory), g.input(memory));
      g.evaluate(out.z_out);
      CHECK(g.value(out.weights)(0, 0) == 1.0);
      CHECK(g.value(out.weights)(1, 0) == 1.0);
      // readout is the lone value row lifted to the block width
      const Matrix z_star = scripted_normalize(z + lifted.replicate(2, 1));
      Matrix h = (z_star * store.value("blk.ff1.weight")).rowwise() + store.value("blk.ff1.bias").row(0);
      h = h.cwiseMax(0.0);
      const Matrix expected = scripted_normalize(
          z_star + (Matrix(h * store.value("blk.ff2.weight")).rowwise() + store.value("blk.ff2.bias").row(0)));
      CHECK((g.value(out.z_out) - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("zero weights reduce to normalization") {
    ParameterStore zero;
    block.init(zero, rng);
    for (auto& [name, e] : zero) e.value.setZero();
    const Matrix z = random_matrix(3, width, rng, -4, 4);
    Graph g(zero);
    const NodeId out = block(g, g.input(z), g.input(random_matrix(5, width, rng)));
    CHECK((g.evaluate(out) - layer_normalize(z)).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("width mismatch") {
    Graph g(store);
    CHECK_THROWS_AS(block(g, g.input(Matrix::Zero(2, 8)), g.input(Matrix::Zero(2, width))), ShapeError);
  }
}

TEST_CASE("attention layers pass gradient checks") {
  std::mt19937_64 rng(33);
  SUBCASE("soft-kNN, alpha 20, 5 memories, 24-d keys") {
    ParameterStore store;
    store.add("keys", random_matrix(5, 24, rng, -0.1, 0.1));
    store.add("values", random_matrix(5, 6, rng));
    store.add("query", random_matrix(2, 24, rng, -0.1, 0.1));
    const Matrix probe = random_matrix(2, 6, rng);
    auto build = [&](Graph& g) {
      const NodeId y = soft_knn(g, g.parameter("query"), g.parameter("keys"), g.parameter("values"), 20.0);
      return g.mean(g.mul(y, g.input(probe)));
    };
    const auto report = gradient_check<double>(store, build);
    CHECK_MESSAGE(report.max_relative_error < 1e-4, report.worst_parameter);
  }
  SUBCASE("dot attention") {
    ParameterStore store;
    store.add("keys", random_matrix(5, 8, rng));
    store.add("values", random_matrix(5, 3, rng));
    store.add("query", random_matrix(3, 8, rng));
    const Matrix probe = random_matrix(3, 3, rng);
    auto build = [&](Graph& g) {
      const NodeId y = dot_attention(g, g.parameter("query"), g.parameter("keys"), g.parameter("values"));
      return g.mean(g.mul(y, g.input(probe)));
    };
    CHECK(gradient_check<double>(store, build).max_relative_error < 1e-4);
  }
  SUBCASE("transformer block at width 16") {
    ParameterStore store;
    AttentionBlock block("blk", 16, 8, BlockMode::kResidualAdd);
    block.init(store, rng);
    const Matrix z = random_matrix(3, 16, rng);
    const Matrix memory = random_matrix(4, 16, rng);
    const Matrix probe = random_matrix(3, 16, rng);
    auto build = [&](Graph& g) {
      return g.mean(g.mul(block(g, g.input(z), g.input(memory)), g.input(probe)));
    };
    const auto report = gradient_check<double>(store, build);
    CHECK_MESSAGE(report.max_relative_error < 1e-4, report.worst_parameter << " " << report.max_relative_error);
  }
}
