#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "dptree/scaling.hpp"
#include "helpers.hpp"

using namespace dptree;
using testing::error_kind_of;
using testing::rel_diff;

namespace {

DiscreteMeasure two_point() { return DiscreteMeasure(2, {1.0, 0.0, 0.0, 1.0}, {0.5, 0.5}); }

DiscreteMeasure five_point() {
  return DiscreteMeasure(2, {0.3, 0.9, 0.5, 0.5, 0.8, 0.4, 0.6, 0.7, 0.95, 0.35}, {0.1, 0.15, 0.2, 0.25, 0.3});
}

const Kernel kRawIndicator{KernelKind::Indicator, false};
const Kernel kNormTriangle{KernelKind::Triangle, true};

DiscreteMeasure rotate(const DiscreteMeasure& m, const std::vector<double>& rot) {
  const std::size_t d = m.dim();
  std::vector<double> coords(m.coords().size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += rot[r * d + c] * m.point(i)[c];
      coords[i * d + r] = acc;
    }
  }
  return DiscreteMeasure(d, coords, {m.weights().begin(), m.weights().end()});
}

}  // namespace

TEST_SUITE("count") {

TEST_CASE("two-point hand example") {
  const auto m = two_point();
  const auto edge = path_tree(1);
  const auto gaps = GapSpec::scalar(0.0, 0.1, kRawIndicator);
  CHECK(naive_count(m, edge, gaps).value == doctest::Approx(0.5));
  CHECK(tree_dp_count(m, edge, gaps).value == doctest::Approx(0.5));
  CHECK(naive_count(m, edge, gaps.with_epsilon(0.1)).tuple_space_size == 4.0);
  CHECK(naive_count(m, edge, GapSpec::scalar(0.5, 0.1, kRawIndicator)).value == 0.0);
  CHECK(tree_dp_count(m, edge, GapSpec::scalar(0.5, 0.1, kRawIndicator)).value == 0.0);
  const auto tuples = enumerate_embeddings(m, edge, gaps);
  CHECK(tuples == std::vector<std::vector<std::size_t>>{{0, 1}, {1, 0}});
}

TEST_CASE("frozen brute-force values on a weighted five-point cloud") {
  const auto m = five_point();
  CHECK(rel_diff(tree_dp_count(m, path_tree(2), GapSpec::scalar(0.6, 0.1, kRawIndicator)).value, 0.2291250000000001) <
        1e-12);
  CHECK(rel_diff(tree_dp_count(m, star_tree(3), GapSpec::scalar(0.7, 0.15, kNormTriangle)).value, 9.76887860082303) <
        1e-12);
  CHECK(rel_diff(naive_count(m, path_tree(3), GapSpec::scalar(0.6, 0.2, kRawIndicator)).value, 0.16100000000000003) <
        1e-12);
}

TEST_CASE("single vertex counts total mass") {
  const auto m = uniform_cube_sample(30, 2, 0.3, 1);
  const auto gaps = GapSpec::scalar(0.5, 0.1);
  CHECK(tree_dp_count(m, Tree::single_vertex(), gaps).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(naive_count(m, Tree::single_vertex(), gaps).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("huge window passes every tuple") {
  const auto m = uniform_cube_sample(10, 2, 0.3, 2);
  const auto gaps = GapSpec::scalar(0.5, 100.0, kRawIndicator);
  for (const Tree& t : enumerate_small_trees(3)) {
    CHECK(naive_count(m, t, gaps).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tree_dp_count(m, t, gaps).value == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("naive and DP agree with an independent odometer") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto m = uniform_cube_sample(7, 2, 0.3, seed);
    const double t = select_interval(m, 0.35, 0.65, 2000, seed).midpoint();
    for (const Tree& tree : enumerate_small_trees(4)) {
      for (const Kernel& k : {kRawIndicator, kNormTriangle, Kernel{KernelKind::SmoothBump, true}}) {
        const auto gaps = GapSpec::scalar(t, 0.2, k);
        const double brute = testing::brute_force_count(m, tree, gaps);
        CHECK(rel_diff(naive_count(m, tree, gaps).value, brute) <= 1e-9);
        CHECK(rel_diff(tree_dp_count(m, tree, gaps).value, brute) <= 1e-9);
      }
    }
  }
}

TEST_CASE("per-edge targets") {
  const auto m = uniform_cube_sample(8, 2, 0.3, 9);
  const Tree tree = path_tree(2);
  const auto gaps = GapSpec::per_edge({{Edge{0, 1}, 0.55}, {Edge{2, 1}, 0.8}}, 0.2, kRawIndicator);
  CHECK(gaps.target(Edge{1, 2}) == 0.8);
  CHECK(rel_diff(tree_dp_count(m, tree, gaps).value, testing::brute_force_count(m, tree, gaps)) <= 1e-9);
  const auto missing = GapSpec::per_edge({{Edge{0, 1}, 0.55}}, 0.2);
  CHECK(error_kind_of([&] { missing.require_targets(tree); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { tree_dp_count(m, tree, missing); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("leaf order does not change the value") {
  const auto m = uniform_cube_sample(60, 2, 0.3, 4);
  for (const Tree& tree : enumerate_small_trees(5)) {
    const auto gaps = GapSpec::scalar(0.7, 0.1, kNormTriangle);
    const double base = tree_dp_count(m, tree, gaps).value;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      DpOptions o;
      o.leaf_order_seed = seed;
      CHECK(rel_diff(tree_dp_count(m, tree, gaps, o).value, base) <= 1e-9);
    }
  }
}

TEST_CASE("pruning and thread count leave the DP unchanged") {
  const auto m = uniform_cube_sample(300, 3, 0.3, 8);
  const auto gaps = GapSpec::scalar(1.1, 0.05, kRawIndicator);
  DpOptions plain;
  plain.pruning = false;
  plain.threads = 1;
  const double reference = tree_dp_count(m, path_tree(3), gaps, plain).value;
  for (unsigned threads : {1u, 2u, 4u}) {
    DpOptions o;
    o.threads = threads;
    CHECK(tree_dp_count(m, path_tree(3), gaps, o).value == doctest::Approx(reference).epsilon(1e-12));
  }
}

TEST_CASE("edge_sum pruning is sound and saves work") {
  const auto m = uniform_cube_sample(1000, 2, 0.3, 21);
  const double t = select_interval(m).median;
  VertexPotential f{std::vector<double>(m.size(), 1.0), 0};
  Rng rng(5);
  for (double& v : f.values) v = rng.uniform();
  for (const Kernel& k : {kRawIndicator, kNormTriangle}) {
    EdgeSumStats pruned_stats, full_stats;
    const auto pruned = edge_sum(m, f, t, 0.05, k, true, 0, &pruned_stats);
    const auto full = edge_sum(m, f, t, 0.05, k, false, 0, &full_stats);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(pruned.values[i] - full.values[i]) <= 1e-12);
    CHECK(pruned_stats.kernel_evals < full_stats.kernel_evals);
    CHECK(full_stats.kernel_evals == m.size() * m.size());
  }
}

TEST_CASE("edge_sum basics") {
  const auto m = uniform_cube_sample(50, 2, 0.3, 3);
  VertexPotential ones{std::vector<double>(m.size(), 1.0), 0};
  VertexPotential zeros{std::vector<double>(m.size(), 0.0), 0};
  const auto wide = edge_sum(m, ones, 0.5, 1e6, kRawIndicator, true);
  for (double v : wide.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const auto zero = edge_sum(m, zeros, 0.5, 0.1, kNormTriangle, true);
  for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("count is nondecreasing in epsilon for the raw indicator") {
  const auto m = uniform_cube_sample(80, 2, 0.3, 12);
  for (const Tree& tree : {path_tree(2), star_tree(3)}) {
    double prev = 0.0;
    for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2, 0.4}) {
      const double v = tree_dp_count(m, tree, GapSpec::scalar(0.8, eps, kRawIndicator)).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("rotation invariance") {
  const double a = 0.7;
  const std::vector<double> rot{std::cos(a), -std::sin(a), std::sin(a), std::cos(a)};
  const auto m = uniform_cube_sample(100, 2, 0.3, 31);
  const auto r = rotate(m, rot);
  for (const Kernel& k : {kRawIndicator, kNormTriangle}) {
    const auto gaps = GapSpec::scalar(0.8, 0.07, k);
    CHECK(rel_diff(tree_dp_count(r, path_tree(3), gaps).value, tree_dp_count(m, path_tree(3), gaps).value) <= 1e-9);
  }
}

TEST_CASE("scaling covariance") {
  const auto m = uniform_cube_sample(100, 2, 0.3, 32);
  for (double lambda : {0.5, 2.0, 8.0}) {
    std::vector<double> coords(m.coords().begin(), m.coords().end());
    for (double& x : coords) x *= lambda;
    const DiscreteMeasure s(2, coords, {m.weights().begin(), m.weights().end()});
    const double l2 = lambda * lambda;
    const double base = tree_dp_count(m, star_tree(3), GapSpec::scalar(0.8, 0.05, kRawIndicator)).value;
    CHECK(tree_dp_count(s, star_tree(3), GapSpec::scalar(0.8 * l2, 0.05 * l2, kRawIndicator)).value == base);
  }
}

TEST_CASE("naive cap") {
  const auto m = uniform_cube_sample(100, 2, 0.3, 1);
  CHECK(error_kind_of([&] { naive_count(m, path_tree(4), GapSpec::scalar(0.5, 0.1), 1e9); }) ==
        ErrorKind::TupleSpaceTooLarge);
  CHECK(error_kind_of([&] { naive_count(m, path_tree(1), GapSpec::scalar(0.5, 0.1), 100.0); }) ==
        ErrorKind::TupleSpaceTooLarge);
}

TEST_CASE("gap spec validation") {
  CHECK(error_kind_of([] { GapSpec::scalar(0.5, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { GapSpec::scalar(std::nan(""), 0.1); }) == ErrorKind::InvalidArgument);
  const auto g = GapSpec::scalar(0.5, 0.1, kNormTriangle);
  CHECK(g.is_scalar());
  CHECK(g.with_epsilon(0.2).epsilon() == 0.2);
}

TEST_CASE("enumeration agrees with the weighted count") {
  const auto m = uniform_cube_sample(20, 2, 0.3, 14);
  const double w = 1.0 / 20.0;
  for (const Tree& tree : enumerate_small_trees(3)) {
    const auto gaps = GapSpec::scalar(0.75, 0.08, kRawIndicator);
    const auto tuples = enumerate_embeddings(m, tree, gaps);
    const double count = naive_count(m, tree, gaps).value;
    CHECK(rel_diff(static_cast<double>(tuples.size()) * std::pow(w, static_cast<double>(tree.vertex_count())),
                   std::max(count, 1e-300)) <= 1e-9);
    CHECK(embedding_count(m, tree, gaps) == static_cast<double>(tuples.size()));
    for (const auto& tuple : tuples) {
      for (const auto& e : tree.edges()) CHECK(std::abs(m.dot(tuple[e.a], tuple[e.b]) - 0.75) < 0.08);
    }
  }
}

TEST_CASE("enumeration options") {
  const auto m = uniform_cube_sample(30, 2, 0.3, 15);
  const auto gaps = GapSpec::scalar(0.8, 0.3, kRawIndicator);
  EnumerateOptions small;
  small.cap = 5;
  CHECK(error_kind_of([&] { enumerate_embeddings(m, path_tree(2), gaps, small); }) == ErrorKind::OutputTooLarge);
  EnumerateOptions distinct;
  distinct.exclude_repeats = true;
  for (const auto& tuple : enumerate_embeddings(m, path_tree(2), gaps, distinct)) {
    CHECK(tuple[0] != tuple[1]);
    CHECK(tuple[1] != tuple[2]);
    CHECK(tuple[0] != tuple[2]);
  }
  CHECK(enumerate_embeddings(m, path_tree(2), GapSpec::scalar(0.8, 1e-15, kRawIndicator)).empty());
}

}  // TEST_SUITE
