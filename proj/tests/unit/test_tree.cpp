#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"

using namespace dptree;
using testing::error_kind_of;
using testing::error_message_of;

TEST_SUITE("tree") {

TEST_CASE("validate accepts paths and stars") {
  const Tree p = Tree::validate(4, {{0, 1}, {1, 2}, {2, 3}});
  CHECK(p.vertex_count() == 4);
  CHECK(p.edge_count() == 3);
  CHECK(p.degree(1) == 2);
  CHECK(leaves(p) == std::vector<Vertex>{0, 3});
  CHECK(p == path_tree(3));

  const Tree s = star_tree(4);
  CHECK(s.degree(0) == 4);
  CHECK(leaves(s).size() == 4);
}

TEST_CASE("validate normalizes edge orientation") {
  const Tree t = Tree::validate(3, {{1, 0}, {2, 1}});
  CHECK(t.edge(0) == Edge{0, 1});
  CHECK(t.edge(1) == Edge{1, 2});
  CHECK(t.has_edge(1, 0));
  CHECK(t.edge_index(2, 1) == std::optional<std::size_t>{1});
}

TEST_CASE("validate rejects malformed graphs") {
  CHECK(error_kind_of([] { Tree::validate(3, {{0, 1}, {1, 2}, {2, 0}}); }) == ErrorKind::CycleDetected);
  CHECK(error_message_of([] { Tree::validate(3, {{0, 1}, {1, 2}, {2, 0}}); }).find("(0,2)") != std::string::npos);
  CHECK(error_kind_of([] { Tree::validate(4, {{0, 1}, {2, 3}}); }) == ErrorKind::Disconnected);
  CHECK(error_kind_of([] { Tree::validate(2, {{1, 1}}); }) == ErrorKind::SelfLoop);
  CHECK(error_kind_of([] { Tree::validate(2, {{0, 1}, {1, 0}}); }) == ErrorKind::DuplicateEdge);
  CHECK(error_kind_of([] { Tree::validate(2, {{0, 5}}); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { Tree::validate(0, {}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("rip_leaf removes one leaf edge") {
  const RipResult r = rip_leaf(path_tree(2), 2);
  CHECK(r.tree == path_tree(1));
  CHECK(r.removed == Edge{1, 2});

  const RipResult first = rip_leaf(path_tree(3), 0);
  CHECK(isomorphic(first.tree, path_tree(2)));
  CHECK(first.removed == Edge{1, 0});
  CHECK_FALSE(first.relabel[0].has_value());
  CHECK(first.relabel[1] == std::optional<Vertex>{0});

  CHECK(error_kind_of([] { rip_leaf(path_tree(2), 1); }) == ErrorKind::NotALeaf);
}

TEST_CASE("rip_leaf on a single edge leaves one vertex") {
  const RipResult r = rip_leaf(path_tree(1), 1);
  CHECK(r.tree.vertex_count() == 1);
  CHECK(r.tree.edge_count() == 0);
}

TEST_CASE("collapse_neighbors merges the pivot's neighborhood") {
  // P4 collapsed at vertex 1: neighbors 0 and 2 merge into one hub.
  const CollapseResult c = collapse_neighbors(path_tree(3), 1);
  CHECK(c.tree.edge_count() == 3 - 2 + 1);
  CHECK(c.tree.degree(c.pivot) == 1);
  CHECK(c.vertex_map[0] == c.hub);
  CHECK(c.vertex_map[2] == c.hub);
  CHECK(c.tree.has_edge(c.pivot, c.hub));

  CHECK(error_kind_of([] { collapse_neighbors(path_tree(2), 0); }) == ErrorKind::IsLeaf);
  CHECK(error_kind_of([] { collapse_neighbors(Tree::single_vertex(), 0); }) == ErrorKind::IsolatedVertex);
}

TEST_CASE("pivot policies") {
  const Tree t = Tree::validate(6, {{0, 1}, {1, 2}, {2, 3}, {2, 4}, {2, 5}});
  CHECK(choose_pivot(t, PivotPolicy::MaxDegree) == 2);
  CHECK(choose_pivot(t, PivotPolicy::FirstInternal) == 1);
  CHECK(parse_pivot_policy("first-internal") == PivotPolicy::FirstInternal);
  CHECK(to_string(PivotPolicy::MaxDegree) == "max-degree");
  CHECK(error_kind_of([] { parse_pivot_policy("random"); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("symmetric cover of small trees") {
  CHECK(isomorphic(symmetric_cover(path_tree(1)).cover, path_tree(1)));
  CHECK(isomorphic(symmetric_cover(path_tree(2)).cover, path_tree(2)));
  CHECK(isomorphic(symmetric_cover(star_tree(3)).cover, star_tree(3)));
  CHECK(isomorphic(symmetric_cover(path_tree(3)).cover, path_tree(4)));
  CHECK(error_kind_of([] { symmetric_cover(Tree::single_vertex()); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("stars are fixed points and other trees grow") {
  for (std::size_t k = 1; k <= 6; ++k) CHECK(isomorphic(symmetric_cover(star_tree(k)).cover, star_tree(k)));
  for (const Tree& t : enumerate_small_trees(7)) {
    const bool is_star = isomorphic(t, star_tree(t.edge_count()));
    for (PivotPolicy policy : {PivotPolicy::MaxDegree, PivotPolicy::FirstInternal}) {
      const CoverResult c = symmetric_cover(t, policy);
      CHECK(c.certificate.verify(t, c.cover));
      if (is_star) {
        CHECK(c.cover.edge_count() == t.edge_count());
      } else {
        CHECK(c.cover.edge_count() > t.edge_count());
      }
    }
  }
}

TEST_CASE("cover certificate holds after random relabeling") {
  Rng rng(11);
  for (const Tree& t : enumerate_small_trees(6)) {
    std::vector<Vertex> perm(t.vertex_count());
    std::iota(perm.begin(), perm.end(), Vertex{0});
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    const Tree shuffled = relabel(t, perm);
    CHECK(isomorphic(shuffled, t));
    const CoverResult c = symmetric_cover(shuffled);
    CHECK(c.certificate.verify(shuffled, c.cover));
    // The max-degree pivot may land on a different orbit after relabeling,
    // so only the size class is compared.
    CHECK(c.cover.edge_count() >= t.edge_count());
  }
}

TEST_CASE("certificate rejects a wrong map") {
  const Tree t = path_tree(3);
  CoverResult c = symmetric_cover(t);
  REQUIRE(c.certificate.verify(t, c.cover));
  std::swap(c.certificate.vertex_map[0], c.certificate.vertex_map[3]);
  c.certificate.vertex_map[1] = c.certificate.vertex_map[0];
  CHECK_FALSE(c.certificate.verify(t, c.cover));
}

TEST_CASE("canonical form separates non-isomorphic trees") {
  CHECK(canonical_form(path_tree(3)) != canonical_form(star_tree(3)));
  CHECK(canonical_form(Tree::validate(4, {{0, 3}, {3, 1}, {1, 2}})) == canonical_form(path_tree(3)));
}

TEST_CASE("enumeration matches the unlabeled tree counts") {
  // Unlabeled trees on n = 2..9 vertices: 1, 1, 2, 3, 6, 11, 23, 47.
  const std::size_t expected[] = {1, 1, 2, 3, 6, 11, 23, 47};
  std::size_t cumulative = 0;
  for (std::size_t k = 1; k <= 8; ++k) {
    cumulative += expected[k - 1];
    const auto trees = enumerate_small_trees(k);
    CHECK(trees.size() == cumulative);
    std::set<std::string> forms;
    for (const auto& t : trees) forms.insert(canonical_form(t));
    CHECK(forms.size() == trees.size());
  }
  CHECK(error_kind_of([] { enumerate_small_trees(9); }) == ErrorKind::TooLarge);
}

}  // TEST_SUITE
