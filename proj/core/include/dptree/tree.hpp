#pragma once

#include <cstddef>
#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dptree {

using Vertex = std::size_t;

/// Undirected edge. Trees store their edges normalized (a < b).
struct Edge {
  Vertex a = 0;
  Vertex b = 0;

  Edge normalized() const noexcept { return a < b ? Edge{a, b} : Edge{b, a}; }
  Vertex other(Vertex v) const noexcept { return v == a ? b : a; }
  bool touches(Vertex v) const noexcept { return a == v || b == v; }

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Finite tree on vertices 0..vertex_count-1. Instances are only produced by
/// `Tree::validate` and the tree transforms below, so every Tree is connected,
/// acyclic and simple.
class Tree {
 public:
  /// Checks that the input is a connected acyclic simple graph. Errors name the
  /// offending edge or vertex.
  static Tree validate(std::size_t vertex_count, std::vector<Edge> edges);

  /// The tree with one vertex and no edges.
  static Tree single_vertex() { return validate(1, {}); }

  std::size_t vertex_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t index) const { return edges_.at(index); }

  std::size_t degree(Vertex v) const { return adjacency_.at(v).size(); }
  /// Neighbors of v, ascending.
  std::span<const Vertex> neighbors(Vertex v) const { return adjacency_.at(v); }

  bool has_edge(Vertex u, Vertex v) const;
  /// Index into edges() of the edge {u, v}, if present.
  std::optional<std::size_t> edge_index(Vertex u, Vertex v) const;

  friend bool operator==(const Tree& lhs, const Tree& rhs) {
    return lhs.edges_ == rhs.edges_ && lhs.adjacency_.size() == rhs.adjacency_.size();
  }

 private:
  Tree() = default;

  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adjacency_;
};

/// Degree-1 vertices in ascending order. The single-vertex tree has none.
std::vector<Vertex> leaves(const Tree& tree);

struct RipResult {
  Tree tree;
  /// The removed edge in the input's labels, oriented (neighbor, leaf).
  Edge removed;
  /// relabel[v] is v's label in the smaller tree; empty for the ripped leaf.
  std::vector<std::optional<Vertex>> relabel;
};

/// Removes a leaf and its edge, relabeling the remaining vertices
/// contiguously while preserving their relative order.
RipResult rip_leaf(const Tree& tree, Vertex leaf);

struct CollapseResult {
  Tree tree;
  /// Map from vertices of the input to vertices of the collapsed tree; all
  /// neighbors of the pivot share one image.
  std::vector<Vertex> vertex_map;
  Vertex pivot = 0;  ///< image of the pivot (a leaf of the result)
  Vertex hub = 0;    ///< image of the merged neighbors
};

/// Identifies every neighbor of `u` into a single vertex w and reattaches u to
/// w by one edge. The result has k - deg(u) + 1 edges.
CollapseResult collapse_neighbors(const Tree& tree, Vertex u);

enum class PivotPolicy {
  MaxDegree,      ///< highest degree, ties to the smallest index
  FirstInternal,  ///< smallest-index vertex with degree >= 2
};

std::string_view to_string(PivotPolicy policy) noexcept;
PivotPolicy parse_pivot_policy(std::string_view name);

Vertex choose_pivot(const Tree& tree, PivotPolicy policy);

/// Witness that a tree T is a subtree of a cover S.
struct EmbeddingCertificate {
  std::vector<Vertex> vertex_map;     ///< T vertex -> S vertex, injective
  std::vector<std::size_t> edge_map;  ///< T edge index -> S edge index

  /// Checks injectivity and that every T edge lands on the recorded S edge.
  bool verify(const Tree& source, const Tree& target) const;
};

struct CoverResult {
  Tree cover;
  EmbeddingCertificate certificate;
};

/// Symmetric tree cover: a tree containing `tree` built by recursively
/// collapsing the pivot's neighborhood and joining deg(pivot) copies of the
/// smaller cover at the pivot's image.
CoverResult symmetric_cover(const Tree& tree, PivotPolicy policy = PivotPolicy::MaxDegree);

/// Canonical string of the unlabeled tree (center-rooted sorted-subtree
/// encoding). Equal strings iff isomorphic.
std::string canonical_form(const Tree& tree);
bool isomorphic(const Tree& lhs, const Tree& rhs);

/// All non-isomorphic trees with 1..max_edges edges, ordered by edge count and
/// then canonical form. max_edges is limited to 8.
std::vector<Tree> enumerate_small_trees(std::size_t max_edges);

/// Path with `edges` edges: 0-1-...-edges.
Tree path_tree(std::size_t edges);
/// Star with center 0 and leaves 1..edges.
Tree star_tree(std::size_t edges);

/// Applies a vertex permutation (perm[old] = new).
Tree relabel(const Tree& tree, std::span<const Vertex> perm);

}  // namespace dptree
