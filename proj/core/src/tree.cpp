#include "dptree/tree.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "dptree/error.hpp"

namespace dptree {
namespace {

std::string edge_text(const Edge& e) {
  return "(" + std::to_string(e.a) + "," + std::to_string(e.b) + ")";
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Vertices reachable from `start` without passing through `blocked`.
std::vector<Vertex> component_without(const Tree& tree, Vertex start, Vertex blocked) {
  std::vector<Vertex> out{start};
  std::vector<bool> seen(tree.vertex_count(), false);
  seen[start] = true;
  seen[blocked] = true;
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (Vertex w : tree.neighbors(out[head])) {
      if (!seen[w]) {
        seen[w] = true;
        out.push_back(w);
      }
    }
  }
  return out;
}

std::string rooted_encoding(const Tree& tree, Vertex v, std::optional<Vertex> parent) {
  std::vector<std::string> children;
  for (Vertex w : tree.neighbors(v)) {
    if (parent && w == *parent) continue;
    children.push_back(rooted_encoding(tree, w, v));
  }
  std::sort(children.begin(), children.end());
  std::string out = "(";
  for (const auto& c : children) out += c;
  out += ")";
  return out;
}

std::vector<Vertex> centers(const Tree& tree) {
  const std::size_t n = tree.vertex_count();
  if (n <= 2) {
    std::vector<Vertex> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  std::vector<std::size_t> degree(n);
  std::vector<Vertex> layer;
  for (Vertex v = 0; v < n; ++v) {
    degree[v] = tree.degree(v);
    if (degree[v] == 1) layer.push_back(v);
  }
  std::size_t remaining = n;
  while (remaining > 2) {
    remaining -= layer.size();
    std::vector<Vertex> next;
    for (Vertex leaf : layer) {
      degree[leaf] = 0;
      for (Vertex w : tree.neighbors(leaf)) {
        if (degree[w] > 0 && --degree[w] == 1) next.push_back(w);
      }
    }
    layer = std::move(next);
  }
  std::sort(layer.begin(), layer.end());
  return layer;
}

}  // namespace

Tree Tree::validate(std::size_t vertex_count, std::vector<Edge> edges) {
  if (vertex_count == 0) fail(ErrorKind::InvalidArgument, "a tree needs at least one vertex");

  std::set<Edge> seen;
  DisjointSets sets(vertex_count);
  for (auto& e : edges) {
    if (e.a >= vertex_count || e.b >= vertex_count) {
      fail(ErrorKind::InvalidArgument,
           "edge " + edge_text(e) + " references a vertex outside 0.." + std::to_string(vertex_count - 1));
    }
    if (e.a == e.b) fail(ErrorKind::SelfLoop, "edge " + edge_text(e) + " is a self-loop at vertex " + std::to_string(e.a));
    e = e.normalized();
    if (!seen.insert(e).second) fail(ErrorKind::DuplicateEdge, "edge " + edge_text(e) + " appears twice");
    if (!sets.unite(e.a, e.b)) fail(ErrorKind::CycleDetected, "edge " + edge_text(e) + " closes a cycle");
  }
  if (edges.size() + 1 != vertex_count) {
    for (Vertex v = 1; v < vertex_count; ++v) {
      if (sets.find(v) != sets.find(0)) {
        fail(ErrorKind::Disconnected, "vertex " + std::to_string(v) + " is not reachable from vertex 0");
      }
    }
  }

  Tree tree;
  tree.edges_ = std::move(edges);
  tree.adjacency_.assign(vertex_count, {});
  for (const auto& e : tree.edges_) {
    tree.adjacency_[e.a].push_back(e.b);
    tree.adjacency_[e.b].push_back(e.a);
  }
  for (auto& list : tree.adjacency_) std::sort(list.begin(), list.end());
  return tree;
}

bool Tree::has_edge(Vertex u, Vertex v) const {
  if (u >= vertex_count() || v >= vertex_count()) return false;
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

std::optional<std::size_t> Tree::edge_index(Vertex u, Vertex v) const {
  if (!has_edge(u, v)) return std::nullopt;
  const Edge key = Edge{u, v}.normalized();
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i] == key) return i;
  }
  return std::nullopt;
}

std::vector<Vertex> leaves(const Tree& tree) {
  std::vector<Vertex> out;
  for (Vertex v = 0; v < tree.vertex_count(); ++v) {
    if (tree.degree(v) == 1) out.push_back(v);
  }
  return out;
}

RipResult rip_leaf(const Tree& tree, Vertex leaf) {
  if (leaf >= tree.vertex_count() || tree.degree(leaf) != 1) {
    fail(ErrorKind::NotALeaf, "vertex " + std::to_string(leaf) + " is not a leaf");
  }
  const Vertex anchor = tree.neighbors(leaf).front();

  std::vector<std::optional<Vertex>> relabel(tree.vertex_count());
  Vertex next = 0;
  for (Vertex v = 0; v < tree.vertex_count(); ++v) {
    if (v != leaf) relabel[v] = next++;
  }
  std::vector<Edge> edges;
  edges.reserve(tree.edge_count() - 1);
  for (const auto& e : tree.edges()) {
    if (e.touches(leaf)) continue;
    edges.push_back({*relabel[e.a], *relabel[e.b]});
  }
  return {Tree::validate(tree.vertex_count() - 1, std::move(edges)), Edge{anchor, leaf}, std::move(relabel)};
}

CollapseResult collapse_neighbors(const Tree& tree, Vertex u) {
  if (u >= tree.vertex_count()) fail(ErrorKind::InvalidArgument, "vertex " + std::to_string(u) + " out of range");
  if (tree.degree(u) == 0) fail(ErrorKind::IsolatedVertex, "vertex " + std::to_string(u) + " has no neighbors");
  if (tree.degree(u) == 1) fail(ErrorKind::IsLeaf, "vertex " + std::to_string(u) + " is a leaf");

  const auto nbrs = tree.neighbors(u);
  const Vertex first_neighbor = nbrs.front();
  auto is_neighbor = [&](Vertex v) { return std::binary_search(nbrs.begin(), nbrs.end(), v); };

  std::vector<Vertex> map(tree.vertex_count());
  Vertex next = 0;
  Vertex hub = 0;
  for (Vertex v = 0; v < tree.vertex_count(); ++v) {
    if (v == first_neighbor) {
      hub = next;
      map[v] = next++;
    } else if (is_neighbor(v)) {
      map[v] = hub;  // first_neighbor < v, so hub is already assigned
    } else {
      map[v] = next++;
    }
  }

  std::vector<Edge> edges;
  bool pivot_attached = false;
  for (const auto& e : tree.edges()) {
    if (e.touches(u)) {
      if (!pivot_attached) {
        edges.push_back({map[u], hub});
        pivot_attached = true;
      }
      continue;
    }
    edges.push_back({map[e.a], map[e.b]});
  }
  const Vertex pivot_image = map[u];
  return {Tree::validate(next, std::move(edges)), std::move(map), pivot_image, hub};
}

std::string_view to_string(PivotPolicy policy) noexcept {
  switch (policy) {
    case PivotPolicy::MaxDegree: return "max-degree";
    case PivotPolicy::FirstInternal: return "first-internal";
  }
  return "unknown";
}

PivotPolicy parse_pivot_policy(std::string_view name) {
  if (name == "max-degree") return PivotPolicy::MaxDegree;
  if (name == "first-internal") return PivotPolicy::FirstInternal;
  fail(ErrorKind::InvalidArgument, "unknown pivot policy '" + std::string(name) + "'");
}

Vertex choose_pivot(const Tree& tree, PivotPolicy policy) {
  std::optional<Vertex> best;
  for (Vertex v = 0; v < tree.vertex_count(); ++v) {
    if (tree.degree(v) < 2) continue;
    if (policy == PivotPolicy::FirstInternal) return v;
    if (!best || tree.degree(v) > tree.degree(*best)) best = v;
  }
  if (!best) fail(ErrorKind::InvalidArgument, "tree has no internal vertex to pivot on");
  return *best;
}

bool EmbeddingCertificate::verify(const Tree& source, const Tree& target) const {
  if (vertex_map.size() != source.vertex_count() || edge_map.size() != source.edge_count()) return false;
  std::vector<bool> used(target.vertex_count(), false);
  for (Vertex image : vertex_map) {
    if (image >= target.vertex_count() || used[image]) return false;
    used[image] = true;
  }
  for (std::size_t i = 0; i < source.edge_count(); ++i) {
    const Edge& e = source.edge(i);
    if (edge_map[i] >= target.edge_count()) return false;
    const Edge expected = Edge{vertex_map[e.a], vertex_map[e.b]}.normalized();
    if (target.edge(edge_map[i]) != expected) return false;
  }
  return true;
}

CoverResult symmetric_cover(const Tree& tree, PivotPolicy policy) {
  if (tree.edge_count() == 0) fail(ErrorKind::InvalidArgument, "symmetric cover needs at least one edge");

  if (tree.edge_count() == 1) {
    EmbeddingCertificate identity;
    identity.vertex_map = {0, 1};
    identity.edge_map = {0};
    return {tree, std::move(identity)};
  }

  const Vertex pivot = choose_pivot(tree, policy);
  const CollapseResult collapsed = collapse_neighbors(tree, pivot);
  const CoverResult inner = symmetric_cover(collapsed.tree, policy);
  const Tree& piece = inner.cover;
  const Vertex joint = inner.certificate.vertex_map[collapsed.pivot];
  const std::size_t copies = tree.degree(pivot);
  const std::size_t piece_size = piece.vertex_count();

  // Vertex 0 is the shared joint; copy c owns labels 1 + c*(piece_size-1) ...
  auto image = [&](std::size_t copy, Vertex s) -> Vertex {
    if (s == joint) return 0;
    return 1 + copy * (piece_size - 1) + (s < joint ? s : s - 1);
  };

  std::vector<Edge> edges;
  edges.reserve(copies * piece.edge_count());
  for (std::size_t c = 0; c < copies; ++c) {
    for (const auto& e : piece.edges()) edges.push_back({image(c, e.a), image(c, e.b)});
  }
  Tree cover = Tree::validate(1 + copies * (piece_size - 1), std::move(edges));

  EmbeddingCertificate cert;
  cert.vertex_map.assign(tree.vertex_count(), 0);
  cert.vertex_map[pivot] = 0;
  const auto nbrs = tree.neighbors(pivot);
  for (std::size_t c = 0; c < nbrs.size(); ++c) {
    for (Vertex x : component_without(tree, nbrs[c], pivot)) {
      cert.vertex_map[x] = image(c, inner.certificate.vertex_map[collapsed.vertex_map[x]]);
    }
  }
  cert.edge_map.reserve(tree.edge_count());
  for (const auto& e : tree.edges()) {
    const auto idx = cover.edge_index(cert.vertex_map[e.a], cert.vertex_map[e.b]);
    if (!idx) fail(ErrorKind::InvalidArgument, "internal: cover lost edge " + edge_text(e));
    cert.edge_map.push_back(*idx);
  }
  return {std::move(cover), std::move(cert)};
}

std::string canonical_form(const Tree& tree) {
  std::string best;
  for (Vertex c : centers(tree)) {
    std::string enc = rooted_encoding(tree, c, std::nullopt);
    if (best.empty() || enc < best) best = std::move(enc);
  }
  return best;
}

bool isomorphic(const Tree& lhs, const Tree& rhs) {
  return lhs.vertex_count() == rhs.vertex_count() && canonical_form(lhs) == canonical_form(rhs);
}

std::vector<Tree> enumerate_small_trees(std::size_t max_edges) {
  if (max_edges > 8) fail(ErrorKind::TooLarge, "enumeration is limited to 8 edges, got " + std::to_string(max_edges));

  std::vector<Tree> out;
  if (max_edges == 0) return out;

  std::map<std::string, Tree> layer;
  const Tree edge = path_tree(1);
  layer.emplace(canonical_form(edge), edge);
  for (std::size_t k = 1;; ++k) {
    for (const auto& [key, t] : layer) out.push_back(t);
    if (k == max_edges) break;
    std::map<std::string, Tree> next;
    for (const auto& [key, t] : layer) {
      for (Vertex v = 0; v < t.vertex_count(); ++v) {
        std::vector<Edge> edges(t.edges().begin(), t.edges().end());
        edges.push_back({v, t.vertex_count()});
        Tree grown = Tree::validate(t.vertex_count() + 1, std::move(edges));
        next.try_emplace(canonical_form(grown), std::move(grown));
      }
    }
    layer = std::move(next);
  }
  return out;
}

Tree path_tree(std::size_t edges) {
  std::vector<Edge> list;
  for (Vertex v = 0; v < edges; ++v) list.push_back({v, v + 1});
  return Tree::validate(edges + 1, std::move(list));
}

Tree star_tree(std::size_t edges) {
  std::vector<Edge> list;
  for (Vertex v = 1; v <= edges; ++v) list.push_back({0, v});
  return Tree::validate(edges + 1, std::move(list));
}

Tree relabel(const Tree& tree, std::span<const Vertex> perm) {
  if (perm.size() != tree.vertex_count()) fail(ErrorKind::InvalidArgument, "permutation size mismatch");
  std::vector<Edge> edges;
  for (const auto& e : tree.edges()) edges.push_back({perm[e.a], perm[e.b]});
  return Tree::validate(tree.vertex_count(), std::move(edges));
}

}  // namespace dptree
