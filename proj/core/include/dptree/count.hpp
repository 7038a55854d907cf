#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dptree/kernel.hpp"
#include "dptree/measure.hpp"
#include "dptree/tree.hpp"

namespace dptree {

class DotProductGrid;

/// Per-edge dot-product targets, window width and kernel.
class GapSpec {
 public:
  /// Same target t on every edge.
  static GapSpec scalar(double t, double epsilon, Kernel kernel = {});
  /// Targets keyed by edge (orientation is ignored).
  static GapSpec per_edge(std::map<Edge, double> targets, double epsilon, Kernel kernel = {});

  double epsilon() const noexcept { return epsilon_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  bool is_scalar() const noexcept { return scalar_.has_value(); }
  std::optional<double> scalar_target() const noexcept { return scalar_; }
  const std::map<Edge, double>& edge_targets() const noexcept { return targets_; }

  double target(const Edge& edge) const;
  /// Throws InvalidArgument when some edge of the tree has no target.
  void require_targets(const Tree& tree) const;

  GapSpec with_epsilon(double epsilon) const;

 private:
  GapSpec(std::optional<double> scalar, std::map<Edge, double> targets, double epsilon, Kernel kernel);

  std::optional<double> scalar_;
  std::map<Edge, double> targets_;
  double epsilon_;
  Kernel kernel_;
};

/// Function on the atoms of a measure: the leaf-ripping potential of a
/// subtree pinned at one vertex.
struct VertexPotential {
  std::vector<double> values;
  Vertex pinned_vertex = 0;
};

enum class CountMethod { Oracle, TreeDp };
std::string_view to_string(CountMethod method) noexcept;

struct CountResult {
  double value = 0.0;
  CountMethod method = CountMethod::TreeDp;
  double tuple_space_size = 0.0;  ///< n^(k+1)
  std::uint64_t kernel_evals = 0;
  double elapsed_seconds = 0.0;
};

inline constexpr double kDefaultKernelEvalCap = 1e9;

/// Brute-force sum over every ordered (k+1)-tuple of atoms of
/// prod(weights) * prod(edge kernels). Refuses tuple spaces above `cap`.
CountResult naive_count(const DiscreteMeasure& measure, const Tree& tree, const GapSpec& gaps,
                        double cap = kDefaultKernelEvalCap);

struct DpOptions {
  bool pruning = true;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  /// When set, each rip picks a uniformly random current leaf; otherwise the
  /// largest-index leaf is ripped first.
  std::optional<std::uint64_t> leaf_order_seed;
};

/// Computes the same sum as naive_count by repeatedly ripping a leaf y with
/// neighbor x and folding sum_y w_y f(y) K(x.y - t) into x's potential.
/// Cost is O(k n^2) kernel evaluations without pruning.
CountResult tree_dp_count(const DiscreteMeasure& measure, const Tree& tree, const GapSpec& gaps,
                          const DpOptions& options = {});

struct EdgeSumStats {
  std::uint64_t kernel_evals = 0;
};

/// out(x) = sum_y w_y f(y) K(x.y - t) for every atom x. With pruning the sum
/// only visits atoms in grid cells that can reach the window.
VertexPotential edge_sum(const DiscreteMeasure& measure, const VertexPotential& f, double t, double epsilon,
                         const Kernel& kernel, bool pruning, unsigned threads = 0,
                         EdgeSumStats* stats = nullptr);

struct EnumerateOptions {
  std::size_t cap = 1'000'000;
  bool exclude_repeats = false;  ///< drop tuples that reuse an atom
};

/// Ordered tuples (tuple[v] = atom index for tree vertex v) with
/// |x_i.x_j - t_ij| < eps on every edge, lexicographic in vertex-BFS order.
std::vector<std::vector<std::size_t>> enumerate_embeddings(const DiscreteMeasure& measure, const Tree& tree,
                                                           const GapSpec& gaps, const EnumerateOptions& options = {});

/// Number of tuples enumerate_embeddings would return (with repeats), computed
/// exactly by the same elimination with unit weights.
double embedding_count(const DiscreteMeasure& measure, const Tree& tree, const GapSpec& gaps, bool pruning = true,
                       unsigned threads = 0);

}  // namespace dptree
