#include "dptree/count.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "dptree/dot_grid.hpp"
#include "dptree/error.hpp"
#include "dptree/numeric.hpp"

namespace dptree {
namespace {

constexpr double kNormalizationTolerance = 1e-9;

// Kernel with the per-call constants hoisted out of the inner loops.
struct KernelFn {
  KernelKind kind;
  double epsilon;
  double inv_epsilon;
  double scale;

  KernelFn(const Kernel& kernel, double eps)
      : kind(kernel.kind),
        epsilon(eps),
        inv_epsilon(1.0 / eps),
        scale(kernel.normalized ? 1.0 / raw_mass(kernel.kind, eps) : 1.0) {}

  double operator()(double u) const noexcept {
    const double a = u < 0.0 ? -u : u;
    if (!(a < epsilon)) return 0.0;
    switch (kind) {
      case KernelKind::Indicator: return scale;
      case KernelKind::Triangle: return scale * (1.0 - a * inv_epsilon);
      case KernelKind::SmoothBump: {
        const double v = a * inv_epsilon;
        return scale * std::exp(1.0 - 1.0 / (1.0 - v * v));
      }
    }
    return 0.0;
  }
};

// out(x) = sum_y coeff[y] * K(x.y - t), pairwise-summed in a fixed order per x.
std::vector<double> accumulate_edge(const DiscreteMeasure& measure, std::span<const double> coeff, double t,
                                    const KernelFn& kernel, const DotProductGrid* grid, unsigned threads,
                                    std::uint64_t& evals) {
  const std::size_t n = measure.size();
  std::vector<double> out(n, 0.0);
  std::vector<std::uint64_t> evals_per_x(n, 0);
  const double lo = t - kernel.epsilon;
  const double hi = t + kernel.epsilon;

  parallel_for(n, threads, [&](std::size_t x) {
    thread_local std::vector<double> terms;
    terms.clear();
    const auto px = measure.point(x);
    if (grid) {
      grid->for_each_candidate(px, lo, hi, [&](std::size_t y, double dot) {
        terms.push_back(coeff[y] * kernel(dot - t));
      });
    } else {
      terms.resize(n);
      for (std::size_t y = 0; y < n; ++y) terms[y] = coeff[y] * kernel(measure.dot(x, y) - t);
    }
    evals_per_x[x] = terms.size();
    out[x] = pairwise_sum(terms);
  });
  for (auto e : evals_per_x) evals += e;
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Vertices in BFS order from 0 with parent links (parent of the root is itself).
struct BfsOrder {
  std::vector<Vertex> order;
  std::vector<Vertex> parent;
};

BfsOrder bfs_order(const Tree& tree) {
  BfsOrder bfs;
  bfs.parent.assign(tree.vertex_count(), 0);
  std::vector<bool> seen(tree.vertex_count(), false);
  bfs.order.push_back(0);
  seen[0] = true;
  for (std::size_t head = 0; head < bfs.order.size(); ++head) {
    const Vertex v = bfs.order[head];
    for (Vertex w : tree.neighbors(v)) {
      if (seen[w]) continue;
      seen[w] = true;
      bfs.parent[w] = v;
      bfs.order.push_back(w);
    }
  }
  return bfs;
}

// Bottom-up messages toward vertex 0 with unit coefficients and the raw
// indicator: completions[v][p] = number of ways to embed v's subtree with v at p.
std::vector<std::vector<double>> subtree_completions(const DiscreteMeasure& measure, const Tree& tree,
                                                     const GapSpec& gaps, const BfsOrder& bfs, bool pruning,
                                                     unsigned threads) {
  const std::size_t n = measure.size();
  std::vector<std::vector<double>> completions(tree.vertex_count(), std::vector<double>(n, 1.0));
  const KernelFn indicator(Kernel{KernelKind::Indicator, false}, gaps.epsilon());
  std::optional<DotProductGrid> grid;
  if (pruning) grid.emplace(measure, gaps.epsilon());
  std::uint64_t evals = 0;
  for (std::size_t i = bfs.order.size(); i-- > 1;) {
    const Vertex v = bfs.order[i];
    const Vertex p = bfs.parent[v];
    const auto message = accumulate_edge(measure, completions[v], gaps.target({p, v}), indicator,
                                         grid ? &*grid : nullptr, threads, evals);
    for (std::size_t x = 0; x < n; ++x) completions[p][x] *= message[x];
  }
  return completions;
}

}  // namespace

GapSpec::GapSpec(std::optional<double> scalar, std::map<Edge, double> targets, double epsilon, Kernel kernel)
    : scalar_(scalar), targets_(std::move(targets)), epsilon_(epsilon), kernel_(kernel) {
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (scalar_ && !std::isfinite(*scalar_)) fail(ErrorKind::InvalidArgument, "target must be finite");
  for (const auto& [edge, t] : targets_) {
    if (!std::isfinite(t)) fail(ErrorKind::InvalidArgument, "edge targets must be finite");
  }
  if (kernel_.normalized) {
    const double area = integrate_kernel(kernel_, epsilon_);
    if (std::abs(area - 1.0) > kNormalizationTolerance) {
      fail(ErrorKind::InvalidArgument, "normalized " + describe(kernel_) + " integrates to " + std::to_string(area));
    }
  }
}

GapSpec GapSpec::scalar(double t, double epsilon, Kernel kernel) { return GapSpec(t, {}, epsilon, kernel); }

GapSpec GapSpec::per_edge(std::map<Edge, double> targets, double epsilon, Kernel kernel) {
  std::map<Edge, double> normalized;
  for (const auto& [edge, t] : targets) normalized[edge.normalized()] = t;
  return GapSpec(std::nullopt, std::move(normalized), epsilon, kernel);
}

double GapSpec::target(const Edge& edge) const {
  if (scalar_) return *scalar_;
  const auto it = targets_.find(edge.normalized());
  if (it == targets_.end()) {
    const Edge e = edge.normalized();
    fail(ErrorKind::InvalidArgument, "no target for edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")");
  }
  return it->second;
}

void GapSpec::require_targets(const Tree& tree) const {
  for (const auto& e : tree.edges()) (void)target(e);
}

GapSpec GapSpec::with_epsilon(double epsilon) const { return GapSpec(scalar_, targets_, epsilon, kernel_); }

std::string_view to_string(CountMethod method) noexcept {
  return method == CountMethod::Oracle ? "oracle" : "tree_dp";
}

CountResult naive_count(const DiscreteMeasure& measure, const Tree& tree, const GapSpec& gaps, double cap) {
  gaps.require_targets(tree);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = measure.size();
  const std::size_t vertices = tree.vertex_count();
  const double space = std::pow(static_cast<double>(n), static_cast<double>(vertices));
  if (space > cap) {
    fail(ErrorKind::TupleSpaceTooLarge,
         "tuple space " + std::to_string(space) + " exceeds cap " + std::to_string(cap));
  }

  const BfsOrder bfs = bfs_order(tree);
  const KernelFn kernel(gaps.kernel(), gaps.epsilon());
  std::vector<double> targets(vertices, 0.0);
  for (std::size_t i = 1; i < vertices; ++i) {
    targets[i] = gaps.target({bfs.parent[bfs.order[i]], bfs.order[i]});
  }

  std::vector<std::size_t> assigned(vertices, 0);
  std::uint64_t evals = 0;
  // Nested sum over depth i of the BFS order; zero partial products are exact zeros.
  std::function<double(std::size_t)> sum_from = [&](std::size_t i) -> double {
    if (i == vertices) return 1.0;
    const Vertex v = bfs.order[i];
    double acc = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      double factor = measure.weight(p);
      if (i > 0) {
        ++evals;
        factor *= kernel(measure.dot(assigned[bfs.parent[v]], p) - targets[i]);
      }
      if (factor == 0.0) continue;
      assigned[v] = p;
      acc += factor * sum_from(i + 1);
    }
    return acc;
  };

  CountResult result;
  result.value = sum_from(0);
  result.method = CountMethod::Oracle;
  result.tuple_space_size = space;
  result.kernel_evals = evals;
  result.elapsed_seconds = seconds_since(start);
  return result;
}

VertexPotential edge_sum(const DiscreteMeasure& measure, const VertexPotential& f, double t, double epsilon,
                         const Kernel& kernel, bool pruning, unsigned threads, EdgeSumStats* stats) {
  if (f.values.size() != measure.size()) fail(ErrorKind::InvalidArgument, "potential does not match the measure");
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
  std::vector<double> coeff(measure.size());
  for (std::size_t y = 0; y < measure.size(); ++y) coeff[y] = measure.weight(y) * f.values[y];
  std::optional<DotProductGrid> grid;
  if (pruning) grid.emplace(measure, epsilon);
  std::uint64_t evals = 0;
  VertexPotential out;
  out.values = accumulate_edge(measure, coeff, t, KernelFn(kernel, epsilon), grid ? &*grid : nullptr, threads, evals);
  out.pinned_vertex = f.pinned_vertex;
  if (stats) stats->kernel_evals += evals;
  return out;
}

CountResult tree_dp_count(const DiscreteMeasure& measure, const Tree& tree, const GapSpec& gaps,
                          const DpOptions& options) {
  gaps.require_targets(tree);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = measure.size();

  std::optional<DotProductGrid> grid;
  if (options.pruning && tree.edge_count() > 0) grid.emplace(measure, gaps.epsilon());
  const KernelFn kernel(gaps.kernel(), gaps.epsilon());
  std::optional<Rng> rng;
  if (options.leaf_order_seed) rng.emplace(*options.leaf_order_seed);

  // potentials[v] holds the product of messages already folded into original vertex v.
  std::vector<std::vector<double>> potentials(tree.vertex_count(), std::vector<double>(n, 1.0));
  std::vector<Vertex> original(tree.vertex_count());
  for (Vertex v = 0; v < original.size(); ++v) original[v] = v;

  Tree current = tree;
  std::uint64_t evals = 0;
  std::vector<double> coeff(n);
  while (current.edge_count() > 0) {
    const auto leaf_list = leaves(current);
    const Vertex leaf = rng ? leaf_list[rng->below(leaf_list.size())] : leaf_list.back();
    RipResult rip = rip_leaf(current, leaf);
    const Vertex from = original[rip.removed.b];
    const Vertex into = original[rip.removed.a];

    for (std::size_t y = 0; y < n; ++y) coeff[y] = measure.weight(y) * potentials[from][y];
    const auto message = accumulate_edge(measure, coeff, gaps.target({into, from}), kernel,
                                         grid ? &*grid : nullptr, options.threads, evals);
    for (std::size_t x = 0; x < n; ++x) potentials[into][x] *= message[x];
    potentials[from].clear();
    potentials[from].shrink_to_fit();

    std::vector<Vertex> next_original(rip.tree.vertex_count());
    for (Vertex v = 0; v < rip.relabel.size(); ++v) {
      if (rip.relabel[v]) next_original[*rip.relabel[v]] = original[v];
    }
    original = std::move(next_original);
    current = std::move(rip.tree);
  }

  const Vertex root = original.front();
  for (std::size_t x = 0; x < n; ++x) coeff[x] = measure.weight(x) * potentials[root][x];

  CountResult result;
  result.value = pairwise_sum(coeff);
  result.method = CountMethod::TreeDp;
  result.tuple_space_size = std::pow(static_cast<double>(n), static_cast<double>(tree.vertex_count()));
  result.kernel_evals = evals;
  result.elapsed_seconds = seconds_since(start);
  return result;
}

double embedding_count(const DiscreteMeasure& measure, const Tree& tree, const GapSpec& gaps, bool pruning,
                       unsigned threads) {
  gaps.require_targets(tree);
  const BfsOrder bfs = bfs_order(tree);
  const auto completions = subtree_completions(measure, tree, gaps, bfs, pruning, threads);
  return pairwise_sum(completions[0]);
}

std::vector<std::vector<std::size_t>> enumerate_embeddings(const DiscreteMeasure& measure, const Tree& tree,
                                                           const GapSpec& gaps, const EnumerateOptions& options) {
  gaps.require_targets(tree);
  const std::size_t n = measure.size();
  const BfsOrder bfs = bfs_order(tree);
  const auto completions = subtree_completions(measure, tree, gaps, bfs, true, 0);
  const double total = pairwise_sum(completions[0]);
  if (!options.exclude_repeats && total > static_cast<double>(options.cap)) {
    fail(ErrorKind::OutputTooLarge, "embedding count " + std::to_string(total) + " exceeds cap " +
                                        std::to_string(options.cap));
  }

  const std::size_t vertices = tree.vertex_count();
  std::vector<double> targets(vertices, 0.0);
  for (std::size_t i = 1; i < vertices; ++i) targets[i] = gaps.target({bfs.parent[bfs.order[i]], bfs.order[i]});

  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> tuple(vertices, 0);
  std::vector<bool> in_use(n, false);
  const double eps = gaps.epsilon();

  std::function<void(std::size_t)> extend = [&](std::size_t i) {
    if (i == vertices) {
      if (out.size() >= options.cap) {
        fail(ErrorKind::OutputTooLarge, "more than " + std::to_string(options.cap) + " embeddings");
      }
      out.push_back(tuple);
      return;
    }
    const Vertex v = bfs.order[i];
    for (std::size_t p = 0; p < n; ++p) {
      if (completions[v][p] == 0.0) continue;
      if (options.exclude_repeats && in_use[p]) continue;
      if (i > 0 && !(std::abs(measure.dot(tuple[bfs.parent[v]], p) - targets[i]) < eps)) continue;
      tuple[v] = p;
      in_use[p] = true;
      extend(i + 1);
      in_use[p] = false;
    }
  };
  extend(0);
  return out;
}

}  // namespace dptree
