#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dptree/count.hpp"
#include "dptree/measure.hpp"
#include "dptree/numeric.hpp"
#include "dptree/tree.hpp"

namespace dptree {

/// Dot-product targets: one scalar for every edge, or one value per edge.
using Targets = std::variant<double, std::map<Edge, double>>;

GapSpec make_gaps(const Targets& targets, double epsilon, const Kernel& kernel);

struct IntervalSelection {
  double lo = 0.0;
  double hi = 0.0;
  double q_lo = 0.35;
  double q_hi = 0.65;
  double median = 0.0;

  double midpoint() const noexcept { return 0.5 * (lo + hi); }
  /// `count` interior points lo + (i+1)(hi-lo)/(count+1).
  std::vector<double> interior_samples(std::size_t count) const;
};

/// Empirical quantiles of x.y over pairs drawn from mu x mu.
IntervalSelection select_interval(const DiscreteMeasure& measure, double q_lo = 0.35, double q_hi = 0.65,
                                  std::size_t sample_pairs = 10000, std::uint64_t seed = 0);

/// Smallest positive gap between consecutive distinct values of x.y over all
/// atoms y, minimized over up to `centers` sampled atoms x. Windows narrower
/// than twice this scale no longer average over several atoms.
double dot_product_gap_scale(const DiscreteMeasure& measure, std::size_t centers = 64, std::uint64_t seed = 0);

struct ExperimentOptions {
  Kernel kernel{KernelKind::Indicator, false};
  bool pruning = true;
  unsigned threads = 0;
  bool enforce_resolution_floor = true;
};

struct ScalingSeries {
  std::vector<double> epsilons;    ///< strictly decreasing
  std::vector<double> values;      ///< V^eps with the chosen kernel
  std::vector<double> raw_values;  ///< values * raw_mass(eps)^k: the mu^{k+1} window mass
  std::size_t edges = 0;
  Kernel kernel;
  LinearFit fit;  ///< log(raw_value) against log(eps) over positive entries

  double fitted_slope() const noexcept { return fit.slope; }
};

/// Counts on an epsilon ladder (tree_dp_count at every rung) and the log-log
/// slope of the window mass. For a tree with k edges the slope estimates k.
ScalingSeries scaling_series(const DiscreteMeasure& measure, const Tree& tree, const Targets& targets,
                             std::span<const double> eps_ladder, const ExperimentOptions& options = {});

inline constexpr double kDefaultDriftFactor = 4.0;

struct BoundVerdict {
  std::vector<double> ratios;  ///< raw_value / eps^k per rung
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  double drift = 0.0;  ///< worst monotone growth (upper) or decay (lower) between rungs
  bool pass = false;
};

/// Upper-bound verdict: ratio V/eps^k must not grow by more than
/// `drift_factor` from any rung to a finer one.
BoundVerdict upper_bound_check(const ScalingSeries& series, std::size_t k,
                               double drift_factor = kDefaultDriftFactor);

struct LowerBoundRow {
  double t = 0.0;
  double epsilon = 0.0;
  double raw_value = 0.0;
  double ratio = 0.0;
};

struct LowerBoundVerdict {
  std::vector<LowerBoundRow> rows;
  std::size_t edges = 0;
  double min_ratio = 0.0;
  double drift = 0.0;
  bool pass = false;
};

/// Lower-bound verdict on a symmetric cover: for scalar t sampled inside the
/// interval, V/eps^k with k = |E(cover)| must stay positive and not decay by
/// more than `drift_factor` toward finer rungs. `cover` must certify that it
/// contains `original`, otherwise NotACover.
LowerBoundVerdict lower_bound_check(const DiscreteMeasure& measure, const Tree& original, const CoverResult& cover,
                                    std::span<const double> eps_ladder, const IntervalSelection& interval,
                                    std::size_t samples_t = 5, const ExperimentOptions& options = {},
                                    double drift_factor = kDefaultDriftFactor);

/// Greedy first-fit packing: number of points kept when a point is accepted
/// iff it is at distance >= 2r from every accepted point (disjoint open
/// r-balls). `coords` is row-major with `dim` columns.
std::size_t packing_number(std::span<const double> coords, std::size_t dim, double r);

/// Greedy cover by open r-balls: a point becomes a center iff no existing
/// center lies within distance < r.
std::size_t covering_number(std::span<const double> coords, std::size_t dim, double r);

enum class DimensionKind { Packing, Covering };

struct DimensionEstimate {
  DimensionKind kind = DimensionKind::Covering;
  std::vector<double> scales;
  std::vector<double> counts;
  LinearFit fit;  ///< log(count) against log(1/scale)

  double slope() const noexcept { return fit.slope; }
};

/// Box-counting dimension of the support from greedy covering numbers.
DimensionEstimate dim_estimate(const DiscreteMeasure& measure, std::span<const double> r_ladder);

struct EmbeddingDimensionOptions {
  double slack = 2.0;
  std::size_t enumeration_cap = 2'000'000;
  unsigned threads = 0;
};

/// Upper Minkowski dimension estimate of the embedding set T_t(E) across
/// increasingly fine approximations. At each level the scale delta is the
/// construction resolution, the window is slack * delta, and the count is the
/// number of delta-separated tuples in R^{d(k+1)}.
DimensionEstimate minkowski_dim_embedding(std::span<const DiscreteMeasure> levels, const Tree& tree, double t,
                                          const EmbeddingDimensionOptions& options = {});

struct LambdaPoint {
  double eta = 0.0;
  std::size_t occupied_bins = 0;
  double occupied_volume = 0.0;  ///< occupied_bins * eta^k
};

struct LambdaOptions {
  std::size_t samples = std::size_t{1} << 21;
  std::uint64_t seed = 0;
  std::size_t min_samples_per_bin = 4;
};

/// Occupied volume of the binned dot-product configuration set: sampled
/// tuples are mapped to (x_i.x_j) over the tree's edges and counted in a
/// grid of side eta in R^k. Requires 1 <= k <= 4.
std::vector<LambdaPoint> lambda_measure_lower(const DiscreteMeasure& measure, const Tree& tree,
                                              std::span<const double> bin_sizes, const LambdaOptions& options = {});

}  // namespace dptree
