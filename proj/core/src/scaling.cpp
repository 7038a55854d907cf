#include "dptree/scaling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "dptree/error.hpp"

namespace dptree {
namespace {

void require_decreasing(std::span<const double> ladder, std::string_view what) {
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) fail(ErrorKind::InvalidArgument, std::string(what) + " entries must be positive");
    if (i > 0 && !(ladder[i] < ladder[i - 1])) {
      fail(ErrorKind::InvalidArgument, std::string(what) + " must be strictly decreasing");
    }
  }
}

void check_resolution_floor(const DiscreteMeasure& measure, std::span<const double> ladder) {
  const double scale = dot_product_gap_scale(measure);
  for (double eps : ladder) {
    if (eps < 2.0 * scale) {
      fail(ErrorKind::ResolutionFloor, "epsilon " + std::to_string(eps) + " is below twice the dot-product gap scale " +
                                           std::to_string(scale) + " of the cloud");
    }
  }
}

// Worst growth r[j]/r[i] over i < j (finer rung later) with r[i] > 0.
double worst_growth(std::span<const double> ratios) {
  double worst = 1.0;
  double smallest_positive = std::numeric_limits<double>::infinity();
  for (double r : ratios) {
    if (std::isfinite(smallest_positive)) worst = std::max(worst, r / smallest_positive);
    if (r > 0.0) smallest_positive = std::min(smallest_positive, r);
  }
  return worst;
}

// Worst decay r[i]/r[j] over i < j; infinite when a positive ratio drops to 0.
double worst_decay(std::span<const double> ratios) {
  double worst = 1.0;
  double largest_so_far = 0.0;
  for (double r : ratios) {
    if (largest_so_far > 0.0) {
      worst = r > 0.0 ? std::max(worst, largest_so_far / r) : std::numeric_limits<double>::infinity();
    }
    largest_so_far = std::max(largest_so_far, r);
  }
  return worst;
}

// First-fit greedy selection: keep a point iff its squared distance to every
// kept point is >= separation^2. Kept points are bucketed on a grid of side
// `separation`, so conflicts can only sit in the 3^dim surrounding cells.
std::size_t greedy_separated(std::span<const double> coords, std::size_t dim, double separation) {
  if (dim == 0 || coords.size() % dim != 0) fail(ErrorKind::InvalidArgument, "coordinate array does not match dim");
  if (!(separation > 0.0)) fail(ErrorKind::InvalidArgument, "radius must be positive");
  const std::size_t n = coords.size() / dim;
  const double sep2 = separation * separation;

  struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
      std::size_t h = 1469598103934665603ull;
      for (auto v : key) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> buckets;
  std::vector<std::size_t> kept;
  const double neighbor_cells = std::pow(3.0, static_cast<double>(dim));

  auto far_from = [&](std::size_t i, std::size_t j) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff = coords[i * dim + k] - coords[j * dim + k];
      d2 += diff * diff;
    }
    return d2 >= sep2;
  };

  std::vector<std::int64_t> key(dim), probe(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) key[k] = static_cast<std::int64_t>(std::floor(coords[i * dim + k] / separation));
    bool ok = true;
    if (neighbor_cells > static_cast<double>(kept.size())) {
      for (std::size_t j : kept) {
        if (!far_from(i, j)) {
          ok = false;
          break;
        }
      }
    } else {
      // odometer over offsets in {-1,0,1}^dim
      std::vector<int> offset(dim, -1);
      while (ok) {
        for (std::size_t k = 0; k < dim; ++k) probe[k] = key[k] + offset[k];
        if (const auto it = buckets.find(probe); it != buckets.end()) {
          for (std::size_t j : it->second) {
            if (!far_from(i, j)) {
              ok = false;
              break;
            }
          }
        }
        std::size_t k = 0;
        while (k < dim && offset[k] == 1) offset[k++] = -1;
        if (k == dim) break;
        ++offset[k];
      }
    }
    if (ok) {
      kept.push_back(i);
      buckets[key].push_back(i);
    }
  }
  return kept.size();
}

}  // namespace

GapSpec make_gaps(const Targets& targets, double epsilon, const Kernel& kernel) {
  if (const auto* t = std::get_if<double>(&targets)) return GapSpec::scalar(*t, epsilon, kernel);
  return GapSpec::per_edge(std::get<std::map<Edge, double>>(targets), epsilon, kernel);
}

std::vector<double> IntervalSelection::interior_samples(std::size_t count) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(lo + static_cast<double>(i + 1) * (hi - lo) / static_cast<double>(count + 1));
  }
  return out;
}

IntervalSelection select_interval(const DiscreteMeasure& measure, double q_lo, double q_hi, std::size_t sample_pairs,
                                  std::uint64_t seed) {
  if (!(q_lo >= 0.0 && q_lo < q_hi && q_hi <= 1.0)) {
    fail(ErrorKind::InvalidArgument, "quantiles must satisfy 0 <= q_lo < q_hi <= 1");
  }
  if (sample_pairs == 0) fail(ErrorKind::InvalidArgument, "sample_pairs must be positive");
  Rng rng(seed);
  const WeightedSampler sampler(measure.weights());
  std::vector<double> dots(sample_pairs);
  for (auto& d : dots) {
    const std::size_t i = sampler(rng);
    const std::size_t j = sampler(rng);
    d = measure.dot(i, j);
  }
  const auto [min_it, max_it] = std::minmax_element(dots.begin(), dots.end());
  if (*min_it == *max_it) {
    fail(ErrorKind::DegenerateInterval, "every sampled dot product equals " + std::to_string(*min_it));
  }
  IntervalSelection sel;
  sel.q_lo = q_lo;
  sel.q_hi = q_hi;
  sel.lo = quantile(dots, q_lo);
  sel.hi = quantile(dots, q_hi);
  sel.median = quantile(dots, 0.5);
  if (!(sel.lo < sel.hi)) {
    fail(ErrorKind::DegenerateInterval, "quantiles " + std::to_string(q_lo) + " and " + std::to_string(q_hi) +
                                            " coincide at " + std::to_string(sel.lo));
  }
  return sel;
}

double dot_product_gap_scale(const DiscreteMeasure& measure, std::size_t centers, std::uint64_t seed) {
  const std::size_t n = measure.size();
  std::vector<std::size_t> chosen(n);
  std::iota(chosen.begin(), chosen.end(), 0);
  if (centers < n) {
    Rng rng(seed);
    for (std::size_t i = 0; i < centers; ++i) std::swap(chosen[i], chosen[i + rng.below(n - i)]);
    chosen.resize(centers);
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> dots(n);
  for (std::size_t x : chosen) {
    for (std::size_t y = 0; y < n; ++y) dots[y] = measure.dot(x, y);
    std::sort(dots.begin(), dots.end());
    for (std::size_t y = 1; y < n; ++y) {
      const double gap = dots[y] - dots[y - 1];
      if (gap > 1e-12 * (1.0 + std::abs(dots[y]))) best = std::min(best, gap);  // ignore rounding ties
    }
  }
  return std::isfinite(best) ? best : 0.0;
}

ScalingSeries scaling_series(const DiscreteMeasure& measure, const Tree& tree, const Targets& targets,
                             std::span<const double> eps_ladder, const ExperimentOptions& options) {
  if (eps_ladder.size() < 4) fail(ErrorKind::InvalidArgument, "epsilon ladder needs at least 4 rungs");
  require_decreasing(eps_ladder, "epsilon ladder");
  if (options.enforce_resolution_floor) check_resolution_floor(measure, eps_ladder);

  ScalingSeries series;
  series.edges = tree.edge_count();
  series.kernel = options.kernel;
  DpOptions dp;
  dp.pruning = options.pruning;
  dp.threads = options.threads;
  std::vector<double> log_eps, log_v;
  for (double eps : eps_ladder) {
    const CountResult count = tree_dp_count(measure, tree, make_gaps(targets, eps, options.kernel), dp);
    const double raw = options.kernel.normalized
                           ? count.value * std::pow(raw_mass(options.kernel.kind, eps), static_cast<double>(series.edges))
                           : count.value;
    series.epsilons.push_back(eps);
    series.values.push_back(count.value);
    series.raw_values.push_back(raw);
    if (raw > 0.0) {
      log_eps.push_back(std::log(eps));
      log_v.push_back(std::log(raw));
    }
  }
  if (log_eps.size() < 2) {
    fail(ErrorKind::AllZeroValues, "fewer than two positive counts on the ladder; windows are too narrow for the cloud");
  }
  series.fit = least_squares(log_eps, log_v);
  return series;
}

BoundVerdict upper_bound_check(const ScalingSeries& series, std::size_t k, double drift_factor) {
  BoundVerdict verdict;
  for (std::size_t i = 0; i < series.epsilons.size(); ++i) {
    verdict.ratios.push_back(series.raw_values[i] / std::pow(series.epsilons[i], static_cast<double>(k)));
  }
  if (verdict.ratios.empty()) fail(ErrorKind::InvalidArgument, "empty series");
  verdict.max_ratio = *std::max_element(verdict.ratios.begin(), verdict.ratios.end());
  verdict.min_ratio = *std::min_element(verdict.ratios.begin(), verdict.ratios.end());
  verdict.drift = worst_growth(verdict.ratios);
  verdict.pass = std::isfinite(verdict.max_ratio) && verdict.drift <= drift_factor;
  return verdict;
}

LowerBoundVerdict lower_bound_check(const DiscreteMeasure& measure, const Tree& original, const CoverResult& cover,
                                    std::span<const double> eps_ladder, const IntervalSelection& interval,
                                    std::size_t samples_t, const ExperimentOptions& options, double drift_factor) {
  if (!cover.certificate.verify(original, cover.cover)) {
    fail(ErrorKind::NotACover, "certificate does not embed the tree in the supplied cover");
  }
  if (samples_t == 0) fail(ErrorKind::InvalidArgument, "need at least one t sample");
  if (eps_ladder.size() < 2) fail(ErrorKind::InvalidArgument, "epsilon ladder needs at least 2 rungs");
  require_decreasing(eps_ladder, "epsilon ladder");
  if (options.enforce_resolution_floor) check_resolution_floor(measure, eps_ladder);

  const Tree& tree = cover.cover;
  LowerBoundVerdict verdict;
  verdict.edges = tree.edge_count();
  verdict.min_ratio = std::numeric_limits<double>::infinity();
  verdict.drift = 1.0;
  DpOptions dp;
  dp.pruning = options.pruning;
  dp.threads = options.threads;
  const double k = static_cast<double>(verdict.edges);
  for (double t : interval.interior_samples(samples_t)) {
    std::vector<double> ratios;
    for (double eps : eps_ladder) {
      const GapSpec gaps = GapSpec::scalar(t, eps, options.kernel);
      const double value = tree_dp_count(measure, tree, gaps, dp).value;
      const double raw = options.kernel.normalized ? value * std::pow(raw_mass(options.kernel.kind, eps), k) : value;
      const double ratio = raw / std::pow(eps, k);
      verdict.rows.push_back({t, eps, raw, ratio});
      ratios.push_back(ratio);
      verdict.min_ratio = std::min(verdict.min_ratio, ratio);
    }
    verdict.drift = std::max(verdict.drift, worst_decay(ratios));
  }
  verdict.pass = verdict.min_ratio > 0.0 && verdict.drift <= drift_factor;
  return verdict;
}

std::size_t packing_number(std::span<const double> coords, std::size_t dim, double r) {
  return greedy_separated(coords, dim, 2.0 * r);
}

std::size_t covering_number(std::span<const double> coords, std::size_t dim, double r) {
  return greedy_separated(coords, dim, r);
}

DimensionEstimate dim_estimate(const DiscreteMeasure& measure, std::span<const double> r_ladder) {
  if (r_ladder.size() < 2) fail(ErrorKind::LadderOutOfRange, "radius ladder needs at least 2 entries");
  const double diag = bounding_box_diagonal(measure);
  const double gap = measure.size() > 1 ? min_interpoint_distance(measure) : 0.0;
  for (std::size_t i = 0; i < r_ladder.size(); ++i) {
    const double r = r_ladder[i];
    if (!(r > 0.0)) fail(ErrorKind::LadderOutOfRange, "radii must be positive");
    if (i > 0 && (r_ladder[i] > r_ladder[i - 1]) != (r_ladder[1] > r_ladder[0])) {
      fail(ErrorKind::LadderOutOfRange, "radius ladder must be monotone");
    }
    if (i > 0 && r_ladder[i] == r_ladder[i - 1]) fail(ErrorKind::LadderOutOfRange, "radius ladder repeats a value");
    if (measure.size() > 1 && (r > diag || r < 0.5 * gap)) {
      fail(ErrorKind::LadderOutOfRange, "radius " + std::to_string(r) + " outside [" + std::to_string(0.5 * gap) +
                                            ", " + std::to_string(diag) + "]");
    }
  }
  DimensionEstimate est;
  est.kind = DimensionKind::Covering;
  std::vector<double> x, y;
  for (double r : r_ladder) {
    const auto count = covering_number(measure.coords(), measure.dim(), r);
    est.scales.push_back(r);
    est.counts.push_back(static_cast<double>(count));
    x.push_back(std::log(1.0 / r));
    y.push_back(std::log(static_cast<double>(count)));
  }
  est.fit = least_squares(x, y);
  return est;
}

DimensionEstimate minkowski_dim_embedding(std::span<const DiscreteMeasure> levels, const Tree& tree, double t,
                                          const EmbeddingDimensionOptions& options) {
  if (levels.size() < 2) fail(ErrorKind::InvalidArgument, "need at least two levels");
  if (!(options.slack > 0.0)) fail(ErrorKind::InvalidArgument, "slack must be positive");
  if (tree.edge_count() == 0) fail(ErrorKind::InvalidArgument, "tree needs at least one edge");

  DimensionEstimate est;
  est.kind = DimensionKind::Packing;
  std::vector<double> x, y;
  for (const auto& level : levels) {
    const double delta = level.meta().resolution;
    if (!(delta > 0.0)) fail(ErrorKind::InvalidArgument, "level measure has no construction resolution");
    const GapSpec gaps = GapSpec::scalar(t, options.slack * delta, Kernel{KernelKind::Indicator, false});

    double count = 0.0;
    const double separation = delta * (1.0 - 1e-9);
    if (level.size() == 1 || min_interpoint_distance(level) >= separation) {
      // Distinct tuples differ in some slot by at least the atom spacing, so
      // every tuple survives the greedy packing.
      count = embedding_count(level, tree, gaps, true, options.threads);
    } else {
      EnumerateOptions enumerate;
      enumerate.cap = options.enumeration_cap;
      const auto tuples = enumerate_embeddings(level, tree, gaps, enumerate);
      std::vector<double> flat;
      flat.reserve(tuples.size() * tree.vertex_count() * level.dim());
      for (const auto& tuple : tuples) {
        for (std::size_t atom : tuple) {
          const auto p = level.point(atom);
          flat.insert(flat.end(), p.begin(), p.end());
        }
      }
      if (!tuples.empty()) count = static_cast<double>(packing_number(flat, tree.vertex_count() * level.dim(), 0.5 * separation));
    }
    est.scales.push_back(delta);
    est.counts.push_back(count);
    if (count > 0.0) {
      x.push_back(std::log(1.0 / delta));
      y.push_back(std::log(count));
    }
  }
  if (x.empty()) fail(ErrorKind::NoEmbeddingsFound, "no embeddings at t = " + std::to_string(t) + " on any level");
  if (x.size() < 2) fail(ErrorKind::NoEmbeddingsFound, "embeddings found on only one level");
  est.fit = least_squares(x, y);
  return est;
}

std::vector<LambdaPoint> lambda_measure_lower(const DiscreteMeasure& measure, const Tree& tree,
                                              std::span<const double> bin_sizes, const LambdaOptions& options) {
  const std::size_t k = tree.edge_count();
  if (k == 0 || k > 4) fail(ErrorKind::InvalidArgument, "lambda binning supports trees with 1..4 edges");
  if (options.samples == 0) fail(ErrorKind::InvalidArgument, "need at least one sample");
  for (double eta : bin_sizes) {
    if (!(eta > 0.0)) fail(ErrorKind::InvalidArgument, "bin sizes must be positive");
  }

  Rng rng(options.seed);
  const WeightedSampler sampler(measure.weights());
  std::vector<double> values(options.samples * k);
  std::vector<std::size_t> tuple(tree.vertex_count());
  for (std::size_t s = 0; s < options.samples; ++s) {
    for (auto& atom : tuple) atom = sampler(rng);
    for (std::size_t e = 0; e < k; ++e) values[s * k + e] = measure.dot(tuple[tree.edge(e).a], tuple[tree.edge(e).b]);
  }

  std::vector<LambdaPoint> out;
  std::vector<std::array<std::int64_t, 4>> keys(options.samples);
  for (double eta : bin_sizes) {
    for (std::size_t s = 0; s < options.samples; ++s) {
      keys[s].fill(0);
      for (std::size_t e = 0; e < k; ++e) keys[s][e] = static_cast<std::int64_t>(std::floor(values[s * k + e] / eta));
    }
    std::sort(keys.begin(), keys.end());
    const auto occupied = static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    if (occupied * options.min_samples_per_bin > options.samples) {
      fail(ErrorKind::BinTooSmall, "bin size " + std::to_string(eta) + " leaves fewer than " +
                                       std::to_string(options.min_samples_per_bin) + " samples per occupied bin");
    }
    out.push_back({eta, occupied, static_cast<double>(occupied) * std::pow(eta, static_cast<double>(k))});
  }
  return out;
}

}  // namespace dptree
