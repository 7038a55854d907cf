#include "dptree/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dptree/error.hpp"
#include "dptree/numeric.hpp"

namespace dptree {
namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights,
                                 MeasureMeta meta)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), meta_(std::move(meta)) {
  if (dim_ == 0) fail(ErrorKind::InvalidArgument, "measure dimension must be positive");
  if (weights_.empty()) fail(ErrorKind::InvalidArgument, "measure needs at least one atom");
  if (coords_.size() != weights_.size() * dim_) {
    fail(ErrorKind::InvalidArgument, "coordinate count " + std::to_string(coords_.size()) + " != atoms * dim");
  }
  for (double c : coords_) {
    if (!std::isfinite(c)) fail(ErrorKind::InvalidArgument, "non-finite coordinate");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      fail(ErrorKind::InvalidArgument, "weight of atom " + std::to_string(i) + " is negative or non-finite");
    }
  }
  const double total = pairwise_sum(weights_);
  if (std::abs(total - 1.0) > kMassTolerance) {
    fail(ErrorKind::InvalidArgument, "weights sum to " + format_number(total) + ", expected 1");
  }
}

double DiscreteMeasure::max_norm() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) best = std::max(best, dot(i, i));
  return std::sqrt(best);
}

DiscreteMeasure cantor_1d(double ratio, int branches, int level) {
  if (!(ratio > 0.0 && ratio <= 0.5)) fail(ErrorKind::InvalidArgument, "ratio must lie in (0, 1/2]");
  if (branches < 2) fail(ErrorKind::InvalidArgument, "branches must be at least 2");
  if (level < 0) fail(ErrorKind::InvalidArgument, "level must be nonnegative");
  if (branches * ratio > 1.0 + 1e-12) {
    fail(ErrorKind::OverlappingBranches,
         std::to_string(branches) + " children of ratio " + format_number(ratio) + " overlap");
  }
  const double count = std::pow(static_cast<double>(branches), level);
  if (count > static_cast<double>(kDefaultPointCap)) {
    fail(ErrorKind::TooManyPoints, "cantor level would produce " + format_number(count) + " points");
  }
  const auto n = static_cast<std::size_t>(std::llround(count));
  const double step = (1.0 - ratio) / (branches - 1);

  // Digits are enumerated most-significant first, which yields ascending points.
  std::vector<double> coords(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rest = i;
    double x = 0.0;
    double scale = std::pow(ratio, level - 1);
    for (int l = level; l >= 1; --l) {
      const auto digit = rest % static_cast<std::size_t>(branches);
      rest /= static_cast<std::size_t>(branches);
      x += static_cast<double>(digit) * step * scale;
      scale /= ratio;
    }
    coords[i] = x;
  }

  MeasureMeta meta;
  meta.family = "cantor";
  meta.ratio = ratio;
  meta.branches = branches;
  meta.level = level;
  meta.nominal_s = std::log(static_cast<double>(branches)) / std::log(1.0 / ratio);
  meta.resolution = std::pow(ratio, level);
  meta.description = "cantor(ratio=" + format_number(ratio) + ", branches=" + std::to_string(branches) +
                     ", level=" + std::to_string(level) + ")";
  return DiscreteMeasure(1, std::move(coords), std::vector<double>(n, 1.0 / count), std::move(meta));
}

DiscreteMeasure product_measure(const DiscreteMeasure& first, const DiscreteMeasure& second, std::size_t point_cap) {
  const double count = static_cast<double>(first.size()) * static_cast<double>(second.size());
  if (count > static_cast<double>(point_cap)) {
    fail(ErrorKind::TooManyPoints,
         "product has " + format_number(count) + " atoms, cap is " + std::to_string(point_cap));
  }
  const std::size_t d = first.dim() + second.dim();
  std::vector<double> coords;
  std::vector<double> weights;
  coords.reserve(static_cast<std::size_t>(count) * d);
  weights.reserve(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = 0; j < second.size(); ++j) {
      const auto a = first.point(i);
      const auto b = second.point(j);
      coords.insert(coords.end(), a.begin(), a.end());
      coords.insert(coords.end(), b.begin(), b.end());
      weights.push_back(first.weight(i) * second.weight(j));
    }
  }

  const MeasureMeta& ma = first.meta();
  const MeasureMeta& mb = second.meta();
  MeasureMeta meta;
  meta.family = "product";
  meta.nominal_s = ma.nominal_s + mb.nominal_s;
  meta.resolution = std::max(ma.resolution, mb.resolution);
  if (ma.ratio == mb.ratio && ma.branches == mb.branches && ma.level == mb.level) {
    meta.ratio = ma.ratio;
    meta.branches = ma.branches;
    meta.level = ma.level;
  }
  meta.offset_c = ma.offset_c == mb.offset_c ? ma.offset_c : 0.0;
  meta.description = "product(" + ma.description + ", " + mb.description + ")";
  return DiscreteMeasure(d, std::move(coords), std::move(weights), std::move(meta));
}

DiscreteMeasure shift_to_box(const DiscreteMeasure& measure, double c) {
  if (!(c > 0.0 && c < 1.0)) fail(ErrorKind::InvalidArgument, "box offset c must lie in (0,1)");
  constexpr double slack = 1e-12;
  std::vector<double> coords(measure.coords().begin(), measure.coords().end());
  for (double& x : coords) {
    if (x < -slack || x > 1.0 + slack) fail(ErrorKind::InvalidArgument, "shift_to_box needs points in [0,1]^d");
    x = c + (1.0 - c) * x;
  }
  MeasureMeta meta = measure.meta();
  meta.offset_c = 1.0 - (1.0 - meta.offset_c) * (1.0 - c);
  meta.resolution *= (1.0 - c);
  meta.description = "shift(c=" + format_number(c) + ", " + meta.description + ")";
  return DiscreteMeasure(measure.dim(), std::move(coords),
                         std::vector<double>(measure.weights().begin(), measure.weights().end()), std::move(meta));
}

DiscreteMeasure uniform_cube_sample(std::size_t n, std::size_t d, double c, std::uint64_t seed) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "uniform sample needs n >= 1");
  if (d == 0) fail(ErrorKind::InvalidArgument, "dimension must be positive");
  if (!(c >= 0.0 && c < 1.0)) fail(ErrorKind::InvalidArgument, "box offset c must lie in [0,1)");
  if (n > kDefaultPointCap) fail(ErrorKind::TooManyPoints, "uniform sample of " + std::to_string(n) + " points");
  Rng rng(seed);
  std::vector<double> coords(n * d);
  for (double& x : coords) x = c + (1.0 - c) * rng.uniform();

  MeasureMeta meta;
  meta.family = "uniform";
  meta.offset_c = c;
  meta.nominal_s = static_cast<double>(d);
  meta.resolution = (1.0 - c) * std::pow(static_cast<double>(n), -1.0 / static_cast<double>(d));
  meta.seed = seed;
  meta.generator = std::string(Rng::kAlgorithm);
  meta.description = "uniform(n=" + std::to_string(n) + ", d=" + std::to_string(d) + ", c=" + format_number(c) +
                     ", seed=" + std::to_string(seed) + ")";
  return DiscreteMeasure(d, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                         std::move(meta));
}

RegularityReport regularity_check(const DiscreteMeasure& measure, double s, std::span<const double> radii,
                                  std::size_t sample_centers, std::uint64_t seed) {
  if (radii.empty()) fail(ErrorKind::EmptyRadiusList, "regularity check needs at least one radius");
  for (double r : radii) {
    if (!(r > 0.0)) fail(ErrorKind::InvalidArgument, "radii must be positive");
  }
  const std::size_t n = measure.size();
  std::vector<std::size_t> centers(n);
  std::iota(centers.begin(), centers.end(), 0);
  if (sample_centers < n) {
    Rng rng(seed);
    for (std::size_t i = 0; i < sample_centers; ++i) {
      std::swap(centers[i], centers[i + rng.below(n - i)]);
    }
    centers.resize(sample_centers);
  }

  RegularityReport report;
  report.s = s;
  report.radii.assign(radii.begin(), radii.end());
  report.centers = centers.size();
  report.max_upper_ratio = 0.0;
  report.min_lower_ratio = std::numeric_limits<double>::infinity();

  std::vector<std::pair<double, double>> by_distance(n);  // (squared distance, weight)
  std::vector<double> cumulative(n);
  for (std::size_t x : centers) {
    const auto px = measure.point(x);
    for (std::size_t y = 0; y < n; ++y) {
      const auto py = measure.point(y);
      double d2 = 0.0;
      for (std::size_t k = 0; k < measure.dim(); ++k) d2 += (px[k] - py[k]) * (px[k] - py[k]);
      by_distance[y] = {d2, measure.weight(y)};
    }
    std::sort(by_distance.begin(), by_distance.end());
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) cumulative[y] = acc += by_distance[y].second;
    for (double r : radii) {
      // open ball: squared distance strictly below r^2
      const auto end = std::lower_bound(by_distance.begin(), by_distance.end(), std::pair{r * r, -1.0});
      const auto inside = static_cast<std::size_t>(end - by_distance.begin());
      const double mass = inside == 0 ? 0.0 : cumulative[inside - 1];
      const double ratio = mass / std::pow(r, s);
      report.max_upper_ratio = std::max(report.max_upper_ratio, ratio);
      report.min_lower_ratio = std::min(report.min_lower_ratio, ratio);
    }
  }
  return report;
}

double min_interpoint_distance(const DiscreteMeasure& measure) {
  const std::size_t n = measure.size();
  const std::size_t d = measure.dim();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return measure.point(a)[0] < measure.point(b)[0];
  });
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = measure.point(order[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto q = measure.point(order[j]);
      const double dx = q[0] - p[0];
      if (dx * dx >= best2) break;
      double d2 = 0.0;
      for (std::size_t k = 0; k < d; ++k) d2 += (p[k] - q[k]) * (p[k] - q[k]);
      if (d2 > 0.0 && d2 < best2) best2 = d2;
    }
  }
  return std::sqrt(best2);
}

double bounding_box_diagonal(const DiscreteMeasure& measure) {
  double acc = 0.0;
  for (std::size_t k = 0; k < measure.dim(); ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < measure.size(); ++i) {
      lo = std::min(lo, measure.point(i)[k]);
      hi = std::max(hi, measure.point(i)[k]);
    }
    acc += (hi - lo) * (hi - lo);
  }
  return std::sqrt(acc);
}

}  // namespace dptree
