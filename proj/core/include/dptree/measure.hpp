#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dptree {

/// How a measure was built. Serialized next to the atom file so every
/// experiment can be regenerated.
struct MeasureMeta {
  std::string family = "custom";  ///< cantor | product | uniform | custom
  double ratio = 0.0;             ///< contraction ratio (self-similar families)
  int branches = 0;
  int level = -1;
  double offset_c = 0.0;     ///< accumulated box offset; 0 means never shifted
  double nominal_s = 0.0;    ///< dimension implied by the construction
  double resolution = 0.0;   ///< side length of the finest construction cell
  std::optional<std::uint64_t> seed;
  std::string generator;     ///< RNG algorithm id for random families
  std::string description;

  friend bool operator==(const MeasureMeta&, const MeasureMeta&) = default;
};

/// Weighted point cloud in R^d with total mass 1. Coordinates are stored
/// row-major (point i occupies coords[i*d, i*d + d)).
class DiscreteMeasure {
 public:
  static constexpr double kMassTolerance = 1e-12;

  DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights, MeasureMeta meta = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> coords() const noexcept { return coords_; }
  const MeasureMeta& meta() const noexcept { return meta_; }
  MeasureMeta& meta() noexcept { return meta_; }

  double dot(std::size_t i, std::size_t j) const noexcept {
    const double* a = coords_.data() + i * dim_;
    const double* b = coords_.data() + j * dim_;
    double acc = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) acc += a[k] * b[k];
    return acc;
  }
  double max_norm() const noexcept;

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
  MeasureMeta meta_;
};

/// Self-similar Cantor measure on [0,1]: `branches` equally spaced children of
/// relative size `ratio`, iterated `level` times. Atoms sit at the left
/// endpoints of the level-`level` intervals, each with mass branches^-level.
DiscreteMeasure cantor_1d(double ratio, int branches, int level);

inline constexpr std::size_t kDefaultPointCap = 1'000'000;

/// Product measure on R^{d1+d2}; point (i, j) is the concatenation of the
/// factor points with weight w_i * w_j.
DiscreteMeasure product_measure(const DiscreteMeasure& first, const DiscreteMeasure& second,
                                std::size_t point_cap = kDefaultPointCap);

/// Applies x -> c + (1 - c) x in every coordinate. Points must lie in [0,1]^d.
DiscreteMeasure shift_to_box(const DiscreteMeasure& measure, double c);

/// n points uniform on [c,1]^d with weight 1/n from a seeded Rng stream.
DiscreteMeasure uniform_cube_sample(std::size_t n, std::size_t d, double c, std::uint64_t seed);

struct RegularityReport {
  double s = 0.0;
  double max_upper_ratio = 0.0;  ///< max of mu(B(x,r)) / r^s
  double min_lower_ratio = 0.0;  ///< min of mu(B(x,r)) / r^s
  std::vector<double> radii;
  std::size_t centers = 0;
};

/// Ball-mass ratios mu(B(x,r))/r^s over sampled atoms x (all atoms when
/// sample_centers >= size) and the given radii. Balls are open and Euclidean.
RegularityReport regularity_check(const DiscreteMeasure& measure, double s, std::span<const double> radii,
                                  std::size_t sample_centers, std::uint64_t seed);

/// Smallest distance between two distinct atoms (infinity for one atom).
double min_interpoint_distance(const DiscreteMeasure& measure);
/// Diagonal of the axis-aligned bounding box; an upper bound on the diameter.
double bounding_box_diagonal(const DiscreteMeasure& measure);

}  // namespace dptree
