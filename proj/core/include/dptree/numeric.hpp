#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace dptree {

/// Pairwise (cascade) summation; the reduction order depends only on the
/// length of the input.
double pairwise_sum(std::span<const double> values) noexcept;

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root mean square of the fit residuals
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept. Needs two distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Linear-interpolated empirical quantile (type 7) of unsorted data.
double quantile(std::vector<double> data, double q);

/// Seeded generator with a fixed, platform-independent output stream.
/// std::mt19937_64 is fully specified by the standard; the distribution
/// helpers here avoid the implementation-defined std:: distributions.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

/// Samples indices from a discrete distribution by inverse CDF.
class WeightedSampler {
 public:
  explicit WeightedSampler(std::span<const double> weights);
  std::size_t operator()(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
};

/// Number of worker threads used when a caller passes 0.
unsigned default_threads() noexcept;

/// Runs body(i) for i in [0, count) on up to `threads` workers using fixed
/// contiguous chunks. Results must be written to per-index slots for the
/// output to be independent of the worker count.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace dptree
