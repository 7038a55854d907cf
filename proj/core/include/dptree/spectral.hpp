#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dptree/measure.hpp"
#include "dptree/numeric.hpp"

namespace dptree {

struct FourierGrid {
  double density = 8.0;  ///< samples per unit frequency along each axis
  unsigned threads = 0;
};

/// L2 norm of the transform of f mu over the ball |xi| <= 2^j:
///   F(xi) = sum_m w_m f_m exp(-2 pi i x_m . xi),
/// integrated with a midpoint rule on a uniform grid of spacing 1/density
/// (cells whose center lies in the ball). Requires d <= 2, density >= 4 and a
/// spacing below 1 / (2 max|x_m|).
double windowed_fourier_mass(const DiscreteMeasure& measure, std::span<const double> f, int j,
                             const FourierGrid& grid = {});

struct SpectralProbe {
  std::vector<int> j_values;
  std::vector<double> masses;
  LinearFit fit;  ///< log(mass) against j log 2

  double slope() const noexcept { return fit.slope; }
};

/// Growth exponent of windowed_fourier_mass in 2^j. For an s-regular measure
/// in R^d it approaches (d - s) / 2.
SpectralProbe frostman_fourier_slope(const DiscreteMeasure& measure, std::span<const double> f,
                                     std::span<const int> j_range, const FourierGrid& grid = {});

}  // namespace dptree
