#include "dptree/spectral.hpp"

#include <cmath>
#include <numbers>

#include "dptree/error.hpp"

namespace dptree {

double windowed_fourier_mass(const DiscreteMeasure& measure, std::span<const double> f, int j,
                             const FourierGrid& grid) {
  const std::size_t d = measure.dim();
  if (d > 2) fail(ErrorKind::DimensionTooHigh, "Fourier mass supports d <= 2, got d = " + std::to_string(d));
  if (f.size() != measure.size()) fail(ErrorKind::InvalidArgument, "f must have one value per atom");
  const double max_norm = measure.max_norm();
  if (!(grid.density >= 4.0) || 2.0 * max_norm > grid.density) {
    fail(ErrorKind::GridTooCoarse, "grid density " + std::to_string(grid.density) +
                                       " does not resolve oscillations of |x| up to " + std::to_string(max_norm));
  }
  if (j < 0 || j > 16) fail(ErrorKind::InvalidArgument, "frequency exponent j must lie in [0, 16]");

  const double radius = std::ldexp(1.0, j);
  const double h = 1.0 / grid.density;
  const auto half = static_cast<long>(std::ceil(radius * grid.density));

  // Cell centers (i + 1/2) h for i in [-half, half).
  std::vector<std::vector<double>> frequencies;
  if (d == 1) {
    for (long i = -half; i < half; ++i) frequencies.push_back({(static_cast<double>(i) + 0.5) * h});
  } else {
    for (long a = -half; a < half; ++a) {
      for (long b = -half; b < half; ++b) {
        const double xa = (static_cast<double>(a) + 0.5) * h;
        const double xb = (static_cast<double>(b) + 0.5) * h;
        if (xa * xa + xb * xb <= radius * radius) frequencies.push_back({xa, xb});
      }
    }
  }
  if (d == 1) {
    // keep only centers inside [-R, R]; exact when R * density is an integer
    std::erase_if(frequencies, [&](const auto& xi) { return std::abs(xi[0]) > radius; });
  }

  std::vector<double> coeff(measure.size());
  for (std::size_t m = 0; m < measure.size(); ++m) coeff[m] = measure.weight(m) * f[m];

  std::vector<double> power(frequencies.size());
  parallel_for(frequencies.size(), grid.threads, [&](std::size_t q) {
    thread_local std::vector<double> re_terms, im_terms;
    re_terms.resize(measure.size());
    im_terms.resize(measure.size());
    const auto& xi = frequencies[q];
    for (std::size_t m = 0; m < measure.size(); ++m) {
      const auto x = measure.point(m);
      double phase = 0.0;
      for (std::size_t k = 0; k < d; ++k) phase += x[k] * xi[k];
      phase *= -2.0 * std::numbers::pi;
      re_terms[m] = coeff[m] * std::cos(phase);
      im_terms[m] = coeff[m] * std::sin(phase);
    }
    const double a = pairwise_sum(re_terms);
    const double b = pairwise_sum(im_terms);
    power[q] = a * a + b * b;
  });
  const double cell = std::pow(h, static_cast<double>(d));
  return std::sqrt(pairwise_sum(power) * cell);
}

SpectralProbe frostman_fourier_slope(const DiscreteMeasure& measure, std::span<const double> f,
                                     std::span<const int> j_range, const FourierGrid& grid) {
  if (j_range.size() < 4) fail(ErrorKind::InvalidArgument, "need at least 4 frequency exponents");
  SpectralProbe probe;
  std::vector<double> x, y;
  for (int j : j_range) {
    const double mass = windowed_fourier_mass(measure, f, j, grid);
    if (!(mass > 0.0)) fail(ErrorKind::InvalidArgument, "Fourier mass vanished at j = " + std::to_string(j));
    probe.j_values.push_back(j);
    probe.masses.push_back(mass);
    x.push_back(j * std::numbers::ln2);
    y.push_back(std::log(mass));
  }
  probe.fit = least_squares(x, y);
  return probe;
}

}  // namespace dptree
