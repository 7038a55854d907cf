#include <algorithm>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"

using namespace dptree;
using testing::error_kind_of;

namespace {

// Ball masses by direct scan, for comparison with regularity_check.
std::pair<double, double> brute_regularity(const DiscreteMeasure& m, double s, const std::vector<double>& radii) {
  double hi = 0.0, lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double r : radii) {
      double mass = 0.0;
      for (std::size_t j = 0; j < m.size(); ++j) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < m.dim(); ++c) {
          const double diff = m.point(i)[c] - m.point(j)[c];
          d2 += diff * diff;
        }
        if (std::sqrt(d2) < r) mass += m.weight(j);
      }
      hi = std::max(hi, mass / std::pow(r, s));
      lo = std::min(lo, mass / std::pow(r, s));
    }
  }
  return {hi, lo};
}

}  // namespace

TEST_SUITE("measure") {

TEST_CASE("middle-thirds Cantor levels") {
  const DiscreteMeasure l1 = cantor_1d(1.0 / 3.0, 2, 1);
  REQUIRE(l1.size() == 2);
  CHECK(l1.point(0)[0] == 0.0);
  CHECK(l1.point(1)[0] == doctest::Approx(2.0 / 3.0));
  CHECK(l1.weight(0) == 0.5);

  const DiscreteMeasure l2 = cantor_1d(1.0 / 3.0, 2, 2);
  std::vector<double> xs;
  for (std::size_t i = 0; i < l2.size(); ++i) xs.push_back(l2.point(i)[0]);
  std::sort(xs.begin(), xs.end());
  CHECK(xs[1] == doctest::Approx(2.0 / 9.0));
  CHECK(xs[2] == doctest::Approx(6.0 / 9.0));
  CHECK(xs[3] == doctest::Approx(8.0 / 9.0));
  CHECK(l2.meta().nominal_s == doctest::Approx(std::log(2.0) / std::log(3.0)));
  CHECK(l2.meta().resolution == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("level-0 Cantor is a single atom") {
  const DiscreteMeasure m = cantor_1d(0.25, 3, 0);
  CHECK(m.size() == 1);
  CHECK(m.weight(0) == 1.0);
}

TEST_CASE("Cantor product for the scaling experiments") {
  const DiscreteMeasure f = cantor_1d(0.25, 3, 4);
  CHECK(f.size() == 81);
  const DiscreteMeasure p = shift_to_box(product_measure(f, f), 0.3);
  CHECK(p.size() == 6561);
  CHECK(p.dim() == 2);
  CHECK(p.meta().nominal_s == doctest::Approx(2.0 * std::log(3.0) / std::log(4.0)));
  CHECK(p.meta().nominal_s > 1.5);
  for (double x : p.coords()) {
    CHECK(x >= 0.3 - 1e-15);
    CHECK(x <= 1.0);
  }
  CHECK(pairwise_sum(p.weights()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Cantor atoms are separated by at least the construction bound") {
  for (auto [r, b, level] : {std::tuple{1.0 / 3.0, 2, 6}, std::tuple{0.25, 3, 4}, std::tuple{0.2, 4, 3}}) {
    const DiscreteMeasure m = cantor_1d(r, b, level);
    const double bound = std::pow(r, level) * (1.0 - b * r + r);
    CHECK(min_interpoint_distance(m) >= bound * (1.0 - 1e-12));
  }
}

TEST_CASE("Cantor parameter errors") {
  CHECK(error_kind_of([] { cantor_1d(0.5, 3, 2); }) == ErrorKind::OverlappingBranches);
  CHECK(error_kind_of([] { cantor_1d(0.6, 2, 2); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { cantor_1d(1.0 / 3.0, 2, 30); }) == ErrorKind::TooManyPoints);
  const DiscreteMeasure big = cantor_1d(0.25, 3, 7);
  CHECK(error_kind_of([&] { product_measure(big, big); }) == ErrorKind::TooManyPoints);
}

TEST_CASE("measure construction validates mass") {
  CHECK(error_kind_of([] { DiscreteMeasure(1, {0.0, 1.0}, {0.5, 0.4}); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { DiscreteMeasure(1, {0.0, 1.0}, {1.5, -0.5}); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([] { DiscreteMeasure(2, {0.0, 1.0, 2.0}, {1.0}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("shift_to_box maps the unit cube into [c,1]") {
  const DiscreteMeasure m = testing::from_points(2, {0.0, 1.0, 0.5, 0.25});
  const DiscreteMeasure s = shift_to_box(m, 0.2);
  CHECK(s.point(0)[0] == doctest::Approx(0.2));
  CHECK(s.point(0)[1] == doctest::Approx(1.0));
  CHECK(s.point(1)[0] == doctest::Approx(0.6));
  CHECK(s.point(1)[1] == doctest::Approx(0.4));
  CHECK(error_kind_of([&] { shift_to_box(m, 1.0); }) == ErrorKind::InvalidArgument);
  const DiscreteMeasure outside = testing::from_points(1, {2.0});
  CHECK(error_kind_of([&] { shift_to_box(outside, 0.3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("uniform sample is seeded and lies in the box") {
  const DiscreteMeasure a = uniform_cube_sample(500, 3, 0.3, 42);
  const DiscreteMeasure b = uniform_cube_sample(500, 3, 0.3, 42);
  const DiscreteMeasure c = uniform_cube_sample(500, 3, 0.3, 43);
  CHECK(a == b);
  CHECK_FALSE(a.coords()[0] == c.coords()[0]);
  for (double x : a.coords()) {
    CHECK(x >= 0.3);
    CHECK(x < 1.0);
  }
  CHECK(a.meta().seed == std::optional<std::uint64_t>{42});
}

TEST_CASE("regularity_check matches direct ball masses") {
  const DiscreteMeasure m = cantor_1d(1.0 / 3.0, 2, 5);
  const double s = std::log(2.0) / std::log(3.0);
  const std::vector<double> radii{1.0 / 3.0, 1.0 / 9.0, 1.0 / 27.0, 1.0 / 81.0};
  const RegularityReport r = regularity_check(m, s, radii, m.size(), 0);
  const auto [hi, lo] = brute_regularity(m, s, radii);
  CHECK(r.max_upper_ratio == doctest::Approx(hi).epsilon(1e-12));
  CHECK(r.min_lower_ratio == doctest::Approx(lo).epsilon(1e-12));
  CHECK(r.centers == m.size());
  // Ahlfors regularity of the Cantor measure: ratios stay within a fixed band.
  CHECK(r.max_upper_ratio < 4.0);
  CHECK(r.min_lower_ratio > 0.25);
}

TEST_CASE("regularity of a uniform square sample is bounded at s = 2") {
  const DiscreteMeasure m = uniform_cube_sample(4000, 2, 0.0, 5);
  const std::vector<double> radii{0.2, 0.1, 0.05};
  const RegularityReport r = regularity_check(m, 2.0, radii, 200, 1);
  CHECK(r.max_upper_ratio < 8.0);
  CHECK(r.min_lower_ratio > 0.1);
  CHECK(error_kind_of([&] { regularity_check(m, 2.0, {}, 10, 1); }) == ErrorKind::EmptyRadiusList);
}

TEST_CASE("min_interpoint_distance matches brute force") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DiscreteMeasure m = uniform_cube_sample(150, 1 + seed % 3, 0.0, seed);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < m.dim(); ++c) d2 += std::pow(m.point(i)[c] - m.point(j)[c], 2);
        best = std::min(best, std::sqrt(d2));
      }
    }
    CHECK(min_interpoint_distance(m) == doctest::Approx(best).epsilon(1e-12));
  }
  CHECK(std::isinf(min_interpoint_distance(testing::from_points(2, {0.5, 0.5}))));
}

TEST_CASE("bounding box diagonal") {
  const DiscreteMeasure m = testing::from_points(2, {0.0, 0.0, 3.0, 0.0, 1.0, 4.0});
  CHECK(bounding_box_diagonal(m) == doctest::Approx(5.0));
}

}  // TEST_SUITE
