#include <numeric>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"

using namespace dptree;
using testing::error_kind_of;

TEST_SUITE("numeric") {

TEST_CASE("pairwise_sum") {
  CHECK(pairwise_sum({}) == 0.0);
  std::vector<double> ones(1000, 0.1);
  CHECK(pairwise_sum(ones) == doctest::Approx(100.0).epsilon(1e-14));
  std::vector<int> ints(777);
  std::iota(ints.begin(), ints.end(), 1);
  std::vector<double> values(ints.begin(), ints.end());
  CHECK(pairwise_sum(values) == 777.0 * 778.0 / 2.0);
}

TEST_CASE("least squares recovers a line") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const LinearFit fit = least_squares(x, y);
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.residual == doctest::Approx(0.0));
  CHECK(fit.points == 4);
  CHECK(error_kind_of([] { least_squares(std::vector<double>{1, 1}, std::vector<double>{0, 1}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("least squares residual is the RMS of the misfit") {
  // y = x with one point pushed up by 1: residuals known in closed form.
  const std::vector<double> x{0, 1, 2};
  const std::vector<double> y{0, 2, 2};
  const LinearFit fit = least_squares(x, y);
  CHECK(fit.slope == doctest::Approx(1.0));
  CHECK(fit.intercept == doctest::Approx(1.0 / 3.0));
  CHECK(fit.residual == doctest::Approx(std::sqrt((1.0 / 9 + 4.0 / 9 + 1.0 / 9) / 3.0)));
}

TEST_CASE("quantile interpolates linearly") {
  CHECK(quantile({3, 1, 2, 4}, 0.0) == 1.0);
  CHECK(quantile({3, 1, 2, 4}, 1.0) == 4.0);
  CHECK(quantile({3, 1, 2, 4}, 0.5) == 2.5);
  CHECK(error_kind_of([] { quantile({}, 0.5); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("Rng stream is the standard mt19937_64") {
  Rng rng(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = rng.next();
  CHECK(v == 9981545732273789042ull);
}

TEST_CASE("Rng helpers stay in range and are seed-deterministic") {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
    CHECK(a.below(10) < 10);
    b.below(10);
  }
}

TEST_CASE("WeightedSampler follows the weights") {
  const std::vector<double> w{0.0, 0.25, 0.75};
  WeightedSampler sampler(w);
  Rng rng(3);
  std::size_t counts[3] = {0, 0, 0};
  for (int i = 0; i < 40000; ++i) ++counts[sampler(rng)];
  CHECK(counts[0] == 0);
  CHECK(counts[1] / 40000.0 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("parallel_for writes every slot once regardless of thread count") {
  for (unsigned threads : {1u, 2u, 3u, 8u}) {
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i));
  }
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
    if (i == 7) fail(ErrorKind::InvalidArgument, "boom");
  }), Error);
}

}  // TEST_SUITE
