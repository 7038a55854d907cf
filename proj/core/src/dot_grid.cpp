#include "dptree/dot_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dptree/error.hpp"

namespace dptree {

DotProductGrid::DotProductGrid(const DiscreteMeasure& measure, double epsilon) : dim_(measure.dim()) {
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "grid epsilon must be positive");
  const std::size_t n = measure.size();
  const double max_norm = std::max(measure.max_norm(), std::numeric_limits<double>::min());
  const double root_d = std::sqrt(static_cast<double>(dim_));
  cell_size_ = epsilon / (root_d * max_norm);
  spread_bound_ = max_norm * cell_size_ * root_d;
  pad_ = 1e-12 * (1.0 + max_norm * max_norm);

  std::vector<double> origin(dim_, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) origin[k] = std::min(origin[k], measure.point(i)[k]);
  }
  std::vector<std::int64_t> keys(n * dim_);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim_; ++k) {
      keys[i * dim_ + k] = static_cast<std::int64_t>(std::floor((measure.point(i)[k] - origin[k]) / cell_size_));
    }
  }
  auto coarse_key = [](std::int64_t fine) { return fine / kCoarseFactor; };

  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    const std::int64_t* ka = keys.data() + a * dim_;
    const std::int64_t* kb = keys.data() + b * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      if (coarse_key(ka[k]) != coarse_key(kb[k])) return coarse_key(ka[k]) < coarse_key(kb[k]);
    }
    for (std::size_t k = 0; k < dim_; ++k) {
      if (ka[k] != kb[k]) return ka[k] < kb[k];
    }
    return a < b;
  });

  coords_.resize(n * dim_);
  for (std::size_t p = 0; p < n; ++p) {
    const auto src = measure.point(order_[p]);
    std::copy(src.begin(), src.end(), coords_.begin() + static_cast<std::ptrdiff_t>(p * dim_));
  }

  auto same_cell = [&](std::size_t a, std::size_t b, bool coarse) {
    const std::int64_t* ka = keys.data() + order_[a] * dim_;
    const std::int64_t* kb = keys.data() + order_[b] * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
      if (coarse ? coarse_key(ka[k]) != coarse_key(kb[k]) : ka[k] != kb[k]) return false;
    }
    return true;
  };
  auto new_box = [&](std::size_t begin) {
    Box box;
    box.lo_offset = bounds_.size();
    box.begin = begin;
    box.end = begin;
    for (std::size_t k = 0; k < dim_; ++k) bounds_.push_back(std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < dim_; ++k) bounds_.push_back(-std::numeric_limits<double>::infinity());
    return box;
  };
  auto grow = [&](const Box& box, std::size_t p) {
    double* b = bounds_.data() + box.lo_offset;
    for (std::size_t k = 0; k < dim_; ++k) {
      b[k] = std::min(b[k], coords_[p * dim_ + k]);
      b[dim_ + k] = std::max(b[dim_ + k], coords_[p * dim_ + k]);
    }
  };

  for (std::size_t p = 0; p < n; ++p) {
    const bool new_coarse = p == 0 || !same_cell(p - 1, p, true);
    const bool new_fine = new_coarse || !same_cell(p - 1, p, false);
    if (new_coarse) coarse_.push_back(new_box(fine_.size()));
    if (new_fine) {
      fine_.push_back(new_box(p));
      coarse_.back().end = fine_.size();
    }
    fine_.back().end = p + 1;
    grow(fine_.back(), p);
    grow(coarse_.back(), p);
  }
}

}  // namespace dptree
