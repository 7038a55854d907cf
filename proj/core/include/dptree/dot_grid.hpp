#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dptree/measure.hpp"

namespace dptree {

/// Two-level uniform grid over the atoms of a measure, used to skip atoms y
/// whose dot product with a query x cannot fall in an open window (lo, hi).
///
/// The fine cell side is eps / (sqrt(d) * max|x|), so the dot products of any
/// query x (|x| <= max|x|) with the atoms of one cell spread by less than eps.
/// Coarse cells group kCoarseFactor^d fine cells. Both levels keep the tight
/// bounding box of their atoms; a box is skipped when the exact range of x.y
/// over it misses the window by more than a rounding pad.
class DotProductGrid {
 public:
  static constexpr std::int64_t kCoarseFactor = 8;

  DotProductGrid(const DiscreteMeasure& measure, double epsilon);

  double cell_size() const noexcept { return cell_size_; }
  /// Upper bound on the spread of x.y over one fine cell for |x| <= max|x|.
  double spread_bound() const noexcept { return spread_bound_; }
  std::size_t fine_cells() const noexcept { return fine_.size(); }
  std::size_t coarse_cells() const noexcept { return coarse_.size(); }

  /// Calls visit(atom_index, x.y) for every atom in a fine cell whose box
  /// meets the window. Order is fixed by the grid layout.
  template <class Visitor>
  void for_each_candidate(std::span<const double> x, double lo, double hi, Visitor&& visit) const {
    for (const Box& coarse : coarse_) {
      if (!meets(coarse, x, lo, hi)) continue;
      for (std::size_t f = coarse.begin; f < coarse.end; ++f) {
        const Box& fine = fine_[f];
        if (!meets(fine, x, lo, hi)) continue;
        for (std::size_t p = fine.begin; p < fine.end; ++p) {
          const double* y = coords_.data() + p * dim_;
          double acc = 0.0;
          for (std::size_t k = 0; k < dim_; ++k) acc += x[k] * y[k];
          visit(order_[p], acc);
        }
      }
    }
  }

 private:
  struct Box {
    std::size_t lo_offset = 0;  // into bounds_: dim_ lows followed by dim_ highs
    std::size_t begin = 0;      // coarse: fine-cell range; fine: sorted-atom range
    std::size_t end = 0;
  };

  bool meets(const Box& box, std::span<const double> x, double lo, double hi) const noexcept {
    const double* b = bounds_.data() + box.lo_offset;
    double dmin = 0.0, dmax = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double a = x[k] * b[k];
      const double c = x[k] * b[dim_ + k];
      dmin += a < c ? a : c;
      dmax += a < c ? c : a;
    }
    return dmax > lo - pad_ && dmin < hi + pad_;
  }

  std::size_t dim_;
  double cell_size_;
  double spread_bound_;
  double pad_;
  std::vector<double> coords_;      // atoms in grid order
  std::vector<std::size_t> order_;  // grid position -> original atom index
  std::vector<double> bounds_;
  std::vector<Box> fine_;
  std::vector<Box> coarse_;
};

}  // namespace dptree
