#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dptree/count.hpp"
#include "dptree/error.hpp"
#include "dptree/measure.hpp"
#include "dptree/numeric.hpp"
#include "dptree/tree.hpp"

namespace testing {

// Kind of the dptree::Error thrown by `body`, or nullopt if nothing was thrown.
template <class F>
std::optional<dptree::ErrorKind> error_kind_of(F&& body) {
  try {
    body();
  } catch (const dptree::Error& err) {
    return err.kind();
  }
  return std::nullopt;
}

template <class F>
std::string error_message_of(F&& body) {
  try {
    body();
  } catch (const dptree::Error& err) {
    return err.what();
  }
  return "<no error>";
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-30); }

// Independent brute force: odometer over all (k+1)-tuples, written without
// any of the library's counting code.
inline double brute_force_count(const dptree::DiscreteMeasure& m, const dptree::Tree& tree,
                                const dptree::GapSpec& gaps) {
  const std::size_t n = m.size();
  const std::size_t v = tree.vertex_count();
  std::vector<std::size_t> idx(v, 0);
  double total = 0.0;
  while (true) {
    double term = 1.0;
    for (std::size_t i = 0; i < v; ++i) term *= m.weight(idx[i]);
    for (const auto& e : tree.edges()) {
      double dot = 0.0;
      for (std::size_t c = 0; c < m.dim(); ++c) dot += m.point(idx[e.a])[c] * m.point(idx[e.b])[c];
      term *= dptree::kernel_eval(gaps.kernel(), gaps.epsilon(), dot - gaps.target(e));
    }
    total += term;
    std::size_t pos = 0;
    while (pos < v && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == v) break;
  }
  return total;
}

inline dptree::DiscreteMeasure from_points(std::size_t dim, std::vector<double> coords) {
  const std::size_t n = coords.size() / dim;
  return dptree::DiscreteMeasure(dim, std::move(coords), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

}  // namespace testing
