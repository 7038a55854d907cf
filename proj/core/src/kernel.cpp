#include "dptree/kernel.hpp"

#include <cmath>

#include "dptree/error.hpp"

namespace dptree {
namespace {

// exp(1 - 1/(1 - v^2)) on |v| < 1, peak value 1 at v = 0.
double bump_profile(double v) {
  const double q = 1.0 - v * v;
  return q > 0.0 ? std::exp(1.0 - 1.0 / q) : 0.0;
}

// Integral of bump_profile over (-1, 1). The integrand is flat at the
// endpoints, so a fine midpoint rule is accurate to machine precision.
double bump_area() {
  static const double area = [] {
    constexpr int cells = 200000;
    const double h = 2.0 / cells;
    double acc = 0.0;
    for (int i = 0; i < cells; ++i) acc += bump_profile(-1.0 + (i + 0.5) * h);
    return acc * h;
  }();
  return area;
}

}  // namespace

std::string_view to_string(KernelKind kind) noexcept {
  switch (kind) {
    case KernelKind::Indicator: return "indicator";
    case KernelKind::Triangle: return "triangle";
    case KernelKind::SmoothBump: return "bump";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "indicator") return KernelKind::Indicator;
  if (name == "triangle") return KernelKind::Triangle;
  if (name == "bump" || name == "smooth-bump") return KernelKind::SmoothBump;
  fail(ErrorKind::UnknownKernel, "unknown kernel '" + std::string(name) + "'");
}

std::string describe(const Kernel& kernel) {
  return std::string(to_string(kernel.kind)) + (kernel.normalized ? "/normalized" : "/raw");
}

double raw_mass(KernelKind kind, double epsilon) {
  switch (kind) {
    case KernelKind::Indicator: return 2.0 * epsilon;
    case KernelKind::Triangle: return epsilon;
    case KernelKind::SmoothBump: return epsilon * bump_area();
  }
  fail(ErrorKind::UnknownKernel, "unknown kernel kind");
}

double kernel_eval(const Kernel& kernel, double epsilon, double u) {
  if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
  const double a = std::abs(u);
  if (!(a < epsilon)) return 0.0;
  double raw = 0.0;
  switch (kernel.kind) {
    case KernelKind::Indicator: raw = 1.0; break;
    case KernelKind::Triangle: raw = 1.0 - a / epsilon; break;
    case KernelKind::SmoothBump: raw = bump_profile(a / epsilon); break;
  }
  return kernel.normalized ? raw / raw_mass(kernel.kind, epsilon) : raw;
}

double integrate_kernel(const Kernel& kernel, double epsilon, int cells) {
  const double h = 2.0 * epsilon / cells;
  double acc = 0.0;
  for (int i = 0; i < cells; ++i) acc += kernel_eval(kernel, epsilon, -epsilon + (i + 0.5) * h);
  return acc * h;
}

}  // namespace dptree
