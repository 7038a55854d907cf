#pragma once

#include <string>
#include <string_view>

namespace dptree {

enum class KernelKind { Indicator, Triangle, SmoothBump };

/// Window function rho^eps(u) = eps^-1 rho(u / eps) supported on |u| < eps.
/// Raw kernels peak at 1; normalized kernels integrate to 1 over u.
struct Kernel {
  KernelKind kind = KernelKind::Indicator;
  bool normalized = false;

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

std::string_view to_string(KernelKind kind) noexcept;
/// Accepts "indicator", "triangle", "bump"; throws UnknownKernel otherwise.
KernelKind parse_kernel_kind(std::string_view name);
std::string describe(const Kernel& kernel);

/// Evaluates the kernel at u. The window is open: |u| >= eps gives 0.
double kernel_eval(const Kernel& kernel, double epsilon, double u);

/// Integral of the raw kernel over u, i.e. the factor relating raw and
/// normalized values: raw(u) = normalized(u) * raw_mass(eps).
double raw_mass(KernelKind kind, double epsilon);

/// Midpoint-rule integral of kernel_eval over (-eps, eps); used to check
/// normalization at construction time.
double integrate_kernel(const Kernel& kernel, double epsilon, int cells = 4000);

}  // namespace dptree
