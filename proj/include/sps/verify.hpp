#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sps/grid.hpp"

namespace sps {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      ///< measured error (or order)
  double tolerance = 0.0;  ///< pass threshold
  std::string detail;
};

using KernelFn = std::function<std::vector<double>(const RadialGrid&, std::span<const double>)>;

struct VerifyOptions {
  KernelFn kernel;  ///< defaults to apply_kernel; tests inject mutants here
  unsigned long long seed = 7;
  int random_pairs = 20;
  int identity_fields = 25;  ///< per exponent
  /// Kernel oracle grid; the order is measured on n/2, n and 2n nodes, so
  /// n/2 must still be a valid grid.
  int kernel_nodes = 2048;
};

/// Oracle suite behind `verify`: kernel closed form and convergence order,
/// kernel symmetry, Poisson residual, r^2 Laplacian, ball volume, gradient
/// and Jacobian against central differences, the energy bound identity and
/// the sign symmetries of E and of the flow step.
std::vector<PropertyResult> run_verification(const VerifyOptions& options = {});

/// Closed-form potential of the indicator density on [0, a]:
/// a^2/2 - r^2/6 inside, a^3/(3r) outside.
double indicator_potential(double r, double a);

}  // namespace sps
