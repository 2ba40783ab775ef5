#pragma once

#include <optional>
#include <vector>

#include "gradnorm/oracle.hpp"

namespace gradnorm {

struct FdOptions {
  /// Absolute step used for every order. Default: 1e-6, 1e-5, 1e-4 times (1 + ||x||)
  /// for orders 1, 2, 3.
  std::optional<double> step;
  /// Tolerance used for every order. Default: 1e-5, 1e-5, 1e-4.
  std::optional<double> tolerance;
  double symmetry_tolerance = 1e-12;
};

struct FdOrderReport {
  int order = 0;
  double max_rel_error = 0.0;
  /// Coordinate (derivative component or perturbed coordinate) with the worst error.
  int worst_coordinate = -1;
  double step = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct FdReport {
  std::vector<FdOrderReport> orders;
  /// Relative asymmetry of the analytic Hessian, when order >= 2 was checked.
  double hessian_asymmetry = 0.0;
  bool pass = true;

  const FdOrderReport& at(int order) const;
};

/// Central-difference check of analytic derivatives of orders 1..max_order at x.
/// Errors are measured relative to max(1, |analytic|_inf). Order 3 is checked
/// along two fixed directions through differences of <H(.)h, h>.
FdReport fd_check(const Oracle& oracle, const Vector& x, int max_order, const FdOptions& opts = {});

}  // namespace gradnorm
