#pragma once

#include <string>

#include "gradnorm/transport.hpp"

namespace gradnorm {

struct TransportPlan {
  Matrix X;             ///< nonnegative, entries sum to 1
  Vector row_residual;  ///< X 1 - source
  Vector col_residual;  ///< X' 1 - target
};

/// Recovered primal quality of a dual point.
struct Certificate {
  double eps_f = 0.0;         ///< max(0, eps_f_signed)
  double eps_f_signed = 0.0;  ///< <lambda, grad phi(lambda)>
  double eps_eq = 0.0;        ///< ||grad phi(lambda)|| = ||A vec X - b||
  double dual_value = 0.0;    ///< phi(lambda)
};

struct TransportCost {
  double linear = 0.0;     ///< <C, X>
  double entropy = 0.0;    ///< E(X) = -sum X ln X, with 0 ln 0 = 0
  double entropic = 0.0;   ///< <C, X> - gamma E(X)
};

/// X(lambda) computed in the log domain.
TransportPlan primal_plan(const Vector& lambda, const TransportInstance& inst);

/// For the plan X(lambda), f(X) - f* <= f(X) + phi(lambda) = <lambda, grad phi>,
/// where f is the entropic objective; the marginal error is ||grad phi||.
Certificate certificate(const Vector& lambda, const TransportInstance& inst);

TransportCost transport_cost(const TransportPlan& plan, const TransportInstance& inst);

void write_plan_csv(const std::string& path, const TransportPlan& plan);

}  // namespace gradnorm
