#include "gradnorm/ot_recovery.hpp"

#include <cmath>

#include "gradnorm/csv.hpp"
#include "gradnorm/errors.hpp"

namespace gradnorm {

TransportPlan primal_plan(const Vector& lambda, const TransportInstance& inst) {
  inst.validate();
  require_finite(lambda, "lambda");
  const OtDualOracle dual(inst);
  TransportPlan plan;
  plan.X = dual.plan(lambda);
  plan.row_residual = plan.X.rowwise().sum() - inst.source;
  plan.col_residual = plan.X.colwise().sum().transpose() - inst.target;
  return plan;
}

Certificate certificate(const Vector& lambda, const TransportInstance& inst) {
  require_finite(lambda, "lambda");
  const OtDualOracle dual(inst);
  const Vector g = dual.gradient(lambda);
  Certificate c;
  c.eps_f_signed = lambda.dot(g);
  c.eps_f = std::max(0.0, c.eps_f_signed);
  c.eps_eq = g.norm();
  c.dual_value = dual.value(lambda);
  return c;
}

TransportCost transport_cost(const TransportPlan& plan, const TransportInstance& inst) {
  if (plan.X.rows() != inst.size() || plan.X.cols() != inst.size()) {
    throw InputError("transport_cost: plan and instance sizes differ");
  }
  TransportCost out;
  out.linear = (plan.X.array() * inst.cost.array()).sum();
  double e = 0.0;
  for (Eigen::Index j = 0; j < plan.X.cols(); ++j)
    for (Eigen::Index i = 0; i < plan.X.rows(); ++i) {
      const double x = plan.X(i, j);
      if (x < 0.0) throw InputError("transport_cost: negative plan entry");
      if (x > 0.0) e -= x * std::log(x);
    }
  out.entropy = e;
  out.entropic = out.linear - inst.gamma * e;
  return out;
}

void write_plan_csv(const std::string& path, const TransportPlan& plan) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < plan.X.cols(); ++j) header.push_back("col" + std::to_string(j));
  write_csv_matrix(path, plan.X, header);
}

}  // namespace gradnorm
