#include "gradnorm/fd_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gradnorm/errors.hpp"

namespace gradnorm {

const FdOrderReport& FdReport::at(int order) const {
  for (const auto& r : orders) {
    if (r.order == order) return r;
  }
  throw InputError("fd report has no entry for order " + std::to_string(order));
}

namespace {

double default_step(int order, const Vector& x) {
  static constexpr double base[] = {1e-6, 1e-5, 1e-4};
  return base[order - 1] * (1.0 + x.norm());
}

double default_tolerance(int order) { return order == 3 ? 1e-4 : 1e-5; }

// Largest |a - b| relative to max(1, |a|_inf); returns the index through `worst`.
double compare(const Vector& analytic, const Vector& numeric, int& worst) {
  const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
  Eigen::Index idx = 0;
  const double err = (analytic - numeric).cwiseAbs().maxCoeff(&idx) / scale;
  worst = static_cast<int>(idx);
  return err;
}

std::vector<Vector> third_order_directions(Eigen::Index n) {
  Vector alternating(n);
  for (Eigen::Index i = 0; i < n; ++i) alternating[i] = (i % 2 == 0) ? 1.0 : -0.5;
  std::mt19937_64 rng(20190501);
  std::normal_distribution<double> normal;
  Vector random(n);
  for (Eigen::Index i = 0; i < n; ++i) random[i] = normal(rng);
  return {alternating.normalized(), random.normalized()};
}

}  // namespace

FdReport fd_check(const Oracle& oracle, const Vector& x, int max_order, const FdOptions& opts) {
  if (x.size() != oracle.dimension()) throw InputError("fd_check: dimension mismatch");
  if (max_order < 1 || max_order > 3) throw InputError("fd_check: order must be 1, 2 or 3");
  if (max_order > oracle.order_supported()) {
    throw CapabilityError("fd_check: oracle does not support order " + std::to_string(max_order));
  }
  if (opts.step && !(*opts.step > 0.0)) throw InputError("fd_check: step must be positive");
  require_finite(x, "point passed to fd_check");

  const Eigen::Index n = x.size();
  FdReport report;

  for (int order = 1; order <= max_order; ++order) {
    FdOrderReport r;
    r.order = order;
    r.step = opts.step.value_or(default_step(order, x));
    r.tolerance = opts.tolerance.value_or(default_tolerance(order));
    const double t = r.step;
    Vector probe = x;

    if (order == 1) {
      const Vector g = oracle.gradient(x);
      require_finite(g, "gradient");
      Vector fd(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        probe[i] = x[i] + t;
        const double fp = oracle.value(probe);
        probe[i] = x[i] - t;
        const double fm = oracle.value(probe);
        probe[i] = x[i];
        require_finite(fp, "value");
        require_finite(fm, "value");
        fd[i] = (fp - fm) / (2.0 * t);
      }
      r.max_rel_error = compare(g, fd, r.worst_coordinate);
    } else if (order == 2) {
      const Matrix h = oracle.hessian(x);
      if (!h.allFinite()) throw EvaluationError("non-finite Hessian");
      const double hscale = std::max(1.0, h.cwiseAbs().maxCoeff());
      report.hessian_asymmetry = (h - h.transpose()).cwiseAbs().maxCoeff() / hscale;
      r.max_rel_error = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        probe[j] = x[j] + t;
        const Vector gp = oracle.gradient(probe);
        probe[j] = x[j] - t;
        const Vector gm = oracle.gradient(probe);
        probe[j] = x[j];
        require_finite(gp, "gradient");
        require_finite(gm, "gradient");
        const Vector col = (gp - gm) / (2.0 * t);
        const double err = (h.col(j) - col).cwiseAbs().maxCoeff() / hscale;
        if (err > r.max_rel_error || r.worst_coordinate < 0) {
          r.max_rel_error = std::max(r.max_rel_error, err);
          r.worst_coordinate = static_cast<int>(j);
        }
      }
      if (report.hessian_asymmetry > opts.symmetry_tolerance) r.pass = false;
    } else {
      r.max_rel_error = 0.0;
      for (const Vector& dir : third_order_directions(n)) {
        const ThirdContraction tc = oracle.third_contract(x, dir);
        require_finite(tc.vector, "third-order contraction");
        Vector fd(n);
        for (Eigen::Index j = 0; j < n; ++j) {
          probe[j] = x[j] + t;
          const double qp = dir.dot(oracle.hessian(probe) * dir);
          probe[j] = x[j] - t;
          const double qm = dir.dot(oracle.hessian(probe) * dir);
          probe[j] = x[j];
          fd[j] = (qp - qm) / (2.0 * t);
        }
        int worst = -1;
        double err = compare(tc.vector, fd, worst);
        const double scalar_err =
            std::abs(tc.scalar - tc.vector.dot(dir)) / std::max(1.0, std::abs(tc.scalar));
        err = std::max(err, scalar_err);
        if (err > r.max_rel_error || r.worst_coordinate < 0) {
          r.max_rel_error = std::max(r.max_rel_error, err);
          r.worst_coordinate = worst;
        }
      }
    }
    require_finite(r.max_rel_error, "finite-difference error");
    r.pass = r.pass && r.max_rel_error <= r.tolerance;
    report.pass = report.pass && r.pass;
    report.orders.push_back(r);
  }
  return report;
}

}  // namespace gradnorm
