#pragma once

#include "gradnorm/oracle.hpp"

namespace gradnorm {

/// Derivatives of f frozen at a base point x, used to evaluate the
/// regularized p-th order Taylor model
///   m(y) = sum_{r<=p} (1/r!) D^r f(x)[y-x]^r + M/(p+1)! ||y-x||^{p+1}.
class TaylorModel {
 public:
  TaylorModel(const Oracle& oracle, const Vector& x, int p, double M);

  int order() const { return p_; }
  double regularization() const { return M_; }
  const Vector& base_point() const { return x_; }
  const Vector& base_gradient() const { return g_; }
  /// Empty for p = 1.
  const Matrix& base_hessian() const { return H_; }

  /// Model value at displacement h = y - x.
  double value(const Vector& h) const;
  /// Model gradient with respect to h.
  Vector gradient(const Vector& h) const;
  /// Model Hessian with respect to h (p >= 2).
  Matrix hessian(const Vector& h) const;

 private:
  const Oracle& oracle_;
  Vector x_;
  int p_;
  double M_;
  double f0_;
  Vector g_;
  Matrix H_;
};

double taylor_model_value(const Oracle& oracle, const Vector& x, const Vector& y, int p, double M);

struct TensorStepOptions {
  /// Absolute tolerance on the model gradient norm at the returned point.
  double tol = 1e-10;
  /// The effective tolerance is min(tol, relative_tol * ||grad f(x)||).
  double relative_tol = 1e-7;
  int max_iterations = 5000;
};

/// Subproblem tolerance policy: max(1e-10, 1e-3 * target gradient norm).
double default_step_tolerance(double target_eps);

struct TensorStepResult {
  Vector y;
  double model_value = 0.0;
  double model_grad_norm = 0.0;
  int inner_iterations = 0;
};

/// Minimizer of the regularized Taylor model at x.
///
/// p = 1 is closed form, p = 2 solves the secular equation in ||h|| on the
/// Hessian eigenbasis, p = 3 runs gradient-regularized Newton iterations on
/// the convex quartic model (convex whenever M >= 3 M_3).
TensorStepResult tensor_step(const Oracle& oracle, const Vector& x, int p, double M,
                             const TensorStepOptions& opts = {});

/// Grid search over the ball of `radius` around x followed by compass-search
/// refinement. Reference solver for tests; n <= 3 only.
Vector brute_force_tensor_step(const Oracle& oracle, const Vector& x, int p, double M,
                               double radius, int grid);

/// Decrease-versus-gradient inequality for a step z = T_{p,M}(x) with M >= p M_p:
///   f(x) - f(z) >= ||grad f(z)||^{(p+1)/p} / (8 (p+1)! M^{1/p}).
struct DecreaseCheck {
  double decrease = 0.0;
  double required = 0.0;
  /// Rounding allowance on the decrease, a few ulps of |f(x)| + |f(z)|.
  double slack = 0.0;
  bool holds = true;
};

DecreaseCheck check_step_decrease(double f_x, double f_z, double grad_norm_z, int p, double M);

/// f(x) - f(z). When the plain difference is within a few hundred ulps of
/// |f(x)| + |f(z)| it is dominated by evaluation noise, and the gradient is
/// integrated along the segment instead (five-point Gauss-Legendre, exact for
/// polynomials up to degree 9).
double measured_decrease(const Oracle& oracle, const Vector& x, const Vector& z);

/// As above, with the decrease taken from measured_decrease.
DecreaseCheck check_step_decrease(const Oracle& oracle, const Vector& x, const Vector& z, int p, double M);

}  // namespace gradnorm
