#include "gradnorm/taylor_step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gradnorm/errors.hpp"

namespace gradnorm {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

void validate_step_args(const Oracle& oracle, const Vector& x, int p, double M) {
  require_order(oracle, p);
  if (x.size() != oracle.dimension()) throw InputError("tensor step: dimension mismatch");
  if (!(M > 0.0) || !std::isfinite(M)) throw InputError("tensor step: M must be positive and finite");
  require_finite(x, "tensor step base point");
}

TensorStepResult finish(const TaylorModel& model, const Vector& h, int iterations) {
  TensorStepResult r;
  r.y = model.base_point() + h;
  r.model_value = model.value(h);
  r.model_grad_norm = model.gradient(h).norm();
  r.inner_iterations = iterations;
  return r;
}

// Residual one cannot expect to beat in double precision.
double noise_floor(const TaylorModel& model, const Vector& h) {
  const double hn = h.norm();
  double scale = model.base_gradient().norm();
  if (model.order() >= 2) scale += model.base_hessian().norm() * hn;
  scale += model.regularization() * std::pow(hn, model.order());
  return 1e3 * kEps * scale;
}

// Secular equation (H + (M/2) r I) h = -g with r = ||h||.
Vector cubic_step(const TaylorModel& model, int& iterations) {
  const Vector& g = model.base_gradient();
  const double M = model.regularization();
  if (g.norm() == 0.0) return Vector::Zero(g.size());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(model.base_hessian());
  const Vector& lam = eig.eigenvalues();
  const Vector c = eig.eigenvectors().transpose() * g;
  const double lam_min = lam.minCoeff();

  auto step_norm = [&](double r) {
    const Eigen::ArrayXd denom = lam.array() + 0.5 * M * r;
    return (c.array() / denom).matrix().norm();
  };

  double lo = std::max(0.0, -2.0 * lam_min / M);
  double hi = std::sqrt(2.0 * g.norm() / M) + 2.0 * std::max(0.0, -lam_min) / M;
  hi = std::max(hi, lo) * 2.0 + std::numeric_limits<double>::min();
  while (step_norm(hi) > hi) hi *= 2.0;

  iterations = 0;
  for (; iterations < 100; ++iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (step_norm(mid) > mid) lo = mid; else hi = mid;
  }
  const double r = hi;
  const Eigen::ArrayXd denom = lam.array() + 0.5 * M * r;
  return -(eig.eigenvectors() * (c.array() / denom).matrix());
}

// Gradient-regularized Newton on the convex quartic model:
//   s = -(∇²m(h) + sqrt(Lh ||∇m(h)||) I)^{-1} ∇m(h), with Lh adapted by backtracking.
Vector quartic_step(const TaylorModel& model, double tol, int max_iterations, int& iterations) {
  const Eigen::Index n = model.base_point().size();
  Vector h = Vector::Zero(n);
  Vector grad = model.gradient(h);
  double value = model.value(h);
  double lh = model.regularization();
  const double lh_floor = 1e-12 * model.regularization();

  Vector best = h;
  double best_norm = grad.norm();

  for (iterations = 0; iterations < max_iterations; ++iterations) {
    const double gnorm = grad.norm();
    if (gnorm <= tol) return h;
    if (gnorm <= noise_floor(model, h)) return h;

    const Matrix hess = model.hessian(h);
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double lambda = std::sqrt(lh * gnorm);
      Matrix sys = hess;
      sys.diagonal().array() += lambda;
      Eigen::LLT<Matrix> llt(sys);
      if (llt.info() != Eigen::Success) {
        lh *= 4.0;
        continue;
      }
      const Vector s = -llt.solve(grad);
      const Vector trial = h + s;
      const double trial_value = model.value(trial);
      const Vector trial_grad = model.gradient(trial);
      const bool armijo = trial_value <= value + 0.25 * grad.dot(s);
      // Near the solution model values lose resolution; fall back on the gradient norm.
      const bool grad_progress = trial_value <= value + 1e2 * kEps * std::abs(value) &&
                                 trial_grad.norm() < gnorm;
      if (std::isfinite(trial_value) && (armijo || grad_progress)) {
        h = trial;
        value = trial_value;
        grad = trial_grad;
        lh = std::max(lh * 0.25, lh_floor);
        accepted = true;
        break;
      }
      lh *= 4.0;
    }
    if (grad.norm() < best_norm) {
      best = h;
      best_norm = grad.norm();
    }
    if (!accepted) break;
  }
  if (best_norm <= std::max(tol, noise_floor(model, best))) return best;
  throw SubproblemError("order-3 tensor step stalled at model gradient norm " +
                            std::to_string(best_norm) + " (tolerance " + std::to_string(tol) + ")",
                        model.base_point() + best, best_norm);
}

}  // namespace

TaylorModel::TaylorModel(const Oracle& oracle, const Vector& x, int p, double M)
    : oracle_(oracle), x_(x), p_(p), M_(M) {
  require_order(oracle, p);
  if (!(M >= 0.0)) throw InputError("Taylor model: M must be >= 0");
  f0_ = oracle.value(x);
  g_ = oracle.gradient(x);
  require_finite(f0_, "value");
  require_finite(g_, "gradient");
  if (p >= 2) {
    H_ = oracle.hessian(x);
    if (!H_.allFinite()) throw EvaluationError("non-finite Hessian");
  }
}

double TaylorModel::value(const Vector& h) const {
  const double hn = h.norm();
  double v = f0_ + g_.dot(h);
  if (p_ >= 2) v += 0.5 * h.dot(H_ * h);
  if (p_ >= 3) v += oracle_.third_contract(x_, h).scalar / 6.0;
  return v + M_ / factorial(p_ + 1) * std::pow(hn, p_ + 1);
}

Vector TaylorModel::gradient(const Vector& h) const {
  const double hn = h.norm();
  Vector g = g_;
  if (p_ >= 2) g += H_ * h;
  if (p_ >= 3) g += 0.5 * oracle_.third_contract(x_, h).vector;
  // d/dh of M/(p+1)! ||h||^{p+1} = M/p! ||h||^{p-1} h
  if (hn > 0.0) g += M_ / factorial(p_) * std::pow(hn, p_ - 1) * h;
  return g;
}

Matrix TaylorModel::hessian(const Vector& h) const {
  if (p_ < 2) throw CapabilityError("Taylor model Hessian needs p >= 2");
  const Eigen::Index n = h.size();
  const double hn = h.norm();
  Matrix m = H_;
  if (p_ >= 3) m += third_directional_hessian(oracle_, x_, h);
  if (hn > 0.0) {
    // Hessian of c ||h||^{p+1} with c = M/(p+1)!:  c (p+1) ||h||^{p-3} (||h||^2 I + (p-1) h h^T)
    const double c = M_ / factorial(p_) * std::pow(hn, p_ - 3);
    m += c * (hn * hn * Matrix::Identity(n, n) + (p_ - 1) * h * h.transpose());
  }
  return m;
}

double taylor_model_value(const Oracle& oracle, const Vector& x, const Vector& y, int p, double M) {
  if (y.size() != x.size() || x.size() != oracle.dimension()) {
    throw InputError("taylor_model_value: dimension mismatch");
  }
  const TaylorModel model(oracle, x, p, M);
  return model.value(y - x);
}

double default_step_tolerance(double target_eps) { return std::max(1e-10, 1e-3 * target_eps); }

TensorStepResult tensor_step(const Oracle& oracle, const Vector& x, int p, double M,
                             const TensorStepOptions& opts) {
  validate_step_args(oracle, x, p, M);
  const TaylorModel model(oracle, x, p, M);
  const double tol = std::min(opts.tol, opts.relative_tol * model.base_gradient().norm());

  int iterations = 0;
  Vector h;
  if (p == 1) {
    h = -model.base_gradient() / M;
  } else if (p == 2) {
    h = cubic_step(model, iterations);
  } else {
    h = quartic_step(model, tol, opts.max_iterations, iterations);
  }
  TensorStepResult r = finish(model, h, iterations);
  if (!r.y.allFinite()) throw EvaluationError("tensor step produced a non-finite point");
  if (r.model_grad_norm > std::max(tol, noise_floor(model, h))) {
    throw SubproblemError("tensor step (p=" + std::to_string(p) + ") model gradient norm " +
                              std::to_string(r.model_grad_norm) + " exceeds tolerance",
                          r.y, r.model_grad_norm);
  }
  return r;
}

Vector brute_force_tensor_step(const Oracle& oracle, const Vector& x, int p, double M,
                               double radius, int grid) {
  const Eigen::Index n = x.size();
  if (n > 3) throw CapabilityError("brute_force_tensor_step: dimension " + std::to_string(n) + " > 3");
  if (grid < 10) throw InputError("brute_force_tensor_step: grid must be >= 10");
  if (!(radius > 0.0)) throw InputError("brute_force_tensor_step: radius must be positive");
  validate_step_args(oracle, x, p, M);
  const TaylorModel model(oracle, x, p, M);

  const double spacing = 2.0 * radius / (grid - 1);
  Vector best = Vector::Zero(n);
  double best_value = model.value(best);

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector h(n);
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) h[i] = -radius + spacing * idx[static_cast<std::size_t>(i)];
    if (h.norm() <= radius) {
      const double v = model.value(h);
      if (v < best_value) {
        best_value = v;
        best = h;
      }
    }
    Eigen::Index d = 0;
    while (d < n && ++idx[static_cast<std::size_t>(d)] == grid) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == n) break;
  }

  // Compass search, halving the pattern when no coordinate move improves.
  double step = spacing;
  while (step > 1e-13 * std::max(1.0, radius)) {
    bool improved = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector trial = best;
        trial[i] += sign * step;
        const double v = model.value(trial);
        if (v < best_value) {
          best_value = v;
          best = trial;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return x + best;
}

DecreaseCheck check_step_decrease(double f_x, double f_z, double grad_norm_z, int p, double M) {
  DecreaseCheck c;
  c.decrease = f_x - f_z;
  c.required = std::pow(grad_norm_z, (p + 1.0) / p) / (8.0 * factorial(p + 1) * std::pow(M, 1.0 / p));
  c.slack = 16.0 * kEps * (std::abs(f_x) + std::abs(f_z));
  c.holds = c.decrease + c.slack >= c.required;
  return c;
}

double measured_decrease(const Oracle& oracle, const Vector& x, const Vector& z) {
  const double f_x = oracle.value(x);
  const double f_z = oracle.value(z);
  const double direct = f_x - f_z;
  if (std::abs(direct) > 256.0 * kEps * (std::abs(f_x) + std::abs(f_z))) return direct;
  // f(x) - f(z) = int_0^1 <grad f(z + t (x - z)), x - z> dt
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                      0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};
  const Vector d = x - z;
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double t = 0.5 * (nodes[i] + 1.0);
    sum += 0.5 * weights[i] * oracle.gradient(z + t * d).dot(d);
  }
  return sum;
}

DecreaseCheck check_step_decrease(const Oracle& oracle, const Vector& x, const Vector& z, int p, double M) {
  const double f_x = oracle.value(x);
  const double f_z = oracle.value(z);
  DecreaseCheck c = check_step_decrease(f_x, f_z, oracle.gradient(z).norm(), p, M);
  c.decrease = measured_decrease(oracle, x, z);
  c.holds = c.decrease + c.slack >= c.required;
  return c;
}

}  // namespace gradnorm
