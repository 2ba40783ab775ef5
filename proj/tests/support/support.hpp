#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include <Eigen/Dense>

#include "gradnorm/oracle.hpp"

namespace gradnorm::testing {

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * normal(rng);
  return v;
}

/// f(x) = 1/2 x'Qx + b'x + sum_j (c_j / 4) <a_j, x>^4, convex with
/// M_3 = 6 sum_j c_j ||a_j||^4.
class RandomQuartic : public Oracle {
 public:
  RandomQuartic(int n, std::uint64_t seed, int terms = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.2, 1.0);
    Matrix G(n, n);
    for (int j = 0; j < n; ++j) G.col(j) = random_vector(rng, n);
    Q_ = 0.2 * G * G.transpose() / n + 0.05 * Matrix::Identity(n, n);
    b_ = random_vector(rng, n);
    A_.resize(terms, n);
    c_.resize(terms);
    for (int j = 0; j < terms; ++j) {
      A_.row(j) = random_vector(rng, n).transpose();
      c_(j) = unit(rng);
    }
  }
  int dimension() const override { return static_cast<int>(b_.size()); }
  int order_supported() const override { return 3; }
  double value(const Vector& x) const override {
    const Vector t = A_ * x;
    return 0.5 * x.dot(Q_ * x) + b_.dot(x) + 0.25 * c_.dot(t.array().pow(4).matrix());
  }
  Vector gradient(const Vector& x) const override {
    const Vector t = A_ * x;
    return Q_ * x + b_ + A_.transpose() * (c_.array() * t.array().cube()).matrix();
  }
  Matrix hessian(const Vector& x) const override {
    const Vector t = A_ * x;
    const Vector w = 3.0 * (c_.array() * t.array().square()).matrix();
    return Q_ + A_.transpose() * w.asDiagonal() * A_;
  }
  ThirdContraction third_contract(const Vector& x, const Vector& h) const override {
    const Vector t = A_ * x;
    const Vector s = A_ * h;
    const Vector w = 6.0 * (c_.array() * t.array() * s.array().square()).matrix();
    return {A_.transpose() * w, w.dot(s)};
  }
  std::optional<double> lipschitz(int p) const override {
    if (p != 3) return std::nullopt;
    return 6.0 * (c_.array() * A_.rowwise().squaredNorm().array().square()).sum();
  }

 private:
  Matrix Q_;
  Vector b_;
  Matrix A_;
  Vector c_;
};

/// Oracle built from closures; lipschitz(p) returns `constants[p-1]` when set.
class LambdaOracle : public Oracle {
 public:
  int n = 1;
  int order = 1;
  std::function<double(const Vector&)> f;
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> H;
  std::optional<double> constants[3];

  int dimension() const override { return n; }
  int order_supported() const override { return order; }
  double value(const Vector& x) const override { return f(x); }
  Vector gradient(const Vector& x) const override { return g(x); }
  Matrix hessian(const Vector& x) const override {
    if (!H) return Oracle::hessian(x);
    return H(x);
  }
  std::optional<double> lipschitz(int p) const override {
    if (p < 1 || p > 3) return std::nullopt;
    return constants[p - 1];
  }
};

/// f(x) = 1/2 ||x||^2 in n dimensions (third derivative zero).
inline std::shared_ptr<LambdaOracle> half_squared_norm(int n) {
  auto o = std::make_shared<LambdaOracle>();
  o->n = n;
  o->order = 2;
  o->f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  o->g = [](const Vector& x) { return x; };
  o->H = [n](const Vector&) { return Matrix::Identity(n, n); };
  o->constants[0] = 1.0;
  o->constants[1] = 0.0;
  return o;
}

/// Central-difference gradient, independent of the library's checker.
inline Vector fd_gradient(const Oracle& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f.value(a) - f.value(b)) / (2 * h);
  }
  return g;
}

/// Damped Newton with a pseudo-inverse step, run to stationarity.
inline Vector newton_reference(const Oracle& f, Vector x, int max_iterations = 300) {
  for (int it = 0; it < max_iterations; ++it) {
    const Vector g = f.gradient(x);
    if (g.norm() < 1e-14) break;
    const Vector d = -f.hessian(x).completeOrthogonalDecomposition().solve(g);
    double t = 1.0;
    const double f0 = f.value(x);
    while (t > 1e-10 && f.value(x + t * d) > f0 + 1e-4 * t * g.dot(d)) t *= 0.5;
    if (t <= 1e-10) {
      if (f.gradient(x + d).norm() >= g.norm()) break;
      t = 1.0;
    }
    x += t * d;
  }
  return x;
}

}  // namespace gradnorm::testing
