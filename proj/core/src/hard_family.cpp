#include <cmath>

#include "gradnorm/errors.hpp"
#include "gradnorm/problems.hpp"

namespace gradnorm {

namespace {

double sign(double v) { return (v > 0) - (v < 0); }

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

}  // namespace

void HardFamilySpec::validate() const {
  if (p < 1 || p > 3) throw InputError("hard family: p must be 1, 2 or 3");
  if (n < 2) throw InputError("hard family: n must be >= 2");
  if (m < 2 || m > n) throw InputError("hard family: need 2 <= m <= n");
}

HardFamilyOracle::HardFamilyOracle(HardFamilySpec spec) : spec_(spec) { spec_.validate(); }

Vector HardFamilyOracle::apply_A(const Vector& x) const {
  Vector u = x;
  for (int i = 0; i + 1 < spec_.m; ++i) u(i) -= x(i + 1);
  return u;
}

Vector HardFamilyOracle::apply_At(const Vector& v) const {
  Vector w = v;
  for (int j = 1; j < spec_.m; ++j) w(j) -= v(j - 1);
  return w;
}

Matrix HardFamilyOracle::A() const {
  Matrix a = Matrix::Identity(spec_.n, spec_.n);
  for (int i = 0; i + 1 < spec_.m; ++i) a(i, i + 1) = -1.0;
  return a;
}

double HardFamilyOracle::value(const Vector& x) const {
  const Vector u = apply_A(x);
  return u.cwiseAbs().array().pow(spec_.p + 1).sum() / (spec_.p + 1) - x(0);
}

Vector HardFamilyOracle::gradient(const Vector& x) const {
  const Vector u = apply_A(x);
  Vector d(u.size());
  for (int i = 0; i < u.size(); ++i) d(i) = sign(u(i)) * std::pow(std::abs(u(i)), spec_.p);
  Vector g = apply_At(d);
  g(0) -= 1.0;
  return g;
}

Matrix HardFamilyOracle::hessian(const Vector& x) const {
  const Vector u = apply_A(x);
  Vector d(u.size());
  for (int i = 0; i < u.size(); ++i) d(i) = spec_.p * std::pow(std::abs(u(i)), spec_.p - 1);
  const Matrix a = A();
  Matrix H = a.transpose() * d.asDiagonal() * a;
  return 0.5 * (H + H.transpose());
}

ThirdContraction HardFamilyOracle::third_contract(const Vector& x, const Vector& h) const {
  const int p = spec_.p;
  const Vector u = apply_A(x);
  const Vector s = apply_A(h);
  Vector coef = Vector::Zero(u.size());
  double scalar = 0.0;
  if (p >= 2) {
    for (int i = 0; i < u.size(); ++i) {
      const double t3 = p * (p - 1) * std::pow(std::abs(u(i)), p - 2) * sign(u(i));
      coef(i) = t3 * s(i) * s(i);
      scalar += coef(i) * s(i);
    }
  }
  return {apply_At(coef), scalar};
}

std::optional<double> HardFamilyOracle::lipschitz(int p) const {
  if (p != spec_.p) return std::nullopt;
  return factorial(p) * std::pow(2.0, p + 1);
}

std::shared_ptr<HardFamilyOracle> hard_family_problem(HardFamilySpec spec) {
  return std::make_shared<HardFamilyOracle>(spec);
}

Vector hard_family_minimizer(const HardFamilySpec& spec) {
  spec.validate();
  Vector x = Vector::Zero(spec.n);
  for (int i = 0; i < spec.m; ++i) x(i) = spec.m - i;
  return x;
}

double hard_family_optimal_value(const HardFamilySpec& spec) {
  spec.validate();
  return -static_cast<double>(spec.m) * spec.p / (spec.p + 1.0);
}

}  // namespace gradnorm
