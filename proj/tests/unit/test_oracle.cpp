#include <gtest/gtest.h>

#include <random>

#include "gradnorm/errors.hpp"
#include "gradnorm/fd_check.hpp"
#include "gradnorm/oracle.hpp"
#include "gradnorm/problems.hpp"
#include "support/support.hpp"

using namespace gradnorm;
using gradnorm::testing::half_squared_norm;
using gradnorm::testing::LambdaOracle;
using gradnorm::testing::RandomQuartic;

namespace {

std::shared_ptr<LambdaOracle> zero_oracle() {
  auto o = std::make_shared<LambdaOracle>();
  o->n = 1;
  o->order = 2;
  o->f = [](const Vector&) { return 0.0; };
  o->g = [](const Vector&) { return Vector::Zero(1); };
  o->H = [](const Vector&) { return Matrix::Zero(1, 1); };
  o->constants[0] = 0.0;
  return o;
}

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST(MakeRegularized, PureQuadraticAroundZero) {
  auto view = make_regularized(zero_oracle(), Vector::Zero(1), 2.0);
  EXPECT_DOUBLE_EQ(view->value(v1(3.0)), 9.0);
  EXPECT_DOUBLE_EQ(view->gradient(v1(3.0))(0), 6.0);
  EXPECT_DOUBLE_EQ(view->hessian(v1(3.0))(0, 0), 2.0);
}

TEST(MakeRegularized, ZeroCoefficientIsIdentity) {
  auto base = half_squared_norm(1);
  auto view = make_regularized(base, Vector::Zero(1), 0.0);
  for (double x : {-2.0, 0.0, 0.5, 7.0}) {
    EXPECT_EQ(view->value(v1(x)), base->value(v1(x)));
    EXPECT_EQ(view->gradient(v1(x))(0), base->gradient(v1(x))(0));
  }
  EXPECT_EQ(*view->lipschitz(1), 1.0);
}

TEST(MakeRegularized, LogisticGradientShiftMatchesFiniteDifferences) {
  auto base = logistic_problem(synthetic_logistic(30, 4, 3));
  std::mt19937_64 rng(11);
  const Vector center = gradnorm::testing::random_vector(rng, 4);
  auto view = make_regularized(base, center, 0.1);
  for (int k = 0; k < 5; ++k) {
    const Vector x = gradnorm::testing::random_vector(rng, 4);
    const Vector expected = base->gradient(x) + 0.1 * (x - center);
    EXPECT_LT((view->gradient(x) - expected).norm(), 1e-14);
    EXPECT_LT((gradnorm::testing::fd_gradient(*view, x) - expected).norm(), 1e-7);
  }
}

TEST(MakeRegularized, ThirdDerivativesUnchanged) {
  auto base = std::make_shared<RandomQuartic>(3, 5);
  auto view = make_regularized(base, Vector::Ones(3), 4.0);
  const Vector x = Vector::LinSpaced(3, -1.0, 1.0);
  const Vector h = Vector::LinSpaced(3, 0.3, -0.7);
  const ThirdContraction a = base->third_contract(x, h);
  const ThirdContraction b = view->third_contract(x, h);
  EXPECT_EQ((a.vector - b.vector).norm(), 0.0);
  EXPECT_EQ(a.scalar, b.scalar);
}

TEST(MakeRegularized, DeclaredConstants) {
  auto base = hard_family_problem({3, 5, 5});
  auto view = make_regularized(base, Vector::Zero(5), 0.25);
  EXPECT_EQ(view->lipschitz(3), base->lipschitz(3));
  EXPECT_FALSE(view->lipschitz(1).has_value());

  auto q = half_squared_norm(2);
  auto qv = make_regularized(q, Vector::Zero(2), 0.25);
  EXPECT_DOUBLE_EQ(*qv->lipschitz(1), 1.25);
  EXPECT_DOUBLE_EQ(*qv->lipschitz(2), 0.0);
  EXPECT_DOUBLE_EQ(regularized_lipschitz(3.0, 1, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(regularized_lipschitz(3.0, 2, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(regularized_lipschitz(3.0, 3, 2.0), 3.0);
}

TEST(MakeRegularized, Composition) {
  auto base = half_squared_norm(2);
  Vector z1(2), z2(2);
  z1 << 1, 0;
  z2 << 0, -1;
  auto twice = make_regularized(make_regularized(base, z1, 1.0), z2, 3.0);
  Vector x(2);
  x << 0.5, 2.0;
  const double expected = 0.5 * x.squaredNorm() + 0.5 * (x - z1).squaredNorm() + 1.5 * (x - z2).squaredNorm();
  EXPECT_NEAR(twice->value(x), expected, 1e-14);
  const Vector g = x + (x - z1) + 3.0 * (x - z2);
  EXPECT_LT((twice->gradient(x) - g).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(*twice->lipschitz(1), 5.0);
}

TEST(MakeRegularized, Errors) {
  auto base = half_squared_norm(2);
  EXPECT_THROW(make_regularized(base, Vector::Zero(3), 1.0), InputError);
  EXPECT_THROW(make_regularized(base, Vector::Zero(2), -1.0), InputError);
  EXPECT_THROW(make_regularized(nullptr, Vector::Zero(2), 1.0), InputError);
}

TEST(MakeRegularized, ConvexAndStronglyConvex) {
  auto base = logistic_problem(synthetic_logistic(40, 5, 8));
  const double mu = 0.3;
  std::mt19937_64 rng(4);
  auto view = make_regularized(base, gradnorm::testing::random_vector(rng, 5), mu);
  for (int k = 0; k < 50; ++k) {
    const Vector x = gradnorm::testing::random_vector(rng, 5, 2.0);
    const Vector y = gradnorm::testing::random_vector(rng, 5, 2.0);
    const Vector d = gradnorm::testing::random_vector(rng, 5);
    const double t = 1e-3;
    const double second = view->value(x + t * d) - 2 * view->value(x) + view->value(x - t * d);
    EXPECT_GE(second, -1e-10);
    const double lower = view->value(x) + view->gradient(x).dot(y - x) + 0.5 * mu * (y - x).squaredNorm();
    EXPECT_GE(view->value(y) - lower, -1e-12);
  }
}

TEST(ThirdDirectionalHessian, MatchesExplicitTensor) {
  // Quartic with one term: D^3 f[h,.,.] = 6 c <a,x> <a,h> a a'.
  RandomQuartic f(3, 21, 1);
  const Vector x = Vector::LinSpaced(3, 0.2, 0.9);
  const Vector h = Vector::LinSpaced(3, -1.0, 0.4);
  const Matrix T = third_directional_hessian(f, x, h);
  EXPECT_LT((T - T.transpose()).norm(), 1e-14);
  EXPECT_LT((T * h - f.third_contract(x, h).vector).norm(), 1e-10 * (1 + T.norm()));
  const double t = 1e-4;
  const Matrix fd = (f.hessian(x + t * h) - f.hessian(x - t * h)) / (2 * t);
  EXPECT_LT((T - fd).norm(), 1e-6 * (1 + T.norm()));
}

TEST(RequireOrder, Checks) {
  auto q = half_squared_norm(2);
  EXPECT_NO_THROW(require_order(*q, 2));
  EXPECT_THROW(require_order(*q, 3), CapabilityError);
  EXPECT_THROW(require_order(*q, 0), InputError);
  EXPECT_THROW(require_order(*q, 4), InputError);
  EXPECT_THROW(q->third_contract(Vector::Zero(2), Vector::Ones(2)), CapabilityError);
}

TEST(FdCheck, QuadraticOrderTwoExact) {
  auto q = half_squared_norm(4);
  const Vector x = Vector::LinSpaced(4, -3.0, 2.0);
  const FdReport rep = fd_check(*q, x, 2);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.at(2).max_rel_error, 1e-9);
  EXPECT_EQ(rep.hessian_asymmetry, 0.0);
}

TEST(FdCheck, LogisticAtOriginOrderOne) {
  auto f = logistic_problem(synthetic_logistic(100, 10, 42));
  FdOptions opts;
  opts.step = 1e-5;
  opts.tolerance = 1e-5;
  const FdReport rep = fd_check(*f, Vector::Zero(10), 1, opts);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.at(1).max_rel_error, 1e-5);
}

TEST(FdCheck, InjectedGradientFault) {
  auto f = logistic_problem(synthetic_logistic(20, 3, 1));
  LambdaOracle broken;
  broken.n = 3;
  broken.order = 1;
  broken.f = [f](const Vector& x) { return f->value(x); };
  broken.g = [f](const Vector& x) {
    Vector g = f->gradient(x);
    g(0) += 1.0;
    return g;
  };
  const FdReport rep = fd_check(broken, Vector::Constant(3, 0.3), 1);
  EXPECT_FALSE(rep.pass);
  EXPECT_FALSE(rep.at(1).pass);
  EXPECT_EQ(rep.at(1).worst_coordinate, 0);
}

TEST(FdCheck, InjectedThirdOrderFault) {
  RandomQuartic good(3, 2);
  struct Broken : RandomQuartic {
    using RandomQuartic::RandomQuartic;
    ThirdContraction third_contract(const Vector& x, const Vector& h) const override {
      ThirdContraction t = RandomQuartic::third_contract(x, h);
      t.vector(1) += 0.5;
      return t;
    }
  } bad(3, 2);
  const Vector x = Vector::Constant(3, 0.4);
  EXPECT_TRUE(fd_check(good, x, 3).pass);
  const FdReport rep = fd_check(bad, x, 3);
  EXPECT_FALSE(rep.at(3).pass);
  EXPECT_TRUE(rep.at(1).pass);
  EXPECT_TRUE(rep.at(2).pass);
}

TEST(FdCheck, NonFiniteValueIsEvaluationError) {
  LambdaOracle f;
  f.n = 1;
  f.f = [](const Vector& x) { return x(0) > 0.5 ? std::nan("") : x(0); };
  f.g = [](const Vector&) { return Vector::Ones(1); };
  EXPECT_THROW(fd_check(f, v1(0.5), 1), EvaluationError);
  Vector bad = v1(std::numeric_limits<double>::infinity());
  EXPECT_THROW(fd_check(f, bad, 1), EvaluationError);
}

TEST(FdCheck, InvalidArguments) {
  auto q = half_squared_norm(2);
  FdOptions opts;
  opts.step = -1.0;
  EXPECT_THROW(fd_check(*q, Vector::Zero(2), 1, opts), InputError);
  EXPECT_THROW(fd_check(*q, Vector::Zero(3), 1), InputError);
  EXPECT_THROW(fd_check(*q, Vector::Zero(2), 3), CapabilityError);
}

TEST(FdCheck, AsymmetricHessianFails) {
  LambdaOracle f;
  f.n = 2;
  f.order = 2;
  f.f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  f.g = [](const Vector& x) { return x; };
  f.H = [](const Vector&) {
    Matrix H = Matrix::Identity(2, 2);
    H(0, 1) = 1e-6;
    return H;
  };
  const FdReport rep = fd_check(f, Vector::Ones(2), 2);
  EXPECT_GT(rep.hessian_asymmetry, 1e-12);
  EXPECT_FALSE(rep.pass);
}
