#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gradnorm/errors.hpp"
#include "gradnorm/problems.hpp"

namespace gradnorm {

QuadraticOracle::QuadraticOracle(Matrix Q, Vector b) : Q_(std::move(Q)), b_(std::move(b)) {
  if (b_.size() == 0) throw InputError("quadratic: empty problem");
  if (Q_.rows() != b_.size() || Q_.cols() != b_.size()) {
    throw InputError("quadratic: Q must be n x n with n = size of b");
  }
  if (!Q_.allFinite() || !b_.allFinite()) throw InputError("quadratic: non-finite data");
  const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
  if ((Q_ - Q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InputError("quadratic: Q is not symmetric");
  }
  Q_ = 0.5 * (Q_ + Q_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw InputError("quadratic: Q is not positive semidefinite");
  }
  lambda_max_ = std::max(0.0, eig.eigenvalues().maxCoeff());
}

double QuadraticOracle::value(const Vector& x) const { return 0.5 * x.dot(Q_ * x) - b_.dot(x); }

Vector QuadraticOracle::gradient(const Vector& x) const { return Q_ * x - b_; }

Matrix QuadraticOracle::hessian(const Vector&) const { return Q_; }

ThirdContraction QuadraticOracle::third_contract(const Vector& x, const Vector&) const {
  return {Vector::Zero(x.size()), 0.0};
}

std::optional<double> QuadraticOracle::lipschitz(int p) const {
  if (p == 1) return lambda_max_;
  if (p == 2 || p == 3) return 0.0;
  return std::nullopt;
}

std::shared_ptr<QuadraticOracle> quadratic_problem(Matrix Q, Vector b) {
  return std::make_shared<QuadraticOracle>(std::move(Q), std::move(b));
}

std::shared_ptr<QuadraticOracle> random_quadratic(int n, std::uint64_t seed, double lambda_min,
                                                  double lambda_max) {
  if (n < 1) throw InputError("random_quadratic: n must be >= 1");
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min)) {
    throw InputError("random_quadratic: need 0 < lambda_min <= lambda_max");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix G(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix V = qr.householderQ();
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0) V.col(j) *= -1.0;

  Vector lambda(n);
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
    lambda(i) = lambda_min * std::pow(lambda_max / lambda_min, t);
  }
  Vector b(n);
  for (int i = 0; i < n; ++i) b(i) = normal(rng);
  Matrix Q = V * lambda.asDiagonal() * V.transpose();
  Q = 0.5 * (Q + Q.transpose());
  return quadratic_problem(std::move(Q), std::move(b));
}

}  // namespace gradnorm
